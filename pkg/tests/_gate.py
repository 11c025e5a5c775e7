"""Records acceptance outcomes so the terminal summary can list one line per criterion."""

import time
from contextlib import contextmanager

RESULTS: dict[int, dict] = {}


@contextmanager
def criterion(number: int, title: str):
    rec = {"title": title, "detail": [], "status": "FAIL"}
    RESULTS[number] = rec
    start = time.perf_counter()
    try:
        yield rec["detail"]
    finally:
        rec["seconds"] = time.perf_counter() - start
    rec["status"] = "PASS"
