import pytest

from _gate import RESULTS
from cgl_lab.bifurcation import square_pair


@pytest.fixture(scope="session")
def pair():
    return square_pair()


@pytest.fixture(scope="session")
def swapped_pair(pair):
    return pair.swapped()


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        rec = RESULTS[number]
        detail = "; ".join(rec["detail"])
        terminalreporter.write_line(
            f"criterion {number:2d} {rec['status']}: {rec['title']} "
            f"[{rec.get('seconds', 0.0):.2f} s] {detail}")
