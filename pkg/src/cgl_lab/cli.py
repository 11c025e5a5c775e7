"""Batch front-end.

    cgl-lab <command> [--config path] [--out dir] [--key=value ...]
    cgl-lab sweep --config sweep.json [--out dir] [--workers n]

Flags override keys from the config file. Exit codes: 0 success, 2 bad
configuration, 3 numerical failure, 4 nonconvergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bifurcation, boundstate, floquet, params, stability
from .discretization import BC, Field, Grid, norm_h1, random_field
from .errors import HypothesisError, NonConvergenceError, NumericalFailure, BlowUp, ContradictionError
from .evolution import Outcome, Scheme, SolverConfig, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NONCONVERGENCE = 4

COMMANDS = ("classify", "boundstate", "simulate", "floquet", "bifurcate", "blowup-demo")


class ConfigError(ValueError):
    pass


REQUIRED = object()

_PARAM_KEYS = {name: (float, REQUIRED) for name in
               ("a", "alpha", "b", "beta", "c", "gamma", "k", "sigma1", "sigma2")}
_GRID_KEYS = {"x0": (float, 0.0), "x1": (float, 1.0), "n": (int, 513),
              "y0": (float, None), "y1": (float, None), "ny": (int, None)}

KEYS: dict[str, dict[str, tuple[type, Any]]] = {
    "classify": {**_PARAM_KEYS, "domain_volume": (float, None), "dimension": (int, 1),
                 "lp_exponent": (float, 2.0), "require_bounded": (bool, False)},
    "boundstate": {"theta": (float, REQUIRED), "omega": (float, REQUIRED), "k": (float, REQUIRED),
                   "sigma1": (float, REQUIRED), "sigma2": (float, REQUIRED), "chi": (int, 1),
                   "half_length": (float, None), "n": (int, 4096)},
    "simulate": {**_PARAM_KEYS, **_GRID_KEYS, "bc": (str, "dirichlet"), "init": (str, "sine"),
                 "amplitude": (float, 1.0), "mode": (int, 1), "seed": (int, 0),
                 "n_modes": (int, 32), "h1_norm": (float, None), "dt": (float, None),
                 "t_end": (float, 1.0), "blowup_threshold": (float, 1e6),
                 "diag_stride": (int, 1), "scheme": (str, "eigen")},
    "floquet": {**_PARAM_KEYS, "x0": (float, 0.0), "x1": (float, 1.0), "n": (int, 65),
                "steps": (int, 4096), "escape_n": (int, 10)},
    "bifurcate": {"theta": (float, REQUIRED), "gamma1": (float, REQUIRED),
                  "gamma2": (float, REQUIRED), "chi": (int, REQUIRED),
                  "sigma1": (float, REQUIRED), "sigma2": (float, REQUIRED), "k": (float, 0.0),
                  "n": (int, 128), "basis_size": (int, 400), "eps_max": (float, 1e-2),
                  "eps_count": (int, 11), "permute": (bool, True), "override": (bool, False)},
    "blowup-demo": {"theta": (float, 0.0), "nu": (float, 0.0), "sigma1": (float, 2.0),
                    "sigma2": (float, 4.0), "k": (float, 0.0), "amplitude": (float, 6.0),
                    "n": (int, 513), "dt": (float, 1e-3), "t_end": (float, 1.0),
                    "blowup_threshold": (float, 1e6), "check_halving": (bool, True)},
}


@dataclass
class Scenario:
    command: str
    values: dict[str, Any]
    out: Path = field(default_factory=lambda: Path("."))

    def __getitem__(self, key: str) -> Any:
        return self.values[key]


def _coerce(key: str, kind: type, value: Any) -> Any:
    if value is None:
        return None
    if kind is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key}: expected true/false, got {value!r}")
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value


def _flag_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_overrides(extra: list[str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        body = tok[2:]
        if "=" in body:
            key, raw = body.split("=", 1)
        elif i + 1 < len(extra):
            key, raw = body, extra[i + 1]
            i += 1
        else:
            raise ConfigError(f"flag --{body} needs a value")
        out[key.replace("-", "_")] = _flag_value(raw)
        i += 1
    return out


def build_scenario(raw: dict[str, Any], out: Path | str = ".") -> Scenario:
    """Check keys and types against the command table, fill defaults, test invariants."""
    raw = dict(raw)
    command = raw.pop("command", None)
    raw.pop("spec_version", None)
    if command not in KEYS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}; got {command!r}")
    table = KEYS[command]
    for key in raw:
        if key not in table:
            raise ConfigError(f"unknown key {key!r} for command {command}")
    values = {}
    for key, (kind, default) in table.items():
        if key in raw:
            values[key] = _coerce(key, kind, raw[key])
        elif default is REQUIRED:
            raise ConfigError(f"missing required key {key!r}")
        else:
            values[key] = default
    scenario = Scenario(command, values, Path(out))
    try:
        _validate(scenario)
    except (ValueError, HypothesisError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return scenario


def parse_config(argv: list[str]) -> Scenario:
    """Command line (and optional JSON file) to a validated Scenario."""
    parser = argparse.ArgumentParser(prog="cgl-lab", allow_abbrev=False)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path)
    parser.add_argument("--out", type=Path, default=Path("."))
    ns, extra = parser.parse_known_args(argv)
    raw: dict[str, Any] = {}
    if ns.config is not None:
        try:
            raw = json.loads(ns.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        if raw.get("command", ns.command) != ns.command:
            raise ConfigError(f"config is for {raw['command']!r}, not {ns.command!r}")
    raw.update(_parse_overrides(extra))
    raw["command"] = ns.command
    return build_scenario(raw, ns.out)


# domain objects built from a scenario

def _paramset(s: Scenario) -> params.ParamSet:
    return params.ParamSet(*(s[k] for k in _PARAM_KEYS))


def _grid(s: Scenario) -> Grid:
    if s["ny"] is None:
        return Grid.interval(s["x0"], s["x1"], s["n"])
    y0 = 0.0 if s["y0"] is None else s["y0"]
    y1 = 1.0 if s["y1"] is None else s["y1"]
    return Grid.rectangle(s["x0"], s["x1"], y0, y1, s["n"], s["ny"])


def _trig(s: Scenario) -> params.TrigParamSet:
    return params.TrigParamSet(s["theta"], s["gamma1"], s["gamma2"], s["chi"], s["k"],
                               s["sigma1"], s["sigma2"])


def _validate(s: Scenario) -> None:
    c = s.command
    if c in ("classify", "simulate", "floquet"):
        _paramset(s)
    if c == "simulate":
        _grid(s)
        BC(s["bc"])
        Scheme(s["scheme"])
        if s["init"] not in ("sine", "random"):
            raise ConfigError("init must be 'sine' or 'random'")
    if c == "boundstate":
        boundstate.BoundStateSpec(s["theta"], s["omega"], s["k"], s["sigma1"], s["sigma2"], s["chi"])
    if c == "bifurcate":
        _trig(s)
        if s["eps_count"] < 3 or not s["eps_max"] > 0:
            raise ConfigError("bifurcate needs eps_count >= 3 and eps_max > 0")
    if c == "blowup-demo":
        params.rotated_params(s["theta"], s["nu"], s["sigma1"], s["sigma2"], s["k"])


# output helpers

def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def write_json(path: Path, payload: dict) -> None:
    payload = {"spec_version": params.SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header: list[str] | tuple[str, ...], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


# command bodies; each returns an exit code

def _run_classify(s: Scenario) -> int:
    rep = params.classify(_paramset(s), s["domain_volume"], s["dimension"], s["lp_exponent"],
                          s["require_bounded"])
    write_json(s.out / "classify.json", rep.to_dict())
    return EXIT_OK


def _run_boundstate(s: Scenario) -> int:
    spec = boundstate.BoundStateSpec(s["theta"], s["omega"], s["k"], s["sigma1"], s["sigma2"], s["chi"])
    coeffs, prof, bs, res = boundstate.build_bound_state(spec, s["half_length"], s["n"])
    x = prof.grid.axes[0]
    H = prof.first_integral
    write_csv(s.out / "boundstate_profile.csv", ("x", "psi", "dpsi", "re_phi", "im_phi", "first_integral"),
              zip(x, prof.psi, prof.dpsi, bs.phi.real, bs.phi.imag, H))
    write_json(s.out / "boundstate.json", {
        "coeffs": {"d": coeffs.d, "gamma1": coeffs.gamma1, "gamma2": coeffs.gamma2,
                   "epsilon": coeffs.epsilon, "eta1": coeffs.eta1, "eta2": coeffs.eta2},
        "peak": prof.x0,
        "residual": res,
        "richardson_error": prof.richardson_error,
        "first_integral_max": float(np.max(np.abs(H))),
        "tail_negligible": prof.tail_negligible,
        "half_length": float(x[-1]),
        "nodes": int(x.size),
    })
    return EXIT_OK


def _initial(s: Scenario, grid: Grid) -> Field:
    bc = BC(s["bc"])
    if s["init"] == "random":
        u = random_field(grid, s["n_modes"], s["seed"], bc=bc)
    else:
        m, lens, lo = s["mode"], grid.lengths, (grid.x0, grid.y0)
        trig = np.sin if bc is BC.DIRICHLET else np.cos

        def shape(*xs):
            out = 1.0
            for x, L, a in zip(xs, lens, lo):
                out = out * trig(m * np.pi * (x - a) / L)
            return s["amplitude"] * out

        u = Field.from_function(grid, shape, bc)
    if s["h1_norm"] is not None:
        u = u * (s["h1_norm"] / norm_h1(u))
    return u


def _run_simulate(s: Scenario) -> int:
    p = _paramset(s)
    grid = _grid(s)
    u0 = _initial(s, grid)
    cfg = SolverConfig(s["dt"], s["t_end"], s["blowup_threshold"], s["diag_stride"], Scheme(s["scheme"]))
    res = run(u0, p, cfg)
    res.log.to_csv(s.out / "simulate_diagnostics.csv")
    res.field.to_csv(s.out / "simulate_final.csv")
    summary = res.summary()
    summary.pop("spec_version")
    if u0.bc is BC.DIRICHLET and res.log.t.size > 1:
        summary["lyapunov"] = {k: v for k, v in stability.verify_decay(res.log).to_dict().items()
                               if k != "spec_version"}
    summary["field"] = res.field.header()
    summary["h1_initial"] = norm_h1(u0)
    summary["h1_final"] = norm_h1(res.field)
    write_json(s.out / "simulate.json", summary)
    return EXIT_OK if res.outcome is Outcome.COMPLETED else EXIT_NUMERICAL


def _run_floquet(s: Scenario) -> int:
    p = _paramset(s)
    orbit = floquet.build_orbit(p)
    domain = Grid.interval(s["x0"], s["x1"], s["n"])
    rep = floquet.stability_verdict(orbit, domain, s["steps"])
    payload = rep.to_dict()
    payload.pop("spec_version")
    if p.b > 0 and p.k < 0:
        demo = floquet.instability_blowup_demo(orbit, s["escape_n"])
        payload["escape"] = {"n": s["escape_n"], "time": demo.escape_time,
                             "start_radius": demo.start_radius, "escape_radius": demo.escape_radius,
                             "quadrature_error": demo.quadrature_error}
    write_json(s.out / "floquet.json", payload)
    write_csv(s.out / "floquet_multipliers.csv",
              ("mu_delta", "re_lambda", "im_lambda", "min_abs_multiplier", "max_abs_multiplier",
               "product_error", "margin"), rep.csv_rows())
    return EXIT_OK


def _root_tag(alpha: complex) -> str:
    def part(x: float) -> str:
        x = 0.0 if abs(x) < 1e-12 else x
        return f"{x:+.6g}".replace("+", "p").replace("-", "m").replace(".", "_")
    return f"{part(alpha.real)}{part(alpha.imag)}i"


def _run_bifurcate(s: Scenario) -> int:
    trig = _trig(s)
    bifurcation.check_exponents(trig, 2, s["override"])
    base = bifurcation.square_pair(s["n"], s["basis_size"])
    pairs = [("u1u2", base)] + ([("u2u1", base.swapped())] if s["permute"] else [])
    eps_grid = np.linspace(0.0, s["eps_max"], s["eps_count"])
    summary = []
    code = EXIT_OK
    for label, pair in pairs:
        roots = bifurcation.find_roots_P(pair, trig.sigma1)
        for root in roots:
            entry = {"ordering": label, "root": root.to_dict()}
            if not root.simple:
                entry["skipped"] = "degenerate root"
                summary.append(entry)
                continue
            br = bifurcation.continue_branch(pair, trig, root.alpha, eps_grid, override=s["override"])
            name = f"branch_{label}_{_root_tag(root.alpha)}.csv"
            write_csv(s.out / name, bifurcation.Branch.CSV_HEADER, br.rows())
            entry.update(br.to_dict())
            entry["csv"] = name
            if len(br.points) >= 4:
                entry["asymptotics"] = bifurcation.asymptotic_check(br, pair, trig).to_dict()
            if br.truncated:
                code = EXIT_NONCONVERGENCE
            summary.append(entry)
    write_json(s.out / "bifurcate.json", {"lambda0": base.lambda0, "branches": summary})
    return code


def _run_blowup_demo(s: Scenario) -> int:
    p = params.rotated_params(s["theta"], s["nu"], s["sigma1"], s["sigma2"], s["k"])
    grid = Grid.interval(0.0, 1.0, s["n"])
    u0 = Field.from_function(grid, lambda x: s["amplitude"] * np.sin(np.pi * x))
    energy = params.blowup_energy(u0, s["theta"], s["nu"], s["sigma1"], s["sigma2"], s["k"])
    runs = []
    dts = [s["dt"], 0.5 * s["dt"]] if s["check_halving"] else [s["dt"]]
    for dt in dts:
        res = run(u0, p, SolverConfig(dt, s["t_end"], s["blowup_threshold"]))
        runs.append({"dt": dt, "outcome": res.outcome.value, "time": res.time,
                     "stop_reason": res.log.stop_reason, "steps": res.log.steps})
        if dt == s["dt"]:
            res.log.to_csv(s.out / "blowup_demo_diagnostics.csv")
    payload = {"energy": energy.energy, "energy_certifies": energy.hypotheses_hold, "runs": runs,
               "outcome": runs[0]["outcome"], "blowup_time": runs[0]["time"]}
    if len(runs) == 2 and all(r["outcome"] == Outcome.BLOWUP.value for r in runs):
        payload["time_relative_change"] = abs(runs[1]["time"] - runs[0]["time"]) / runs[0]["time"]
    write_json(s.out / "blowup_demo.json", payload)
    return EXIT_OK if runs[0]["outcome"] == Outcome.BLOWUP.value else EXIT_NUMERICAL


_DISPATCH: dict[str, Callable[[Scenario], int]] = {
    "classify": _run_classify,
    "boundstate": _run_boundstate,
    "simulate": _run_simulate,
    "floquet": _run_floquet,
    "bifurcate": _run_bifurcate,
    "blowup-demo": _run_blowup_demo,
}


def run_scenario(s: Scenario) -> int:
    s.out.mkdir(parents=True, exist_ok=True)
    try:
        return _DISPATCH[s.command](s)
    except NonConvergenceError as exc:
        print(f"cgl-lab: nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (NumericalFailure, BlowUp, ContradictionError, ArithmeticError) as exc:
        print(f"cgl-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (HypothesisError, ValueError) as exc:
        print(f"cgl-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _sweep_one(item: tuple[int, dict, str]) -> int:
    index, raw, out = item
    try:
        sc = build_scenario(raw, Path(out) / f"{index:03d}_{raw.get('command', 'unknown')}")
    except ConfigError as exc:
        print(f"cgl-lab: scenario {index}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_scenario(sc)


def run_sweep(argv: list[str]) -> int:
    """Independent scenarios from {"scenarios": [...]} fanned across worker processes."""
    parser = argparse.ArgumentParser(prog="cgl-lab sweep", allow_abbrev=False)
    parser.add_argument("--config", type=Path, required=True)
    parser.add_argument("--out", type=Path, default=Path("."))
    parser.add_argument("--workers", type=int, default=1)
    ns = parser.parse_args(argv)
    try:
        doc = json.loads(ns.config.read_text())
        items = doc["scenarios"]
        if not isinstance(items, list):
            raise TypeError("scenarios must be a list")
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"cgl-lab: bad sweep file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    jobs = [(i, raw, str(ns.out)) for i, raw in enumerate(items)]
    if ns.workers > 1:
        with ProcessPoolExecutor(ns.workers) as pool:
            codes = list(pool.map(_sweep_one, jobs))
    else:
        codes = [_sweep_one(j) for j in jobs]
    return max(codes, default=EXIT_OK)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "sweep":
        return run_sweep(argv[1:])
    try:
        scenario = parse_config(argv)
    except ConfigError as exc:
        print(f"cgl-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    return run_scenario(scenario)


if __name__ == "__main__":
    sys.exit(main())
