"""Lyapunov functionals for the zero equilibrium and empirical decay checks.

    W_p(u) = int |u|^p
    V(u)   = a/2 int |grad u|^2 - b/(s1+2) int |u|^(s1+2)
             + c/(s2+2) int |u|^(s2+2) - k/2 int |u|^2

When alpha/a = beta/b = gamma/c, V decreases along solutions at the rate

    dV/dt = -int |a Lap u + b|u|^s1 u - c|u|^s2 u + k u|^2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .discretization import BC, Field, gradient_sq, integrate, laplacian_values
from .errors import HypothesisError
from .params import ParamSet, proportional

if TYPE_CHECKING:
    from .evolution import DiagnosticsLog

__all__ = [
    "Lp",
    "H1",
    "LyapunovReport",
    "eval_Wp",
    "eval_V",
    "eval_Vdot",
    "verify_decay",
    "coercivity_constant",
    "MONOTONE_RTOL",
]

MONOTONE_RTOL = 1e-8


@dataclass(frozen=True)
class Lp:
    """Select W_p for ``verify_decay``."""

    p: float


H1 = "H1"


def eval_Wp(u: Field, p: float) -> float:
    if p < 2:
        raise ValueError("W_p is used for p >= 2")
    return float(integrate(np.abs(u.values) ** p, u.grid))


def _v_from_parts(p: ParamSet, l2sq: float, grad: float, w1: float, w2: float) -> float:
    return (0.5 * p.a * grad - p.b * w1 / (p.sigma1 + 2) + p.c * w2 / (p.sigma2 + 2)
            - 0.5 * p.k * l2sq)


def eval_V(u: Field, p: ParamSet) -> float:
    if u.bc is not BC.DIRICHLET:
        raise HypothesisError("V is defined for Dirichlet fields")
    mod = np.abs(u.values)
    return _v_from_parts(
        p,
        float(integrate(mod ** 2, u.grid)),
        gradient_sq(u),
        float(integrate(mod ** (p.sigma1 + 2), u.grid)),
        float(integrate(mod ** (p.sigma2 + 2), u.grid)),
    )


def eval_Vdot(u: Field, p: ParamSet) -> float:
    """The dissipation formula, with the finite-difference Laplacian."""
    cond = proportional(p)
    if not cond.satisfied:
        raise HypothesisError(f"dissipation formula needs {cond.name} (mismatch {cond.lhs:.2e})")
    v = u.values
    mod = np.abs(v)
    g = (p.a * laplacian_values(v, u.grid, u.bc) + p.b * mod ** p.sigma1 * v
         - p.c * mod ** p.sigma2 * v + p.k * v)
    return -float(integrate(np.abs(g) ** 2, u.grid))


def coercivity_constant(p: ParamSet) -> float:
    """M with V(u) >= M ||u||_{H^1}^2 when k < 0.

    Interpolation plus Young bounds the focusing term,
        W_{s1+2} <= s1/s2 W_{s2+2} + (s2-s1)/s2 ||u||^2,
    so when c/(s2+2) >= b s1/((s1+2) s2) the L^{s2+2} part can be dropped and
        V >= a/2 ||grad u||^2 + (|k|/2 - b(s2-s1)/((s1+2) s2)) ||u||^2.
    """
    s1, s2, b = p.sigma1, p.sigma2, p.b
    if p.k >= 0:
        raise HypothesisError("coercivity bound needs k < 0")
    if b <= 0:
        return min(0.5 * p.a, 0.5 * abs(p.k))
    if b * s1 / ((s1 + 2) * s2) > p.c / (s2 + 2):
        raise HypothesisError("b s1/((s1+2) s2) <= c/(s2+2) fails")
    l2_part = 0.5 * abs(p.k) - b * (s2 - s1) / ((s1 + 2) * s2)
    if l2_part < 0:
        raise HypothesisError("b (s2-s1)/((s1+2) s2) <= |k|/2 fails")
    return min(0.5 * p.a, l2_part)


@dataclass(frozen=True, eq=False)
class LyapunovReport:
    which: str
    t: np.ndarray
    values: np.ndarray  # the selected functional
    V: np.ndarray
    vdot_formula: np.ndarray
    vdot_numeric: np.ndarray
    monotone: bool
    decay_rate_estimate: float
    worst_increase: float

    def to_dict(self) -> dict:
        return {
            "spec_version": 1,
            "which": self.which,
            "monotone": self.monotone,
            "decay_rate_estimate": self.decay_rate_estimate,
            "worst_increase": self.worst_increase,
            "samples": len(self.t),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self, path) -> None:
        cols = np.column_stack([self.t, self.values, self.V, self.vdot_formula, self.vdot_numeric])
        np.savetxt(path, cols, delimiter=",", header="t,functional,V,Vdot_formula,Vdot_numeric",
                   comments="", fmt="%.17g")


def _column_for(log: "DiagnosticsLog", which) -> tuple[str, np.ndarray]:
    if which == H1:
        return "H1", log.V
    if not isinstance(which, Lp):
        raise ValueError(f"unknown functional {which!r}")
    s1, s2 = log.params.sigma1, log.params.sigma2
    table = {2.0: log.l2_sq, s1 + 2: log.lp_s1, s2 + 2: log.lp_s2}
    for q, col in table.items():
        if np.isclose(q, which.p, rtol=1e-12, atol=0):
            return f"L{which.p:g}", col
    raise ValueError(f"p={which.p} is not logged; choose from {sorted(table)}")


def verify_decay(log: "DiagnosticsLog", which=H1) -> LyapunovReport:
    """Monotonicity and exponential rate of W_p (``Lp(p)``) or V (``H1``) along a run."""
    name, vals = _column_for(log, which)
    t = log.t
    inc = np.diff(vals) - MONOTONE_RTOL * (1.0 + np.abs(vals[:-1]))
    worst = float(np.max(np.diff(vals))) if vals.size > 1 else 0.0
    monotone = bool(np.all(inc <= 0))
    half = slice(t.size // 2, None)
    tt, vv = t[half], vals[half]
    keep = vv > 0
    if keep.sum() >= 2:
        rate = float(np.polyfit(tt[keep], np.log(vv[keep]), 1)[0])
    else:
        rate = 0.0
    vnum = np.gradient(log.V, t) if t.size > 1 else np.zeros_like(t)
    return LyapunovReport(name, t, vals, log.V, log.vdot, vnum, monotone, rate, worst)
