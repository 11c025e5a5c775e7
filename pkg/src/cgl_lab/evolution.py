"""Time stepping for the two-power Ginzburg-Landau equation with diagnostics.

Each step is a Strang splitting: half a step of the linear flow
u_t = (a + i alpha) Lap u + k u, a full step of the nodewise nonlinear flow
u_t = (b + i beta)|u|^s1 u - (c + i gamma)|u|^s2 u, and another linear half step.

The nonlinear flow is solved in polar form.  The modulus obeys
rho' = b rho^(s1+1) - c rho^(s2+1) and the phase turns at rate
beta rho^s1 - gamma rho^s2; neither depends on the phase itself, so the
whole scheme commutes with multiplication by a constant phase.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .discretization import BC, Field, Grid, gradient_sq_values, laplacian_matrix
from .errors import BlowUp, GridMismatchError, NumericalFailure
from .params import ParamSet, proportional
from .stability import eval_Vdot

__all__ = [
    "Scheme",
    "SolverConfig",
    "DiagnosticsLog",
    "Outcome",
    "RunResult",
    "step",
    "run",
    "diagnostics",
    "DIAGNOSTIC_COLUMNS",
]


class Scheme(str, enum.Enum):
    EIGEN = "eigen"  # exact linear flow in the analytic sine/cosine basis
    CN = "cn"  # Crank-Nicolson on the finite-difference Laplacian


@dataclass(frozen=True)
class SolverConfig:
    dt: float | None = None
    t_end: float = 1.0
    blowup_threshold: float = 1e6
    diag_stride: int = 1
    scheme: Scheme = Scheme.EIGEN
    max_halvings: int = 20

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if self.diag_stride < 1:
            raise ValueError("diag_stride must be at least 1")

    def resolved_dt(self, grid: Grid, p: ParamSet) -> float:
        if self.dt is not None:
            return self.dt
        if self.scheme is Scheme.EIGEN:
            return 1e-3
        h = min(grid.spacing)
        return 0.25 * h * h / p.a


# ---------------------------------------------------------------------------
# Linear half steps
# ---------------------------------------------------------------------------

def _mode_rates(grid: Grid, bc: BC, p: ParamSet) -> np.ndarray:
    """Growth rates -(a + i alpha) mu + k over the transform index grid."""
    mus = []
    for length, m in zip(grid.lengths, grid.shape):
        idx = np.arange(1, m - 1) if bc is BC.DIRICHLET else np.arange(m)
        mus.append((idx * np.pi / length) ** 2)
    mu = mus[0] if grid.dim == 1 else mus[0][:, None] + mus[1][None, :]
    return -p.diffusion * mu + p.k


@lru_cache(maxsize=32)
def _eigen_factor(grid: Grid, bc: BC, p: ParamSet, tau: float) -> np.ndarray:
    return np.exp(tau * _mode_rates(grid, bc, p))


@lru_cache(maxsize=32)
def _cn_solver(grid: Grid, bc: BC, p: ParamSet, tau: float):
    lap = laplacian_matrix(grid, bc, interior=(bc is BC.DIRICHLET))
    op = p.diffusion * lap + p.k * sp.identity(lap.shape[0])
    eye = sp.identity(lap.shape[0], dtype=complex)
    lu = splu((eye - 0.5 * tau * op).tocsc())
    rhs = (eye + 0.5 * tau * op).tocsr()
    return lu, rhs


def _linear(values: np.ndarray, grid: Grid, bc: BC, p: ParamSet, tau: float,
            scheme: Scheme) -> np.ndarray:
    out = np.zeros_like(values)
    inner = tuple(slice(1, -1) for _ in grid.shape)
    if scheme is Scheme.EIGEN:
        fac = _eigen_factor(grid, bc, p, tau)
        if bc is BC.DIRICHLET:
            out[inner] = sfft.idstn(sfft.dstn(values[inner], type=1) * fac, type=1)
        else:
            out = sfft.idctn(sfft.dctn(values, type=1) * fac, type=1)
        return out
    lu, rhs = _cn_solver(grid, bc, p, tau)
    if bc is BC.DIRICHLET:
        block = values[inner]
        out[inner] = lu.solve(rhs @ block.ravel()).reshape(block.shape)
    else:
        out = lu.solve(rhs @ values.ravel()).reshape(values.shape)
    return out


# ---------------------------------------------------------------------------
# Nonlinear substep
# ---------------------------------------------------------------------------

def _rho_rk4(rho: np.ndarray, tau: float, p: ParamSet) -> np.ndarray:
    def f(r):
        r = np.maximum(r, 0.0)
        return p.b * r ** (p.sigma1 + 1) - p.c * r ** (p.sigma2 + 1)

    k1 = f(rho)
    k2 = f(rho + 0.5 * tau * k1)
    k3 = f(rho + 0.5 * tau * k2)
    k4 = f(rho + tau * k3)
    return np.maximum(rho + tau / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), 0.0)


def _nonlinear(values: np.ndarray, p: ParamSet, dt: float) -> np.ndarray:
    rho0 = np.abs(values)
    with np.errstate(over="ignore", invalid="ignore"):
        rho1 = _rho_rk4(rho0, dt, p)
        rho_mid = _rho_rk4(rho0, 0.5 * dt, p)
        turn = dt * (p.beta * rho_mid ** p.sigma1 - p.gamma * rho_mid ** p.sigma2)
        scale = np.divide(rho1, rho0, out=np.zeros_like(rho0), where=rho0 > 0)
        return values * scale * np.exp(1j * turn)


def _check(u: Field, cfg: SolverConfig) -> None:
    if u.bc not in (BC.DIRICHLET, BC.NEUMANN):
        raise GridMismatchError("unsupported boundary condition")
    if cfg.scheme not in (Scheme.EIGEN, Scheme.CN):
        raise ValueError(f"unknown scheme {cfg.scheme}")


def _advance(values: np.ndarray, grid: Grid, bc: BC, p: ParamSet, dt: float,
             scheme: Scheme) -> np.ndarray:
    v = _linear(values, grid, bc, p, 0.5 * dt, scheme)
    v = _nonlinear(v, p, dt)
    return _linear(v, grid, bc, p, 0.5 * dt, scheme)


def step(u: Field, p: ParamSet, cfg: SolverConfig) -> Field:
    """One Strang step of size ``cfg.dt`` (or the scheme default)."""
    _check(u, cfg)
    dt = cfg.resolved_dt(u.grid, p)
    with np.errstate(over="ignore", invalid="ignore"):
        v = _advance(u.values, u.grid, u.bc, p, dt, cfg.scheme)
    if not np.all(np.isfinite(v)):
        raise NumericalFailure("non-finite values after step")
    sup = float(np.max(np.abs(v)))
    if sup > cfg.blowup_threshold:
        raise BlowUp(sup)
    return Field(u.grid, v, u.bc)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

DIAGNOSTIC_COLUMNS = ("t", "l2_sq", "grad_sq", "lp_s1", "lp_s2", "sup", "V", "mass_residual",
                      "vdot")


def diagnostics(u: Field, p: ParamSet) -> dict[str, float]:
    """Norms and Lyapunov quantities of a single field."""
    w = u.grid.weights
    mod = np.abs(u.values)
    l2sq = float(np.sum(w * mod ** 2))
    grad = gradient_sq_values(u.values, u.grid)
    w1 = float(np.sum(w * mod ** (p.sigma1 + 2)))
    w2 = float(np.sum(w * mod ** (p.sigma2 + 2)))
    V = (0.5 * p.a * grad - p.b * w1 / (p.sigma1 + 2) + p.c * w2 / (p.sigma2 + 2)
         - 0.5 * p.k * l2sq)
    vdot = eval_Vdot(u, p) if proportional(p).satisfied else math.nan
    return {"l2_sq": l2sq, "grad_sq": grad, "lp_s1": w1, "lp_s2": w2,
            "sup": float(mod.max()), "V": V, "vdot": vdot}


@dataclass(eq=False)
class DiagnosticsLog:
    params: ParamSet
    t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    l2_sq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    grad_sq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lp_s1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lp_s2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sup: np.ndarray = field(default_factory=lambda: np.zeros(0))
    V: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mass_residual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    vdot: np.ndarray = field(default_factory=lambda: np.zeros(0))
    steps: int = 0
    dt_halvings: int = 0
    stop_reason: str = ""

    @classmethod
    def from_rows(cls, p: ParamSet, rows: list[dict]) -> "DiagnosticsLog":
        cols = {name: np.array([r[name] for r in rows], dtype=float)
                for name in DIAGNOSTIC_COLUMNS if name != "mass_residual"}
        log = cls(p, **cols)
        log.mass_residual = log.mass_balance_residual()
        return log

    def mass_balance_rhs(self) -> np.ndarray:
        """Right side of d/dt (||u||^2 / 2) = -a G + b W1 - c W2 + k ||u||^2."""
        p = self.params
        return -p.a * self.grad_sq + p.b * self.lp_s1 - p.c * self.lp_s2 + p.k * self.l2_sq

    def mass_balance_residual(self) -> np.ndarray:
        """|centred difference of ||u||^2/2 minus the right side|; NaN at the ends."""
        res = np.full(self.t.shape, np.nan)
        if self.t.size >= 3:
            half = 0.5 * self.l2_sq
            deriv = (half[2:] - half[:-2]) / (self.t[2:] - self.t[:-2])
            res[1:-1] = np.abs(deriv - self.mass_balance_rhs()[1:-1])
        return res

    def columns(self) -> np.ndarray:
        return np.column_stack([getattr(self, name) for name in DIAGNOSTIC_COLUMNS])

    def to_csv(self, path) -> None:
        np.savetxt(path, self.columns(), delimiter=",", header=",".join(DIAGNOSTIC_COLUMNS),
                   comments="", fmt="%.17g")


class Outcome(str, enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowUp"
    FAILED = "Failed"


class RunResult(NamedTuple):
    field: Field
    log: DiagnosticsLog
    outcome: Outcome
    time: float  # final time, or the last stable time before blow-up

    def summary(self) -> dict:
        return {
            "spec_version": 1,
            "outcome": self.outcome.value,
            "time": self.time,
            "steps": self.log.steps,
            "dt_halvings": self.log.dt_halvings,
            "stop_reason": self.log.stop_reason,
            "final_sup": float(self.field.sup),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True, indent=2)


def run(u0: Field, p: ParamSet, cfg: SolverConfig) -> RunResult:
    """Integrate to ``cfg.t_end``, logging diagnostics every ``diag_stride`` steps.

    A step that produces non-finite values or more than doubles the sup norm is
    retried with half the step size, at most ``max_halvings`` times over the
    run.  The run stops with outcome BlowUp, at the last stable time, when the
    sup norm crosses the threshold or when a further halving would be needed.
    """
    _check(u0, cfg)
    if u0.sup >= cfg.blowup_threshold:
        raise ValueError("initial sup norm already exceeds the blow-up threshold")
    grid, bc = u0.grid, u0.bc
    dt_nominal = cfg.resolved_dt(grid, p)
    n_nominal = max(1, math.ceil(cfg.t_end / dt_nominal - 1e-9))
    dt = cfg.t_end / n_nominal if cfg.t_end > 0 else dt_nominal
    t = 0.0
    v = u0.values.copy()
    rows = [{"t": 0.0, **diagnostics(u0, p)}]
    steps = halvings = 0
    outcome, reason = Outcome.COMPLETED, ""
    eps_t = 1e-12 * max(1.0, cfg.t_end)
    while t < cfg.t_end - eps_t:
        h = min(dt, cfg.t_end - t)
        sup0 = float(np.max(np.abs(v)))
        with np.errstate(over="ignore", invalid="ignore"):
            new = _advance(v, grid, bc, p, h, cfg.scheme)
        finite = bool(np.all(np.isfinite(new)))
        sup1 = float(np.max(np.abs(new))) if finite else math.inf
        if not finite or sup1 > 2.0 * sup0:
            if halvings < cfg.max_halvings:
                dt *= 0.5
                halvings += 1
                continue
            # the step size has collapsed; non-finite data with no growth history is a failure
            if finite or sup0 > 2.0 * u0.sup:
                outcome, reason = Outcome.BLOWUP, "dt-collapse"
            else:
                outcome, reason = Outcome.FAILED, "non-finite"
            break
        if sup1 > cfg.blowup_threshold:
            outcome, reason = Outcome.BLOWUP, "threshold"
            break
        v = new
        t += h
        steps += 1
        if steps % cfg.diag_stride == 0 or t >= cfg.t_end - eps_t:
            rows.append({"t": t, **diagnostics(Field(grid, v, bc), p)})
    log = DiagnosticsLog.from_rows(p, rows)
    log.steps, log.dt_halvings, log.stop_reason = steps, halvings, reason
    return RunResult(Field(grid, v, bc), log, outcome, t)
