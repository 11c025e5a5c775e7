"""Floquet analysis of spatially homogeneous periodic orbits under Neumann conditions.

The orbit theta(t) = r0 exp(i freq t) solves the ODE obtained by dropping the
Laplacian.  Linearising around it, a perturbation in the Neumann mode with
eigenvalue mu of -Lap obeys the planar system

    v' = -lambda v + B(t) v,   lambda = (a + i alpha) mu,

written as a real 2x2 system in (Re v, Im v).  The multipliers of its period
map decide orbital stability, and Liouville's formula fixes their product:

    log det M = T (tr B - 2 Re lambda),
    tr B = (2 + s1) b r0^s1 - (2 + s2) c r0^s2 + 2k.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .discretization import Grid
from .errors import ContradictionError, DegenerateOrbitError, HypothesisError, NumericalFailure
from .params import OrbitCase, ParamSet, periodic_orbit_params

__all__ = [
    "PeriodicOrbit",
    "MonodromyEntry",
    "MonodromyReport",
    "Verdict",
    "build_orbit",
    "assemble_B",
    "trace_B",
    "monodromy",
    "product_check",
    "neumann_eigenvalues",
    "stability_verdict",
    "instability_blowup_demo",
    "BlowupDemo",
]

UNIT_CIRCLE_TOL = 1e-8
ACCURACY_TOL = 1e-10


@dataclass(frozen=True)
class PeriodicOrbit:
    r0: float
    freq: float
    period: float
    case: OrbitCase
    params: ParamSet

    def point(self, t: float) -> complex:
        return self.r0 * complex(math.cos(self.freq * t), math.sin(self.freq * t))

    @property
    def defining_residual(self) -> float:
        p = self.params
        return abs(p.b * self.r0 ** p.sigma1 - p.c * self.r0 ** p.sigma2 + p.k)

    @property
    def radial_coefficient(self) -> float:
        """Growth rate of |p|-perturbations off the circle, for the ODE alone."""
        p = self.params
        if self.case is OrbitCase.CASE1_C0:
            return p.sigma1 * p.b * self.r0 ** p.sigma1
        if self.case is OrbitCase.CASE2_K0:
            return -p.c * (p.sigma2 - p.sigma1) * self.r0 ** p.sigma2
        return math.nan


def build_orbit(p: ParamSet) -> PeriodicOrbit:
    info = periodic_orbit_params(p)
    if info is None:
        raise HypothesisError("parameters admit no circular periodic orbit (need c=0, bk<0 or k=0, bc>0)")
    if info.degenerate:
        raise DegenerateOrbitError("orbit frequency is zero; the circle consists of equilibria")
    return PeriodicOrbit(info.r0, info.freq, info.period, info.case, p)


def assemble_B(orbit: PeriodicOrbit, t: float) -> np.ndarray:
    """Real 2x2 matrix of the linearised nonlinearity (plus k) at time t."""
    p = orbit.params
    r = orbit.r0
    th1 = r * math.cos(orbit.freq * t)
    th2 = r * math.sin(orbit.freq * t)
    m = np.zeros((2, 2))
    for coef, phase_coef, s in ((p.b, p.beta, p.sigma1), (-p.c, -p.gamma, p.sigma2)):
        if r == 0:
            continue
        iso = r ** s
        rad = s * r ** (s - 2)
        # (coef + i phase_coef)(|th|^s v + s |th|^(s-2) Re(conj(th) v) th)
        m += np.array([[coef * iso, -phase_coef * iso], [phase_coef * iso, coef * iso]])
        m += rad * np.outer([coef * th1 - phase_coef * th2, coef * th2 + phase_coef * th1],
                            [th1, th2])
    m += p.k * np.eye(2)
    return m


def trace_B(orbit: PeriodicOrbit) -> float:
    p = orbit.params
    r = orbit.r0
    return ((2 + p.sigma1) * p.b * r ** p.sigma1 - (2 + p.sigma2) * p.c * r ** p.sigma2
            + 2 * p.k)


def _lambda_matrix(p: ParamSet, mu: float) -> np.ndarray:
    """Real form of multiplication by -(a + i alpha) mu."""
    return np.array([[-p.a * mu, p.alpha * mu], [-p.alpha * mu, -p.a * mu]])


def _integrate(orbit: PeriodicOrbit, mu: float, steps: int) -> np.ndarray:
    """Classical RK4 for the fundamental matrix over one period."""
    T = orbit.period
    h = T / steps
    lam = _lambda_matrix(orbit.params, mu)
    # B at every half step, reused by consecutive stages
    mats = [(lam + assemble_B(orbit, 0.5 * j * h)).tolist() for j in range(2 * steps + 1)]
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    for i in range(steps):
        A0, Am, A1 = mats[2 * i], mats[2 * i + 1], mats[2 * i + 2]

        def f(A, a, b, c, d):
            return (A[0][0] * a + A[0][1] * c, A[0][0] * b + A[0][1] * d,
                    A[1][0] * a + A[1][1] * c, A[1][0] * b + A[1][1] * d)

        k1 = f(A0, a, b, c, d)
        k2 = f(Am, a + 0.5 * h * k1[0], b + 0.5 * h * k1[1], c + 0.5 * h * k1[2], d + 0.5 * h * k1[3])
        k3 = f(Am, a + 0.5 * h * k2[0], b + 0.5 * h * k2[1], c + 0.5 * h * k2[2], d + 0.5 * h * k2[3])
        k4 = f(A1, a + h * k3[0], b + h * k3[1], c + h * k3[2], d + h * k3[3])
        w = h / 6.0
        a += w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        b += w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        c += w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        d += w * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
    return np.array([[a, b], [c, d]])


def monodromy(orbit: PeriodicOrbit, mu_delta: float, steps: int = 4096,
              max_steps: int = 1 << 20) -> tuple[np.ndarray, np.ndarray]:
    """Period map of the planar variational system and its multipliers.

    The step count starts at ``steps`` and doubles until two successive
    results agree to 1e-10 (relative to the matrix size); the finer one is
    returned.
    """
    if mu_delta < 0:
        raise ValueError("mu_delta must be nonnegative")
    if not math.isfinite(orbit.period):
        raise DegenerateOrbitError("infinite period")
    coarse = _integrate(orbit, mu_delta, steps)
    n = steps
    while True:
        n *= 2
        fine = _integrate(orbit, mu_delta, n)
        scale = max(1.0, float(np.max(np.abs(fine))))
        if np.max(np.abs(fine - coarse)) < ACCURACY_TOL * scale:
            break
        if n >= max_steps:
            raise NumericalFailure(f"monodromy not converged at {n} RK4 steps")
        coarse = fine
    return fine, np.linalg.eigvals(fine)


def product_check(orbit: PeriodicOrbit, mu_delta: float, mono: np.ndarray) -> float:
    """Relative mismatch between log det of the period map and Liouville's formula."""
    det = float(np.linalg.det(mono))
    if not det > 0:
        return math.inf
    log_det = math.log(det)
    expected = orbit.period * (trace_B(orbit) - 2.0 * orbit.params.a * mu_delta)
    return abs(log_det - expected) / max(1.0, abs(log_det))


def neumann_eigenvalues(domain: Grid, limit: float) -> list[float]:
    """Distinct analytic Neumann eigenvalues of -Lap on the domain up to ``limit``."""
    vals = set()
    mx = int(math.floor(domain.lengths[0] * math.sqrt(limit) / math.pi)) + 1
    if domain.dim == 1:
        for i in range(mx + 1):
            vals.add((i * math.pi / domain.lengths[0]) ** 2)
    else:
        my = int(math.floor(domain.lengths[1] * math.sqrt(limit) / math.pi)) + 1
        for i in range(mx + 1):
            for j in range(my + 1):
                vals.add((i * math.pi / domain.lengths[0]) ** 2 + (j * math.pi / domain.lengths[1]) ** 2)
    return sorted(v for v in vals if v <= limit)


class Verdict(str, enum.Enum):
    STABLE = "OrbitallyStable"
    UNSTABLE = "Unstable"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class MonodromyEntry:
    mu_delta: float
    lam: complex
    monodromy: np.ndarray
    multipliers: np.ndarray
    product_error: float
    nontrivial: np.ndarray  # multipliers with the trivial one removed at mu = 0
    trivial: complex | None = None

    @property
    def margin(self) -> float:
        return float(np.max(np.abs(self.nontrivial))) if self.nontrivial.size else 0.0

    def to_dict(self) -> dict:
        mags = np.abs(self.multipliers)
        with np.errstate(divide="ignore"):
            logs = np.log(mags)
        return {
            "mu_delta": self.mu_delta,
            "lambda": [self.lam.real, self.lam.imag],
            "monodromy": self.monodromy.tolist(),
            "multipliers": [[complex(m).real, complex(m).imag] for m in self.multipliers],
            "log_abs_multipliers": [float(x) if np.isfinite(x) else "-inf" for x in logs],
            "product_error": self.product_error,
            "margin": self.margin,
        }


@dataclass(frozen=True, eq=False)
class MonodromyReport:
    orbit: PeriodicOrbit
    entries: tuple[MonodromyEntry, ...]
    verdict: Verdict
    trivial_multiplier: complex
    cutoff_mu: float
    reason: str

    @property
    def margin(self) -> float:
        return max(e.margin for e in self.entries)

    def to_dict(self) -> dict:
        o = self.orbit
        return {
            "spec_version": 1,
            "orbit": {"r0": o.r0, "freq": o.freq, "period": o.period, "case": o.case.value,
                      "params": o.params.to_dict()},
            "verdict": self.verdict.value,
            "reason": self.reason,
            "margin": self.margin,
            "trivial_multiplier": [self.trivial_multiplier.real, self.trivial_multiplier.imag],
            "radial_coefficient": o.radial_coefficient,
            "cutoff_mu": self.cutoff_mu,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def csv_rows(self) -> list[list[float]]:
        rows = []
        for e in self.entries:
            m = sorted(np.abs(e.multipliers))
            rows.append([e.mu_delta, e.lam.real, e.lam.imag, m[0], m[-1], e.product_error, e.margin])
        return rows


def _entry(orbit: PeriodicOrbit, mu: float, steps: int) -> MonodromyEntry:
    mono, mult = monodromy(orbit, mu, steps)
    nontrivial, trivial = mult, None
    if mu == 0:
        drop = int(np.argmin(np.abs(mult - 1.0)))
        nontrivial, trivial = np.delete(mult, drop), complex(mult[drop])
    return MonodromyEntry(mu, orbit.params.diffusion * mu, mono, mult,
                          product_check(orbit, mu, mono), nontrivial, trivial)


def _growth_bound_exponent(orbit: PeriodicOrbit) -> float:
    """Largest eigenvalue of the symmetric part of B(t).

    Rotating the phase conjugates B(t) by a rotation, so this is the same for all t.
    """
    B = assemble_B(orbit, 0.0)
    return float(np.linalg.eigvalsh(0.5 * (B + B.T))[-1])


def stability_verdict(orbit: PeriodicOrbit, domain: Grid, steps: int = 4096) -> MonodromyReport:
    """Multipliers for every Neumann eigenvalue that could reach the unit circle.

    Every multiplier at eigenvalue mu is bounded by exp(T(-a mu + s)) where s is
    the top eigenvalue of the symmetric part of B; enumeration stops at the
    first mu where this bound drops below 0.5.
    """
    p = orbit.params
    T = orbit.period
    s = _growth_bound_exponent(orbit)
    cutoff = max(0.0, (s + math.log(2.0) / T) / p.a)
    mus = neumann_eigenvalues(domain, cutoff)
    if not mus or mus[0] != 0.0:
        mus = [0.0] + mus
    entries = tuple(_entry(orbit, mu, steps) for mu in mus)
    trivial = entries[0].trivial
    mags = np.concatenate([np.abs(e.nontrivial) for e in entries])
    if orbit.radial_coefficient > 0:
        verdict, reason = Verdict.UNSTABLE, "radial linearisation coefficient is positive"
    elif np.any(mags > 1 + UNIT_CIRCLE_TOL):
        verdict, reason = Verdict.UNSTABLE, "a multiplier lies outside the unit disk"
    elif np.any(np.abs(mags - 1) <= UNIT_CIRCLE_TOL):
        verdict, reason = Verdict.INCONCLUSIVE, "a nontrivial multiplier is within 1e-8 of the unit circle"
    else:
        verdict, reason = Verdict.STABLE, "all nontrivial multipliers lie inside the unit disk"
    return MonodromyReport(orbit, entries, verdict, trivial, cutoff, reason)


@dataclass(frozen=True)
class BlowupDemo:
    escape_time: float
    start_radius: float
    escape_radius: float
    quadrature_error: float


def instability_blowup_demo(orbit: PeriodicOrbit, n: int, escape: float = 1e8) -> BlowupDemo:
    """Time for |p|' = b|p|^(s1+1) - c|p|^(s2+1) + k|p| to carry r0 + 1/n past ``escape``.

    The radial equation is scalar and autonomous, so an escaping trajectory
    is monotone and its escape time is the adaptive quadrature of dr / f(r),
    taken in the variable ln r.  Stepping in t instead cannot resolve the
    last stretch: the remaining time at r = 1e8 is below double-precision
    spacing.  A trajectory that turns back or stalls at an equilibrium
    contradicts instability and raises ContradictionError.
    """
    if n < 1:
        raise ValueError("n must be positive")
    p = orbit.params
    start = orbit.r0 + 1.0 / n
    if not escape > start:
        raise ValueError("escape radius must exceed the starting radius")

    def rate(r):
        # f(r) / r
        return p.b * r ** p.sigma1 - p.c * r ** p.sigma2 + p.k

    probe = np.exp(np.linspace(math.log(start), math.log(escape), 4001))
    rates = rate(probe)
    if rates[0] <= 0:
        raise ContradictionError("perturbed orbit falls back towards the circle")
    if np.any(rates <= 0):
        stall = float(probe[np.argmax(rates <= 0)])
        raise ContradictionError(f"trajectory stalls at an equilibrium near |p| = {stall:.6g}")
    t, err = quad(lambda s: 1.0 / rate(math.exp(s)), math.log(start), math.log(escape),
                  epsabs=0.0, epsrel=1e-12, limit=200)
    return BlowupDemo(float(t), start, escape, float(err))
