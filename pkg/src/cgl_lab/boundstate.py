"""Explicit one-dimensional bound states u = exp(i omega t) phi(x).

For a normal-form equation with diffusion phase theta, the bound state is
phi = psi exp(i d ln psi), where psi > 0 is the homoclinic solution of

    psi'' = eps psi - eta1 psi^(s1+1) - chi eta2 psi^(s2+1),

and d, eps, eta_j and the nonlinear phases gamma_j are closed-form functions of
(theta, omega, k, s1, s2).  The profile obeys the first integral

    (psi')^2 / 2 + F(psi) = 0,
    F(z) = z^2/2 (-eps + 2 eta1 z^s1/(s1+2) + 2 chi eta2 z^s2/(s2+2)),

and its peak value x0 is the first positive zero of F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .discretization import Grid
from .errors import HypothesisError, StepSizeError
from .params import TrigParamSet

__all__ = [
    "BoundStateSpec",
    "NlsCoeffs",
    "Admissibility",
    "Profile",
    "BoundState",
    "compute_d",
    "compute_gamma",
    "compute_coeffs",
    "admissibility_chi_minus",
    "peak_value",
    "solve_profile",
    "assemble",
    "residual_bs",
    "build_bound_state",
    "default_half_length",
]

PSI_FLOOR = 1e-300
TAIL_TOL = 1e-8


@dataclass(frozen=True)
class BoundStateSpec:
    theta: float
    omega: float
    k: float
    sigma1: float
    sigma2: float
    chi: int = 1

    def __post_init__(self):
        if not abs(self.theta) < math.pi / 2:
            raise HypothesisError("theta must lie in (-pi/2, pi/2)")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise HypothesisError("exponents must be positive")
        if self.chi not in (-1, 1):
            raise HypothesisError("chi must be +1 or -1")
        if self.denominator == 0:
            raise HypothesisError("omega cos(theta) + k sin(theta) must be nonzero")

    @property
    def denominator(self) -> float:
        return self.omega * math.cos(self.theta) + self.k * math.sin(self.theta)

    def trig_params(self, coeffs: "NlsCoeffs") -> TrigParamSet:
        """Normal-form equation for which exp(i omega t) phi is a solution."""
        return TrigParamSet(self.theta, coeffs.gamma1, coeffs.gamma2, self.chi, self.k,
                            self.sigma1, self.sigma2)


@dataclass(frozen=True)
class NlsCoeffs:
    d: float
    gamma1: float
    gamma2: float
    epsilon: float
    eta1: float
    eta2: float


def compute_d(spec: BoundStateSpec) -> float:
    """Chirp parameter; the '+' root of the quadratic, the one giving eps > 0."""
    th, w, k = spec.theta, spec.omega, spec.k
    num = k * math.cos(th) - w * math.sin(th) + math.hypot(w, k)
    return num / spec.denominator


def _tangent_parts(d: float, sigma: float) -> tuple[float, float]:
    return d * (sigma + 4.0), sigma + 2.0 - 2.0 * d * d


def compute_gamma(d: float, theta: float, sigma: float) -> float:
    """Phase gamma with tan(gamma - theta) = d(s+4)/(s+2-2d^2) and the positive sign branch.

    atan2 picks the branch where d sin(gamma-theta) + cos(gamma-theta) > 0,
    because d*N + D = (s+2)(1+d^2) is always positive.
    """
    if sigma <= 0:
        raise HypothesisError("sigma must be positive")
    num, den = _tangent_parts(d, sigma)
    g = theta + math.atan2(num, den)
    g = math.atan2(math.sin(g), math.cos(g))
    return math.pi if g == -math.pi else g


def _eta(d: float, theta: float, gamma: float, sigma: float) -> float:
    num, den = _tangent_parts(d, sigma)
    closed = (sigma + 2.0) / math.hypot(num, den)
    direct = (d * math.sin(gamma - theta) + math.cos(gamma - theta)) / (1.0 + d * d)
    if not math.isclose(closed, direct, rel_tol=1e-12, abs_tol=1e-15):
        raise ArithmeticError(f"eta cross-check failed: {closed!r} vs {direct!r}")
    return closed


def compute_coeffs(spec: BoundStateSpec) -> NlsCoeffs:
    d = compute_d(spec)
    g1 = compute_gamma(d, spec.theta, spec.sigma1)
    g2 = compute_gamma(d, spec.theta, spec.sigma2)
    eps = math.hypot(spec.omega, spec.k) / (1.0 + d * d)
    return NlsCoeffs(d, g1, g2, eps,
                     _eta(d, spec.theta, g1, spec.sigma1),
                     _eta(d, spec.theta, g2, spec.sigma2))


# ---------------------------------------------------------------------------
# Peak value and admissibility
# ---------------------------------------------------------------------------

def _reduced_potential(z: float, c: NlsCoeffs, chi: int, s1: float, s2: float) -> float:
    """2 F(z) / z^2."""
    return (-c.epsilon + 2.0 * c.eta1 * z ** s1 / (s1 + 2.0)
            + 2.0 * chi * c.eta2 * z ** s2 / (s2 + 2.0))


def peak_value(coeffs: NlsCoeffs, chi: int, sigma1: float, sigma2: float) -> float | None:
    """First positive zero of F, or None when F < 0 on the whole half-line."""
    if coeffs.epsilon <= 0 or coeffs.eta1 < 0 or coeffs.eta2 < 0:
        raise HypothesisError("need eps > 0 and eta_j >= 0")
    g = lambda z: _reduced_potential(z, coeffs, chi, sigma1, sigma2)
    if chi == -1 and coeffs.eta2 > 0:
        if sigma2 <= sigma1:
            raise HypothesisError("the damping power must exceed the focusing power")
        # g rises then falls; its maximiser brackets the first root
        zmax = (sigma1 * coeffs.eta1 / (sigma2 * coeffs.eta2)
                * (sigma2 + 2.0) / (sigma1 + 2.0)) ** (1.0 / (sigma2 - sigma1))
        if not g(zmax) > 0:
            return None
        hi = zmax
    else:
        if coeffs.eta1 == 0 and coeffs.eta2 == 0:
            return None
        hi = 1.0
        while g(hi) <= 0:
            hi *= 2.0
    return brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    z0: float | None
    lhs: float
    rhs: float
    reason: str  # "ok", "condition-fails" or "no-root"

    @property
    def value(self) -> float:
        """Bracketed quantity lhs - rhs; the test is value > 0."""
        return self.lhs - self.rhs


def admissibility_chi_minus(coeffs: NlsCoeffs, sigma1: float, sigma2: float) -> Admissibility:
    """Check that the damped profile equation has a homoclinic orbit.

    With z0 the first zero of F, this needs F'(z0) > 0, i.e.

        s1 eta1 z0^(s1-s2)/(s1+2) > s2 eta2/(s2+2).
    """
    if not sigma1 < sigma2:
        raise HypothesisError("admissibility check assumes sigma1 < sigma2")
    z0 = peak_value(coeffs, -1, sigma1, sigma2)
    rhs = sigma2 * coeffs.eta2 / (sigma2 + 2.0)
    if z0 is None:
        return Admissibility(False, None, math.nan, rhs, "no-root")
    lhs = sigma1 * coeffs.eta1 * z0 ** (sigma1 - sigma2) / (sigma1 + 2.0)
    ok = lhs > rhs
    return Admissibility(ok, z0, lhs, rhs, "ok" if ok else "condition-fails")


# ---------------------------------------------------------------------------
# Profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Profile:
    grid: Grid
    psi: np.ndarray
    dpsi: np.ndarray
    x0: float
    coeffs: NlsCoeffs
    chi: int
    sigma1: float
    sigma2: float
    richardson_error: float

    @property
    def tail_negligible(self) -> bool:
        return bool(max(self.psi[0], self.psi[-1]) < TAIL_TOL)

    @cached_property
    def first_integral(self) -> np.ndarray:
        """H = (psi')^2 + 2F(psi); zero on the homoclinic orbit."""
        c, s1, s2 = self.coeffs, self.sigma1, self.sigma2
        p = self.psi
        return (self.dpsi ** 2 - c.epsilon * p ** 2
                + 2.0 * c.eta1 * p ** (s1 + 2) / (s1 + 2)
                + 2.0 * self.chi * c.eta2 * p ** (s2 + 2) / (s2 + 2))

    def decay_slope(self, fraction: float = 0.1) -> float:
        """Least-squares slope of ln psi over the outer ``fraction`` of x > 0."""
        x = self.grid.axes[0]
        mid = x.size // 2
        start = mid + int((1 - fraction) * (x.size - 1 - mid))
        sel = slice(start, None)
        return float(np.polyfit(x[sel], np.log(self.psi[sel]), 1)[0])


def default_half_length(epsilon: float) -> float:
    return max(20.0, 25.0 / math.sqrt(epsilon))


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(tuple(a + 0.5 * h * b for a, b in zip(y, k1)))
    k3 = f(tuple(a + 0.5 * h * b for a, b in zip(y, k2)))
    k4 = f(tuple(a + h * b for a, b in zip(y, k3)))
    return tuple(a + h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def _half_profile(x0: float, c: NlsCoeffs, chi: int, s1: float, s2: float,
                  h: float, steps: int) -> tuple[list[float], list[float]]:
    """March psi from the peak with the full second-order system until it has
    halved, then follow the decaying branch psi' = -sqrt(-2F(psi)).

    Shooting the second-order system all the way out is unstable: errors grow
    like exp(sqrt(eps) x) along the unstable direction of the origin.
    """
    eps, e1, e2 = c.epsilon, c.eta1, c.eta2

    def second_order(y):
        p, q = y
        return (q, eps * p - e1 * p ** (s1 + 1) - chi * e2 * p ** (s2 + 1))

    def rate(p):
        g = eps - 2 * e1 * p ** s1 / (s1 + 2) - 2 * chi * e2 * p ** s2 / (s2 + 2)
        return -p * math.sqrt(g) if g > 0 else 0.0

    psi, dpsi = [x0], [0.0]
    y = (x0, 0.0)
    i = 0
    while i < steps and y[0] > 0.5 * x0:
        y = _rk4(second_order, y, h)
        psi.append(y[0])
        dpsi.append(y[1])
        i += 1
    p = psi[-1]
    first = lambda v: (rate(v[0]),)
    while i < steps:
        (p,) = _rk4(first, (p,), h)
        p = max(p, 0.0)
        psi.append(p)
        dpsi.append(rate(p))
        i += 1
    return psi, dpsi


def solve_profile(coeffs: NlsCoeffs, chi: int, sigma1: float, sigma2: float,
                  L: float | None = None, n: int = 4096) -> Profile:
    """Even, positive homoclinic profile on the node grid of (-L, L) with step L/n."""
    if coeffs.epsilon <= 0 or coeffs.eta1 <= 0 or coeffs.eta2 < 0:
        raise HypothesisError("need eps > 0, eta1 > 0, eta2 >= 0")
    if chi == -1 and coeffs.eta2 > 0:
        adm = admissibility_chi_minus(coeffs, sigma1, sigma2)
        if not adm.admissible:
            raise HypothesisError(f"profile equation not admissible ({adm.reason})")
        x0 = adm.z0
    else:
        x0 = peak_value(coeffs, chi, sigma1, sigma2)
    if L is None:
        L = default_half_length(coeffs.epsilon)
    h = L / n
    psi, dpsi = _half_profile(x0, coeffs, chi, sigma1, sigma2, h, n)
    fine, _ = _half_profile(x0, coeffs, chi, sigma1, sigma2, 0.5 * h, 2 * n)
    psi_arr = np.array(psi)
    discrepancy = float(np.max(np.abs(psi_arr - np.array(fine[::2]))))
    if discrepancy > 1e-6 * x0:
        raise StepSizeError(f"step-halving discrepancy {discrepancy:.2e} exceeds 1e-6 * peak")
    full_psi = np.concatenate([psi_arr[:0:-1], psi_arr])
    dp = np.array(dpsi)
    full_dpsi = np.concatenate([-dp[:0:-1], dp])
    grid = Grid.interval(-L, L, 2 * n + 1)
    return Profile(grid, full_psi, full_dpsi, x0, coeffs, chi, sigma1, sigma2, discrepancy)


# ---------------------------------------------------------------------------
# Bound state and residual
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoundState:
    grid: Grid
    phi: np.ndarray
    coeffs: NlsCoeffs
    psi: np.ndarray


def assemble(profile: Profile, d: float) -> BoundState:
    """phi = psi exp(i d ln psi), extended by 0 where psi underflows."""
    psi = profile.psi
    phi = np.zeros(psi.shape, dtype=complex)
    live = psi >= PSI_FLOOR
    phi[live] = psi[live] * np.exp(1j * d * np.log(psi[live]))
    return BoundState(profile.grid, phi, profile.coeffs, psi)


def residual_bs(bs: BoundState, spec: BoundStateSpec) -> float:
    """Discrete L2 norm of the profile equation residual on interior nodes.

    Dividing the time-independent equation for exp(i omega t) phi by e^{i theta}
    gives, with rotated phases theta~ = pi/2 - theta and gamma_j~ = gamma_j - theta,

        phi'' = omega e^{i theta~} phi + i k e^{i theta~} phi
                - e^{i gamma1~}|phi|^s1 phi - chi e^{i gamma2~}|phi|^s2 phi.
    """
    phi = bs.phi
    (h,) = bs.grid.spacing
    c = bs.coeffs
    tt = math.pi / 2 - spec.theta
    mid = phi[1:-1]
    mod = np.abs(mid)
    d2 = (phi[2:] - 2.0 * mid + phi[:-2]) / (h * h)
    rhs = ((spec.omega + 1j * spec.k) * np.exp(1j * tt) * mid
           - np.exp(1j * (c.gamma1 - spec.theta)) * mod ** spec.sigma1 * mid
           - spec.chi * np.exp(1j * (c.gamma2 - spec.theta)) * mod ** spec.sigma2 * mid)
    return float(math.sqrt(h * np.sum(np.abs(d2 - rhs) ** 2)))


def build_bound_state(spec: BoundStateSpec, L: float | None = None, n: int = 4096
                      ) -> tuple[NlsCoeffs, Profile, BoundState, float]:
    """Coefficients, profile, assembled state and residual in one call."""
    coeffs = compute_coeffs(spec)
    profile = solve_profile(coeffs, spec.chi, spec.sigma1, spec.sigma2, L, n)
    bs = assemble(profile, coeffs.d)
    return coeffs, profile, bs, residual_bs(bs, spec)
