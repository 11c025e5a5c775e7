"""Small-amplitude solution branches near a Dirichlet eigenvalue.

The elliptic problem is written as

    lam u + e^{i theta} Lap u + M(u) = 0,
    M(u) = e^{i g1}|u|^s1 u + chi e^{i g2}|u|^s2 u,

with lam = k - i omega. Near a double eigenvalue lam0 with orthonormal modes
u1, u2 the unknown splits as u = eps u1 + eps alpha u2 + y, y orthogonal to
both modes. Everything is done in a truncated sine/cosine Galerkin basis, in
which the resolvent of the complement is diagonal.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .discretization import BC, EigenBasis, Field, Grid, eigenbasis, inner, integrate, laplacian_values
from .errors import HypothesisError, NoContractionError, NonConvergenceError, ResolventError
from .params import TrigParamSet

__all__ = [
    "DoubleEigenpair",
    "BranchPoint",
    "Branch",
    "RootInfo",
    "AsymptoticReport",
    "square_pair",
    "make_pair",
    "check_exponents",
    "eval_P",
    "find_roots_P",
    "solve_y_fixed_point",
    "y_lipschitz_ratio",
    "solve_branch_point",
    "continue_branch",
    "asymptotic_check",
    "galerkin_residual",
    "grid_residual",
    "rayleigh_lambda",
    "expansion_coefficient",
]

PAIR_TOL = 1e-10
PICARD_TOL = 1e-12
PICARD_MAX = 200
CONTRACTION_LIMIT = 0.9
NEWTON_TOL = 1e-10
NEWTON_MAX = 50
ROOT_TOL = 1e-10
SIMPLE_TOL = 1e-6
DIFF_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class DoubleEigenpair:
    """Eigenvalue lam0 with modes u1, u2 inside a Galerkin basis.

    ``positions`` locates the modes in ``basis``. For a simple eigenvalue
    ``u2`` is None and alpha stays frozen at zero.
    """

    lambda0: float
    u1: Field
    u2: Field | None
    basis: EigenBasis
    positions: tuple[int, ...]

    def __post_init__(self):
        modes = [self.u1] if self.u2 is None else [self.u1, self.u2]
        for u in modes:
            if abs(math.sqrt(abs(inner(u, u))) - 1.0) > PAIR_TOL:
                raise ValueError("pair modes must be L2-normalised")
        if self.u2 is not None and abs(inner(self.u1, self.u2)) > PAIR_TOL:
            raise ValueError("pair modes must be orthogonal")

    @property
    def simple(self) -> bool:
        return self.u2 is None

    @property
    def grid(self) -> Grid:
        return self.basis.grid

    @property
    def complement(self) -> np.ndarray:
        mask = np.ones(len(self.basis), dtype=bool)
        mask[list(self.positions)] = False
        return np.flatnonzero(mask)

    @property
    def spectral_gap(self) -> float:
        mu = self.basis.eigenvalues[self.complement]
        return float(np.min(np.abs(mu - self.lambda0)))

    def eigen_residual(self) -> float:
        """Finite-difference residual of -Lap u = lam0 u, largest over the pair."""
        out = 0.0
        for u in (self.u1, self.u2):
            if u is None:
                continue
            r = laplacian_values(u.values, u.grid, u.bc) + self.lambda0 * u.values
            out = max(out, math.sqrt(float(integrate(np.abs(r) ** 2, u.grid))))
        return out

    def swapped(self) -> "DoubleEigenpair":
        if self.simple:
            raise ValueError("a simple mode has no partner to swap with")
        return DoubleEigenpair(self.lambda0, self.u2, self.u1, self.basis,
                               (self.positions[1], self.positions[0]))

    def with_basis_size(self, count: int) -> "DoubleEigenpair":
        idx = [self.basis.indices[p] for p in self.positions]
        return make_pair(self.grid, idx, count)


def make_pair(grid: Grid, indices: Sequence[tuple[int, ...]], basis_size: int = 400) -> DoubleEigenpair:
    """Pair (or single mode) picked by index tuple from the first ``basis_size`` modes."""
    basis = eigenbasis(grid, BC.DIRICHLET, basis_size)
    pos = tuple(basis.find(tuple(i)) for i in indices)
    if len(pos) not in (1, 2):
        raise ValueError("give one or two mode indices")
    lam = basis.eigenvalues[list(pos)]
    if len(pos) == 2 and abs(lam[0] - lam[1]) > 1e-12 * lam[0]:
        raise ValueError(f"modes {indices} do not share an eigenvalue")
    u1 = basis.mode(pos[0])
    u2 = basis.mode(pos[1]) if len(pos) == 2 else None
    return DoubleEigenpair(float(lam[0]), u1, u2, basis, pos)


def square_pair(n: int = 128, basis_size: int = 400, swap: bool = False) -> DoubleEigenpair:
    """The pair cos(pi x/2) sin(pi y), sin(pi x) cos(pi y/2) on (-1, 1)^2 at 5 pi^2/4."""
    grid = Grid.rectangle(-1.0, 1.0, -1.0, 1.0, n, n)
    idx = [(1, 2), (2, 1)]
    if swap:
        idx.reverse()
    return make_pair(grid, idx, basis_size)


def check_exponents(trig: TrigParamSet, dim: int, override: bool = False) -> None:
    """2 <= s1 + 1 <= s2 < 4/(N-2)^+, needed for the Lipschitz estimates."""
    s1, s2 = trig.sigma1, trig.sigma2
    upper = math.inf if dim <= 2 else 4.0 / (dim - 2)
    if override:
        return
    if s1 < 1:
        raise HypothesisError(f"sigma1={s1} < 1; pass override=True to run anyway")
    if not (s1 + 1 <= s2 < upper):
        raise HypothesisError(f"need sigma1+1 <= sigma2 < {upper}, got {s1}, {s2}")


def _nonlinear(trig: TrigParamSet, u: np.ndarray) -> np.ndarray:
    mod = np.abs(u)
    return (cmath.exp(1j * trig.gamma1) * mod ** trig.sigma1 * u
            + trig.chi * cmath.exp(1j * trig.gamma2) * mod ** trig.sigma2 * u)


# polynomial of the reduced equation

def eval_P(pair: DoubleEigenpair, alpha: complex, sigma1: float) -> complex:
    """Quadrature of |u1 + a u2|^s1 (u1 + a u2)(a u1 - u2); ``a`` is not conjugated."""
    if pair.simple:
        raise ValueError("P needs a double eigenvalue")
    u1, u2 = pair.u1.values, pair.u2.values
    w = u1 + alpha * u2
    return complex(integrate(np.abs(w) ** sigma1 * w * (alpha * u1 - u2), pair.grid))


@dataclass(frozen=True)
class RootInfo:
    alpha: complex
    P_prime: complex  # central difference along the real direction
    jacobian_det: float  # of (Re P, Im P) against (Re a, Im a)
    residual: float

    @property
    def simple(self) -> bool:
        return abs(self.P_prime) > SIMPLE_TOL and abs(self.jacobian_det) > SIMPLE_TOL ** 2

    def to_dict(self) -> dict:
        return {"alpha": [self.alpha.real, self.alpha.imag],
                "P_prime": [self.P_prime.real, self.P_prime.imag],
                "jacobian_det": self.jacobian_det, "residual": self.residual,
                "simple": self.simple}


def _real_jacobian(func, z: complex, h: float = DIFF_STEP) -> np.ndarray:
    dx = (func(z + h) - func(z - h)) / (2 * h)
    dy = (func(z + 1j * h) - func(z - 1j * h)) / (2 * h)
    return np.array([[dx.real, dy.real], [dx.imag, dy.imag]])


def find_roots_P(pair: DoubleEigenpair, sigma1: float, starts: int = 9, box: float = 2.0,
                 max_iter: int = 60) -> list[RootInfo]:
    """Zeros of P by Newton from a grid of complex starts, deduplicated.

    The step uses the real 2x2 Jacobian because P is not holomorphic once
    |.|^s1 sees a complex argument. Roots are sorted by (Re, Im).
    """
    u1, u2 = pair.u1.values, pair.u2.values
    weights = pair.grid.weights

    def P(z: complex) -> complex:
        w = u1 + z * u2
        return complex(np.sum(weights * (np.abs(w) ** sigma1 * w * (z * u1 - u2))))

    found: list[RootInfo] = []
    line = np.linspace(-box, box, starts)
    for re in line:
        for im in line:
            z = complex(re, im)
            for _ in range(max_iter):
                val = P(z)
                if abs(val) < 1e-15:
                    break
                jac = _real_jacobian(P, z)
                try:
                    step = np.linalg.solve(jac, [val.real, val.imag])
                except np.linalg.LinAlgError:
                    break
                z -= complex(step[0], step[1])
                if abs(z) > 1e3 or abs(step[0]) + abs(step[1]) < 1e-15 * max(1.0, abs(z)):
                    break
            res = abs(P(z))
            if not (res < ROOT_TOL and abs(z) <= 1e3):
                continue
            if any(abs(z - r.alpha) < 1e-6 for r in found):
                continue
            deriv = (P(z + DIFF_STEP) - P(z - DIFF_STEP)) / (2 * DIFF_STEP)
            det = float(np.linalg.det(_real_jacobian(P, z)))
            found.append(RootInfo(z, deriv, det, res))
    return sorted(found, key=lambda r: (round(r.alpha.real, 9), round(r.alpha.imag, 9)))


# inner fixed point

def _check_resolvent(pair: DoubleEigenpair, trig: TrigParamSet, lam: complex) -> None:
    radius = 0.5 * pair.spectral_gap
    dist = abs(lam - cmath.exp(1j * trig.theta) * pair.lambda0)
    if dist > radius:
        raise ResolventError(f"|lambda - e^(i theta) lambda0| = {dist:.3e} exceeds r = {radius:.3e}")


def _assemble(pair: DoubleEigenpair, eps: float, alpha: complex, y: np.ndarray) -> np.ndarray:
    c = np.zeros(len(pair.basis), dtype=complex)
    c[pair.complement] = y
    c[pair.positions[0]] = eps
    if not pair.simple:
        c[pair.positions[1]] = eps * alpha
    return c


def _project_M(pair: DoubleEigenpair, trig: TrigParamSet, coeffs: np.ndarray) -> np.ndarray:
    u = pair.basis.synthesize_values(coeffs)
    return pair.basis.project_values(_nonlinear(trig, u))


@dataclass(frozen=True, eq=False)
class FixedPointResult:
    y: np.ndarray
    iterations: int
    contraction: float  # largest ratio of successive differences seen above round-off


def solve_y_fixed_point(pair: DoubleEigenpair, trig: TrigParamSet, eps: float, alpha: complex,
                        lam: complex, override: bool = False,
                        y0: np.ndarray | None = None) -> FixedPointResult:
    """Picard iteration y <- -(lam - e^{i theta} mu_i)^{-1} [M(eps u1 + eps alpha u2 + y)]_i."""
    check_exponents(trig, pair.grid.dim, override)
    _check_resolvent(pair, trig, lam)
    comp = pair.complement
    denom = lam - cmath.exp(1j * trig.theta) * pair.basis.eigenvalues[comp]
    y = np.zeros(comp.size, dtype=complex) if y0 is None else np.asarray(y0, dtype=complex).copy()
    if eps == 0 and y0 is None:
        return FixedPointResult(y, 1, 0.0)
    prev_diff = None
    worst = 0.0
    for it in range(1, PICARD_MAX + 1):
        m = _project_M(pair, trig, _assemble(pair, eps, alpha, y))
        y_new = -m[comp] / denom
        diff = float(np.linalg.norm(y_new - y))
        scale = float(np.linalg.norm(y_new))
        y = y_new
        if not np.isfinite(diff):
            raise NoContractionError(f"fixed-point iterate became non-finite at eps={eps}")
        noise = 1e-13 * max(scale, 1e-300)
        if prev_diff is not None and prev_diff > noise and diff > noise:
            ratio = diff / prev_diff
            worst = max(worst, ratio)
            if ratio >= CONTRACTION_LIMIT:
                raise NoContractionError(
                    f"successive-difference ratio {ratio:.3f} >= {CONTRACTION_LIMIT} at eps={eps}")
        if diff <= PICARD_TOL * scale or scale == 0.0:
            return FixedPointResult(y, it, worst)
        prev_diff = diff
    raise NoContractionError(f"no convergence in {PICARD_MAX} Picard steps at eps={eps}")


def y_h1_norm(pair: DoubleEigenpair, y: np.ndarray) -> float:
    mu = pair.basis.eigenvalues[pair.complement]
    return float(np.sqrt(np.sum((1.0 + mu) * np.abs(y) ** 2)))


def y_lipschitz_ratio(pair: DoubleEigenpair, trig: TrigParamSet, eps: float, alpha: complex,
                      lam: complex, dlam: complex) -> float:
    """||y(lam) - y(lam + dlam)||_H1 / |dlam|."""
    ya = solve_y_fixed_point(pair, trig, eps, alpha, lam).y
    yb = solve_y_fixed_point(pair, trig, eps, alpha, lam + dlam).y
    return y_h1_norm(pair, ya - yb) / abs(dlam)


# outer equations

@dataclass(frozen=True, eq=False)
class BranchPoint:
    eps: float
    alpha: complex
    lam: complex
    y_coeffs: np.ndarray
    residual: float  # Galerkin residual of the full equation
    newton_iterations: int = 0

    def coefficients(self, pair: DoubleEigenpair) -> np.ndarray:
        return _assemble(pair, self.eps, self.alpha, self.y_coeffs)

    def field(self, pair: DoubleEigenpair) -> Field:
        return Field(pair.grid, pair.basis.synthesize_values(self.coefficients(pair)), BC.DIRICHLET)

    def orthogonality(self, pair: DoubleEigenpair) -> float:
        """Largest |inner(y, u_j)| measured by quadrature on the grid."""
        c = np.zeros(len(pair.basis), dtype=complex)
        c[pair.complement] = self.y_coeffs
        y = Field(pair.grid, pair.basis.synthesize_values(c), BC.DIRICHLET)
        modes = [pair.u1] if pair.simple else [pair.u1, pair.u2]
        return max(abs(inner(y, u)) for u in modes)

    def y_norm_h1(self, pair: DoubleEigenpair) -> float:
        return y_h1_norm(pair, self.y_coeffs)


def galerkin_residual(pair: DoubleEigenpair, trig: TrigParamSet, coeffs: np.ndarray,
                      lam: complex) -> float:
    """L2 norm of the projected residual of lam u + e^{i theta} Lap u + M(u)."""
    mu = pair.basis.eigenvalues
    r = (lam - cmath.exp(1j * trig.theta) * mu) * coeffs + _project_M(pair, trig, coeffs)
    return float(np.linalg.norm(r))


def grid_residual(point: BranchPoint, pair: DoubleEigenpair, trig: TrigParamSet) -> float:
    """Same residual on the grid with the finite-difference Laplacian."""
    u = point.field(pair)
    r = (point.lam * u.values + cmath.exp(1j * trig.theta) * laplacian_values(u.values, u.grid, u.bc)
         + _nonlinear(trig, u.values))
    r[u.grid.boundary_mask] = 0.0
    return math.sqrt(float(integrate(np.abs(r) ** 2, u.grid)))


def rayleigh_lambda(pair: DoubleEigenpair, trig: TrigParamSet, coeffs: np.ndarray) -> complex:
    """lam recovered from a solution: -(e^{i theta} Lap u + M u, u) / (u, u)."""
    mu = pair.basis.eigenvalues
    lin = -cmath.exp(1j * trig.theta) * mu * coeffs
    m = _project_M(pair, trig, coeffs)
    return complex(-np.vdot(coeffs, lin + m) / np.vdot(coeffs, coeffs))


def _reduced(pair: DoubleEigenpair, trig: TrigParamSet, eps: float, lam: complex,
             alpha: complex, y0: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    fp = solve_y_fixed_point(pair, trig, eps, alpha, lam, override=True, y0=y0)
    m = _project_M(pair, trig, _assemble(pair, eps, alpha, fp.y))
    m1 = m[pair.positions[0]]
    f1 = lam - cmath.exp(1j * trig.theta) * pair.lambda0 + m1 / eps
    if pair.simple:
        return np.array([f1.real, f1.imag]), fp.y
    m2 = m[pair.positions[1]]
    f2 = (alpha * m1 - m2) / eps ** (trig.sigma1 + 1)
    return np.array([f1.real, f1.imag, f2.real, f2.imag]), fp.y


def solve_branch_point(pair: DoubleEigenpair, trig: TrigParamSet, eps: float,
                       alpha_init: complex, lambda_init: complex | None = None,
                       override: bool = False) -> BranchPoint:
    """Damped Newton on (Re lam, Im lam, Re alpha, Im alpha) with y slaved to the fixed point."""
    check_exponents(trig, pair.grid.dim, override)
    alpha = 0j if pair.simple else complex(alpha_init)
    base = cmath.exp(1j * trig.theta) * pair.lambda0
    if eps == 0:
        y = np.zeros(pair.complement.size, dtype=complex)
        return BranchPoint(0.0, alpha, base, y, 0.0, 0)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    lam = base if lambda_init is None else complex(lambda_init)
    nvar = 2 if pair.simple else 4

    def pack(lam_, alpha_):
        v = [lam_.real, lam_.imag, alpha_.real, alpha_.imag]
        return np.array(v[:nvar])

    def unpack(v):
        a = complex(v[2], v[3]) if nvar == 4 else 0j
        return complex(v[0], v[1]), a

    x = pack(lam, alpha)
    f, y = _reduced(pair, trig, eps, *unpack(x), None)
    fnorm = float(np.linalg.norm(f))
    for it in range(1, NEWTON_MAX + 1):
        if fnorm < NEWTON_TOL:
            break
        jac = np.empty((nvar, nvar))
        for j in range(nvar):
            h = 1e-7 * max(1.0, abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            jac[:, j] = (_reduced(pair, trig, eps, *unpack(xp), y)[0]
                         - _reduced(pair, trig, eps, *unpack(xm), y)[0]) / (2 * h)
        step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        t = 1.0
        while True:
            xt = x + t * step
            try:
                ft, yt = _reduced(pair, trig, eps, *unpack(xt), y)
                ok = float(np.linalg.norm(ft)) < (1 - 1e-4 * t) * fnorm
            except (NoContractionError, ResolventError):
                ok = False
            if ok or t < 1e-6:
                break
            t *= 0.5
        if not ok:
            raise NonConvergenceError(f"Newton stalled at eps={eps} with residual {fnorm:.3e}")
        x, f, y = xt, ft, yt
        fnorm = float(np.linalg.norm(f))
    else:
        if fnorm >= NEWTON_TOL:
            raise NonConvergenceError(f"Newton did not converge in {NEWTON_MAX} steps at eps={eps}")
    lam, alpha = unpack(x)
    res = galerkin_residual(pair, trig, _assemble(pair, eps, alpha, y), lam)
    return BranchPoint(float(eps), alpha, lam, y, res, it - 1 if fnorm < NEWTON_TOL else it)


# continuation

@dataclass(eq=False)
class Branch:
    alpha0: complex
    points: list[BranchPoint] = field(default_factory=list)
    truncated: bool = False
    failure: str = ""
    lipschitz_lambda: float = 0.0
    lipschitz_alpha: float = 0.0
    y_norms: list[float] = field(default_factory=list)

    @property
    def eps(self) -> np.ndarray:
        return np.array([p.eps for p in self.points])

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    CSV_HEADER = ("eps", "re_lambda", "im_lambda", "re_alpha", "im_alpha", "y_h1", "residual")

    def rows(self) -> list[tuple[float, ...]]:
        return [(p.eps, p.lam.real, p.lam.imag, p.alpha.real, p.alpha.imag, n, p.residual)
                for p, n in zip(self.points, self.y_norms)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "alpha0": [self.alpha0.real, self.alpha0.imag],
            "points": len(self.points),
            "truncated": self.truncated,
            "failure": self.failure,
            "lipschitz_lambda": self.lipschitz_lambda,
            "lipschitz_alpha": self.lipschitz_alpha,
            "max_residual": max((p.residual for p in self.points), default=0.0),
        }


def continue_branch(pair: DoubleEigenpair, trig: TrigParamSet, alpha0: complex,
                    eps_grid: Sequence[float], override: bool = False) -> Branch:
    grid = [float(e) for e in eps_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])) or (grid and grid[0] < 0):
        raise ValueError("eps_grid must be increasing and nonnegative")
    check_exponents(trig, pair.grid.dim, override)
    branch = Branch(complex(alpha0))
    alpha, lam = complex(alpha0), None
    for e in grid:
        try:
            pt = solve_branch_point(pair, trig, e, alpha, lam, override=True)
        except (NonConvergenceError, ResolventError) as exc:
            branch.truncated = True
            branch.failure = f"eps={e}: {exc}"
            break
        if branch.points:
            prev = branch.points[-1]
            de = pt.eps - prev.eps
            branch.lipschitz_lambda = max(branch.lipschitz_lambda, abs(pt.lam - prev.lam) / de)
            branch.lipschitz_alpha = max(branch.lipschitz_alpha, abs(pt.alpha - prev.alpha) / de)
        branch.points.append(pt)
        branch.y_norms.append(pt.y_norm_h1(pair))
        alpha, lam = pt.alpha, pt.lam
    return branch


# asymptotics

def expansion_coefficient(pair: DoubleEigenpair, trig: TrigParamSet, alpha0: complex) -> complex:
    """-e^{i g1} int |u1 + a0 u2|^s1 (u1 + a0 u2) u1, the eps^s1 coefficient of lam."""
    w = pair.u1.values if pair.simple else pair.u1.values + alpha0 * pair.u2.values
    val = integrate(np.abs(w) ** trig.sigma1 * w * pair.u1.values, pair.grid)
    return complex(-cmath.exp(1j * trig.gamma1) * val)


@dataclass(frozen=True)
class AsymptoticReport:
    expected: complex
    fitted: complex
    relative_deviation: float
    window_deviations: tuple[float, ...]  # widest window first
    growth_exponent: float  # log-log slope of |lam - e^{i theta} lam0|

    def to_dict(self) -> dict:
        return {
            "expected": [self.expected.real, self.expected.imag],
            "fitted": [self.fitted.real, self.fitted.imag],
            "relative_deviation": self.relative_deviation,
            "window_deviations": list(self.window_deviations),
            "growth_exponent": self.growth_exponent,
        }


def _extrapolate(eps: np.ndarray, ratio: np.ndarray) -> complex:
    re = np.polyfit(eps, ratio.real, 1)[1]
    im = np.polyfit(eps, ratio.imag, 1)[1]
    return complex(re, im)


def asymptotic_check(branch: Branch, pair: DoubleEigenpair, trig: TrigParamSet) -> AsymptoticReport:
    """Extrapolate (lam - e^{i theta} lam0)/eps^s1 to eps = 0 and compare with the quadrature."""
    eps = branch.eps
    keep = eps > 0
    eps = eps[keep]
    if eps.size < 3:
        raise ValueError("need at least three points with eps > 0")
    shift = branch.lambdas[keep] - cmath.exp(1j * trig.theta) * pair.lambda0
    ratio = shift / eps ** trig.sigma1
    expected = expansion_coefficient(pair, trig, branch.alpha0)
    scale = max(abs(expected), 1e-300)
    devs = []
    for stop in range(eps.size, 2, -1):
        devs.append(abs(_extrapolate(eps[:stop], ratio[:stop]) - expected) / scale)
    fitted = _extrapolate(eps, ratio)
    mag = np.abs(shift)
    growth = float(np.polyfit(np.log(eps), np.log(mag), 1)[0]) if np.all(mag > 0) else math.nan
    return AsymptoticReport(expected, fitted, abs(fitted - expected) / scale, tuple(devs), growth)


def summary_json(branches: Sequence[Branch], reports: Sequence[AsymptoticReport | None]) -> str:
    out = []
    for b, r in zip(branches, reports):
        d = b.to_dict()
        d["asymptotics"] = None if r is None else r.to_dict()
        out.append(d)
    return json.dumps({"spec_version": 1, "branches": out}, sort_keys=True, indent=2)
