"""Equation coefficients, the trigonometric normal form, and hypothesis checks.

The equation handled throughout the package is

    u_t = (a + i alpha) Lap u + (b + i beta)|u|^s1 u - (c + i gamma)|u|^s2 u + k u

and its normal form

    u_t = e^{i theta} Lap u + e^{i g1}|u|^s1 u + chi e^{i g2}|u|^s2 u + k u.

All hypothesis checks compare the computed reals exactly: a non-strict
inequality is satisfied on its boundary, a strict one is not.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .discretization import BC, UNIT_BALL_VOLUME, Field, gradient_sq, integrate
from .errors import ConversionError, HypothesisError, MissingInputError

SCHEMA_VERSION = 1
PROPORTIONALITY_RTOL = 1e-12

__all__ = [
    "ParamSet",
    "TrigParamSet",
    "TrigConversion",
    "Condition",
    "HypothesisSet",
    "RegimeReport",
    "OrbitCase",
    "PeriodicOrbitParams",
    "BlowupEnergy",
    "to_trig_form",
    "classify",
    "blowup_energy",
    "periodic_orbit_params",
    "proportional",
    "unit_ball_volume",
    "rotated_params",
]


@dataclass(frozen=True)
class ParamSet:
    a: float
    alpha: float
    b: float
    beta: float
    c: float
    gamma: float
    k: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        for name in ("a", "alpha", "b", "beta", "c", "gamma", "k", "sigma1", "sigma2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.a <= 0:
            raise ValueError("diffusion coefficient a must be positive")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("exponents sigma1, sigma2 must be positive")

    @property
    def diffusion(self) -> complex:
        return complex(self.a, self.alpha)

    @property
    def focusing(self) -> complex:
        return complex(self.b, self.beta)

    @property
    def damping(self) -> complex:
        return complex(self.c, self.gamma)

    def scaled_nonlinearity(self, factor: float) -> "ParamSet":
        """Multiply both nonlinear coefficient pairs by ``factor``."""
        return ParamSet(self.a, self.alpha, factor * self.b, factor * self.beta,
                        factor * self.c, factor * self.gamma, self.k, self.sigma1, self.sigma2)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrigParamSet:
    theta: float
    gamma1: float
    gamma2: float
    chi: int
    k: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        if not abs(self.theta) < math.pi / 2:
            raise ValueError("theta must lie in (-pi/2, pi/2)")
        for name in ("gamma1", "gamma2"):
            g = getattr(self, name)
            if not (-math.pi < g <= math.pi):
                raise ValueError(f"{name} must lie in (-pi, pi]")
        if self.chi not in (-1, 1):
            raise ValueError("chi must be +1 or -1")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("exponents must be positive")

    def to_params(self, moduli: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> ParamSet:
        """Rebuild raw coefficients; unit moduli give the equivalent equation."""
        d = moduli[0] * cmath.exp(1j * self.theta)
        f = moduli[1] * cmath.exp(1j * self.gamma1)
        g = -moduli[2] * self.chi * cmath.exp(1j * self.gamma2)
        return ParamSet(d.real, d.imag, f.real, f.imag, g.real, g.imag, self.k,
                        self.sigma1, self.sigma2)


class TrigConversion(NamedTuple):
    trig: TrigParamSet
    moduli: tuple[float, float, float]
    exact: bool  # the two equations coincide only when every modulus is 1


def _wrap(angle: float) -> float:
    """Map an angle into (-pi, pi]."""
    w = math.atan2(math.sin(angle), math.cos(angle))
    return math.pi if w == -math.pi else w


def to_trig_form(p: ParamSet) -> TrigConversion:
    if p.b == 0 and p.beta == 0:
        raise ConversionError("focusing coefficient b + i beta vanishes")
    if p.c == 0 and p.gamma == 0:
        raise ConversionError("damping coefficient c + i gamma vanishes")
    theta = cmath.phase(p.diffusion)
    gamma1 = _wrap(cmath.phase(p.focusing))
    # chi e^{i g2} = -(c + i gamma)/|c + i gamma|; fix chi = -1
    gamma2 = _wrap(cmath.phase(p.damping))
    moduli = (abs(p.diffusion), abs(p.focusing), abs(p.damping))
    trig = TrigParamSet(theta, gamma1, gamma2, -1, p.k, p.sigma1, p.sigma2)
    exact = all(m == 1.0 for m in moduli)
    return TrigConversion(trig, moduli, exact)


# ---------------------------------------------------------------------------
# Hypothesis bookkeeping
# ---------------------------------------------------------------------------

_OPS = {
    "<": lambda x, y: x < y,
    "<=": lambda x, y: x <= y,
    ">": lambda x, y: x > y,
    ">=": lambda x, y: x >= y,
    "==": lambda x, y: x == y,
    "!=": lambda x, y: x != y,
}


@dataclass(frozen=True)
class Condition:
    name: str
    lhs: float
    rhs: float
    relation: str
    satisfied: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "satisfied", bool(_OPS[self.relation](self.lhs, self.rhs)))

    @property
    def on_boundary(self) -> bool:
        """True when a non-strict relation holds with equality."""
        return self.relation in ("<=", ">=") and self.lhs == self.rhs

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "relation": self.relation,
            "on_boundary": self.on_boundary,
        }


def _jsonable(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _close(x: float, y: float) -> bool:
    return math.isclose(x, y, rel_tol=PROPORTIONALITY_RTOL, abs_tol=0.0)


@dataclass(frozen=True)
class HypothesisSet:
    name: str
    conditions: tuple[Condition, ...]
    evaluated: bool = True

    @property
    def satisfied(self) -> bool | None:
        if not self.evaluated:
            return None
        return all(c.satisfied for c in self.conditions)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.conditions if not c.satisfied]

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "evaluated": self.evaluated,
            "failed": self.failed,
            "conditions": {c.name: c.to_dict() for c in self.conditions},
        }


class OrbitCase(str, enum.Enum):
    CASE1_C0 = "Case1_c0"
    CASE2_K0 = "Case2_k0"
    NONE = "None"


@dataclass(frozen=True)
class RegimeReport:
    params: ParamSet
    p: float
    dimension: int
    domain_volume: float | None
    global_existence: HypothesisSet
    lp_stable: HypothesisSet
    lp_asymptotically_stable: HypothesisSet
    lp2_bounded_decay: HypothesisSet
    h1_stable_k_negative: HypothesisSet
    h1_stable_k_zero: HypothesisSet
    blow_up_admissible: HypothesisSet
    periodic_orbit_case: OrbitCase

    @property
    def h1_stable(self) -> bool:
        return bool(self.h1_stable_k_negative.satisfied) or bool(self.h1_stable_k_zero.satisfied)

    def branches(self) -> dict[str, HypothesisSet]:
        return {
            "global_existence": self.global_existence,
            "lp_stable": self.lp_stable,
            "lp_asymptotically_stable": self.lp_asymptotically_stable,
            "lp2_bounded_decay": self.lp2_bounded_decay,
            "h1_stable_k_negative": self.h1_stable_k_negative,
            "h1_stable_k_zero": self.h1_stable_k_zero,
            "blow_up_admissible": self.blow_up_admissible,
        }

    def to_dict(self) -> dict:
        out = {
            "spec_version": SCHEMA_VERSION,
            "params": self.params.to_dict(),
            "p": self.p,
            "dimension": self.dimension,
            "domain_volume": self.domain_volume,
            "h1_stable": self.h1_stable,
            "periodic_orbit_case": self.periodic_orbit_case.value,
        }
        out.update({name: br.to_dict() for name, br in self.branches().items()})
        return out


def unit_ball_volume(n: int) -> float:
    if n in UNIT_BALL_VOLUME:
        return float(UNIT_BALL_VOLUME[n])
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def proportional(p: ParamSet) -> Condition:
    """alpha/a = beta/b = gamma/c, dropping the ratio of a vanishing b or c.

    Reported as the largest relative mismatch against the diffusion ratio.
    """
    ref = p.alpha / p.a
    worst = 0.0
    for num, den in ((p.beta, p.b), (p.gamma, p.c)):
        if den == 0:
            continue
        r = num / den
        if not _close(r, ref):
            worst = max(worst, abs(r - ref) / max(abs(r), abs(ref)))
    return Condition("alpha/a=beta/b=gamma/c", worst, PROPORTIONALITY_RTOL, "<=")


def _sobolev_bound(dimension: int) -> float:
    return math.inf if dimension <= 2 else 2.0 / (dimension - 2)


def classify(p: ParamSet, domain_volume: float | None = None, dimension: int = 1,
             lp_exponent: float = 2.0, require_bounded: bool = False) -> RegimeReport:
    """Evaluate every hypothesis set for global existence and stability of zero.

    Parameters
    ----------
    p : ParamSet
    domain_volume : float, optional
        |Omega| for the bounded-domain branches.  Without it those branches are
        reported as not evaluated, unless ``require_bounded`` is set.
    dimension : int
        Space dimension N (any N >= 1).
    lp_exponent : float
        The p of the L^p stability statement.
    """
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    if lp_exponent < 2:
        raise ValueError("L^p stability is stated for p >= 2")
    if domain_volume is None and require_bounded:
        raise MissingInputError("bounded-domain branches need domain_volume")
    if domain_volume is not None and domain_volume <= 0:
        raise ValueError("domain_volume must be positive")

    a, al, b, be, c, ga, k = p.a, p.alpha, p.b, p.beta, p.c, p.gamma, p.k
    s1, s2 = p.sigma1, p.sigma2
    order = Condition("sigma1<sigma2", s1, s2, "<")

    glob = HypothesisSet("global_existence", (
        order,
        Condition("c>0", c, 0.0, ">"),
        Condition("alpha!=0", al, 0.0, "!="),
        Condition("gamma/alpha>=0", ga / al if al != 0 else math.nan, 0.0, ">="),
    ))

    pmax = math.inf if dimension <= 2 else 2 * dimension / (dimension - 2)
    p_rel = "<" if dimension <= 2 else "<="
    ratio_c = Condition("b*s1/s2<=c", b * s1 / s2, c, "<=")
    lp_common = (
        order,
        Condition("p-range", lp_exponent, pmax, p_rel),
        Condition("|alpha|(p-2)/2<=a", abs(al) * (lp_exponent - 2) / 2, a, "<="),
        ratio_c,
    )
    lp = HypothesisSet("lp_stable", lp_common + (
        Condition("k<=0", k, 0.0, "<="),
        Condition("b(s2-s1)/s2<=|k|", b * (s2 - s1) / s2, abs(k), "<="),
    ))
    lp_asym = HypothesisSet("lp_asymptotically_stable", lp_common + (
        Condition("k<0", k, 0.0, "<"),
        Condition("b(s2-s1)/s2<|k|", b * (s2 - s1) / s2, abs(k), "<"),
    ))

    if domain_volume is not None:
        poincare = (domain_volume / unit_ball_volume(dimension)) ** (-2.0 / dimension)
        lp2 = HypothesisSet("lp2_bounded_decay", (
            order,
            Condition("k>0", k, 0.0, ">"),
            ratio_c,
            Condition("b+(s2-s1)/s2+k<a(|O|/w_N)^(-2/N)",
                      max(0.0, b) * (s2 - s1) / s2 + k, a * poincare, "<"),
        ))
    else:
        poincare = math.nan
        lp2 = HypothesisSet("lp2_bounded_decay", (), evaluated=False)

    prop = proportional(p)
    h1_ratio = Condition("b*s1/((s1+2)s2)<=c/(s2+2)", b * s1 / ((s1 + 2) * s2), c / (s2 + 2), "<=")
    h1_neg = HypothesisSet("h1_stable_k_negative", (
        order,
        prop,
        Condition("k<0", k, 0.0, "<"),
        h1_ratio,
        Condition("b(s2-s1)/s2<=|k|/2", b * (s2 - s1) / s2, abs(k) / 2, "<="),
        Condition("b(s1+1)<min(c,|k|)", b * (s1 + 1), min(c, abs(k)), "<"),
    ))
    if domain_volume is not None:
        h1_zero = HypothesisSet("h1_stable_k_zero", (
            order,
            prop,
            Condition("k=0", k, 0.0, "=="),
            h1_ratio,
            Condition("b(s1+1)<min(c,(|O|/w_N)^(-2/N))", b * (s1 + 1), min(c, poincare), "<"),
        ))
    else:
        h1_zero = HypothesisSet("h1_stable_k_zero", (), evaluated=False)

    return RegimeReport(
        params=p, p=lp_exponent, dimension=dimension, domain_volume=domain_volume,
        global_existence=glob, lp_stable=lp, lp_asymptotically_stable=lp_asym,
        lp2_bounded_decay=lp2, h1_stable_k_negative=h1_neg, h1_stable_k_zero=h1_zero,
        blow_up_admissible=_blowup_branch(p), periodic_orbit_case=_orbit_case(p),
    )


def _blowup_branch(p: ParamSet) -> HypothesisSet:
    """Can the equation be rescaled to u_t = e^{i th}[Lap u + |u|^s1 u - nu|u|^s2 u] + k u?

    That needs (b + i beta)/(a + i alpha) positive real and (c + i gamma)/(a + i alpha)
    real; after rescaling, nu carries the sign of the second ratio.
    """
    f = p.focusing / p.diffusion
    g = p.damping / p.diffusion
    scale_f = max(abs(f), 1e-300)
    scale_g = max(abs(g), 1e-300)
    # amplitude rescaling u = f^{-1/s1} v normalizes the focusing term
    if f.real > 0 and g.real != 0:
        try:
            nu = g.real * f.real ** (-p.sigma2 / p.sigma1)
        except OverflowError:
            nu = math.copysign(math.inf, g.real)
    else:
        nu = g.real
    conds = [
        Condition("Im[(b+i beta)/(a+i alpha)]=0", abs(f.imag) / scale_f, PROPORTIONALITY_RTOL, "<="),
        Condition("Re[(b+i beta)/(a+i alpha)]>0", f.real, 0.0, ">"),
        Condition("Im[(c+i gamma)/(a+i alpha)]=0", abs(g.imag) / scale_g, PROPORTIONALITY_RTOL, "<="),
        Condition("k>=0", p.k, 0.0, ">="),
    ]
    if nu > 0:
        conds.append(Condition("nu>0 needs s2<=s1", p.sigma2, p.sigma1, "<="))
    else:
        conds.append(Condition("nu<=0", nu, 0.0, "<="))
    return HypothesisSet("blow_up_admissible", tuple(conds))


def _orbit_case(p: ParamSet) -> OrbitCase:
    if p.c == 0 and p.b * p.k < 0:
        return OrbitCase.CASE1_C0
    if p.k == 0 and p.b * p.c > 0 and p.sigma1 != p.sigma2:
        return OrbitCase.CASE2_K0
    return OrbitCase.NONE


# ---------------------------------------------------------------------------
# Energy criterion for blow-up
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlowupEnergy:
    energy: float
    hypotheses_hold: bool
    gradient_term: float
    focusing_term: float
    damping_term: float


def blowup_energy(u0: Field, theta: float, nu: float, sigma1: float, sigma2: float,
                  k: float = 0.0) -> BlowupEnergy:
    """E(u0) = int |grad u0|^2/2 - |u0|^(s1+2)/(s1+2) + nu |u0|^(s2+2)/(s2+2).

    ``hypotheses_hold`` says whether a negative energy certifies finite-time
    blow-up: k >= 0 and either nu <= 0, or nu > 0 with sigma2 <= sigma1.
    """
    if u0.bc is not BC.DIRICHLET:
        raise HypothesisError("the energy criterion is stated for Dirichlet data")
    if not abs(theta) < math.pi / 2:
        raise HypothesisError("theta must lie in (-pi/2, pi/2)")
    mod = np.abs(u0.values)
    grad = 0.5 * gradient_sq(u0)
    foc = integrate(mod ** (sigma1 + 2), u0.grid) / (sigma1 + 2)
    damp = nu * integrate(mod ** (sigma2 + 2), u0.grid) / (sigma2 + 2)
    ok = k >= 0 and (nu <= 0 or sigma2 <= sigma1)
    return BlowupEnergy(grad - foc + damp, ok, grad, foc, damp)


def rotated_params(theta: float, nu: float, sigma1: float, sigma2: float, k: float = 0.0) -> ParamSet:
    """Coefficients of u_t = e^{i theta}[Lap u + |u|^s1 u - nu |u|^s2 u] + k u."""
    rot = cmath.exp(1j * theta)
    return ParamSet(rot.real, rot.imag, rot.real, rot.imag, nu * rot.real, nu * rot.imag,
                    k, sigma1, sigma2)


# ---------------------------------------------------------------------------
# Spatially homogeneous periodic orbits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicOrbitParams:
    r0: float
    freq: float
    period: float
    case: OrbitCase

    @property
    def degenerate(self) -> bool:
        """Zero frequency: the circle |u| = r0 consists of equilibria."""
        return self.freq == 0.0


def periodic_orbit_params(p: ParamSet) -> PeriodicOrbitParams | None:
    """Radius, angular frequency and period of u(t) = r0 exp(i freq t).

    r0 solves b r0^s1 - c r0^s2 + k = 0 in the two solvable cases
    (c = 0 with bk < 0, or k = 0 with bc > 0); otherwise None.
    """
    case = _orbit_case(p)
    if case is OrbitCase.CASE1_C0:
        r0 = (-p.k / p.b) ** (1.0 / p.sigma1)
    elif case is OrbitCase.CASE2_K0:
        r0 = (p.b / p.c) ** (1.0 / (p.sigma2 - p.sigma1))
    else:
        return None
    freq = p.beta * r0 ** p.sigma1 - p.gamma * r0 ** p.sigma2
    period = math.inf if freq == 0 else 2 * math.pi / abs(freq)
    return PeriodicOrbitParams(r0, freq, period, case)
