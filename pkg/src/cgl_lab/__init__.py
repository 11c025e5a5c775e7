"""Numerical laboratory for the two-power complex Ginzburg-Landau equation

    u_t = (a + i alpha) Lap u + (b + i beta)|u|^s1 u - (c + i gamma)|u|^s2 u + k u.
"""

from .discretization import BC, Field, Grid, eigenbasis, inner, integrate, norm_h1, norm_l2
from .errors import (
    AliasingError,
    BlowUp,
    CglLabError,
    ContradictionError,
    HypothesisError,
    NonConvergenceError,
    NumericalFailure,
)
from .evolution import Outcome, SolverConfig, run, step
from .params import ParamSet, TrigParamSet, classify, to_trig_form

__version__ = "0.1.0"

__all__ = [
    "BC",
    "Field",
    "Grid",
    "eigenbasis",
    "inner",
    "integrate",
    "norm_h1",
    "norm_l2",
    "AliasingError",
    "BlowUp",
    "CglLabError",
    "ContradictionError",
    "HypothesisError",
    "NonConvergenceError",
    "NumericalFailure",
    "Outcome",
    "SolverConfig",
    "run",
    "step",
    "ParamSet",
    "TrigParamSet",
    "classify",
    "to_trig_form",
]
