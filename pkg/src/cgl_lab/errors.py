"""Exception types shared across the package."""


class CglLabError(Exception):
    """Base class for all package errors."""


class HypothesisError(CglLabError, ValueError):
    """A mathematical hypothesis required by the operation is violated."""


class ConversionError(CglLabError, ValueError):
    """Coefficients cannot be brought to trigonometric form."""


class MissingInputError(CglLabError, ValueError):
    """An optional input is required by the requested branch."""


class AliasingError(CglLabError, ValueError):
    """Requested eigenmodes are not resolved by the grid."""


class GridMismatchError(CglLabError, ValueError):
    """Fields live on different grids or boundary conditions."""


class NumericalFailure(CglLabError, ArithmeticError):
    """Non-finite values or failed accuracy checks."""


class StepSizeError(NumericalFailure):
    """Step-halving consistency check exceeded its tolerance."""


class NonConvergenceError(CglLabError, RuntimeError):
    """An iterative solver did not converge."""


class NoContractionError(NonConvergenceError):
    """Fixed-point map is not contracting at the requested amplitude."""


class ResolventError(CglLabError, ValueError):
    """Spectral parameter lies outside the admissible resolvent disk."""


class DegenerateOrbitError(CglLabError, ValueError):
    """Periodic orbit has zero frequency (a circle of equilibria)."""


class ContradictionError(CglLabError, RuntimeError):
    """Numerical behaviour contradicts the branch the parameters claim."""


class BlowUp(CglLabError):
    """Sup-norm exceeded the blow-up threshold during a step."""

    def __init__(self, sup_norm: float, message: str = ""):
        self.sup_norm = sup_norm
        super().__init__(message or f"sup-norm {sup_norm:.3e} exceeded blow-up threshold")
