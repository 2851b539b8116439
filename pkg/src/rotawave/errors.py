"""Exception types raised across the package."""


class RotawaveError(Exception):
    """Base class for all package errors."""


class ValidationError(RotawaveError, ValueError):
    """Bad user input: shapes, names, parameters."""


class NumericalError(RotawaveError, ArithmeticError):
    """A numerical procedure failed (pivots, convergence, singular systems)."""


class PivotFailure(NumericalError):
    def __init__(self, step, detail=""):
        self.step = step
        super().__init__(f"pivot failure at reduction step {step}" + (f": {detail}" if detail else ""))


class UnsupportedZeroPattern(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, message, best_residual=float("inf")):
        self.best_residual = best_residual
        super().__init__(f"{message} (best residual {best_residual:.3e})")


class PreconditionFailure(ValidationError):
    pass


class EdgeMatricesUnavailable(ValidationError):
    pass


class NonInvertibleEdge(ValidationError):
    pass


class BadLevelCount(ValidationError):
    pass


class BadBlockAlignment(ValidationError):
    pass


class SingularConstraintSystem(NumericalError):
    pass


class InfeasibleSpec(ValidationError):
    pass


class SignalTooShort(ValidationError):
    pass


class BadDepth(ValidationError):
    pass


class MisalignedBells(ValidationError):
    pass


class BellTooWide(ValidationError):
    pass


class InvalidCover(ValidationError):
    pass


class EmptyClass(ValidationError):
    pass


class EmptyTestSet(ValidationError):
    pass


class DegenerateFeatures(ValidationError):
    pass


class CountMismatch(NumericalError):
    def __init__(self, cells):
        self.cells = list(cells)
        super().__init__("operation counts deviate from formulas: " + "; ".join(map(str, self.cells)))
