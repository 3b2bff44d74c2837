"""Exception hierarchy shared by all microlax modules."""


class MicrolaxError(Exception):
    """Base class for every error raised by microlax."""


class NotSymmetric(MicrolaxError, ValueError):
    """Input matrix is not symmetric within tolerance."""


class DimMismatch(MicrolaxError, ValueError):
    """Operand dimensions are inconsistent."""


class SingularModulus(MicrolaxError, ArithmeticError):
    """Linear solve with a numerically singular matrix."""


class NonSPDModulus(MicrolaxError, ValueError):
    """Modulus is not symmetric positive definite."""


class SingularAlpha(MicrolaxError, ArithmeticError):
    """The translated mixture modulus cannot be inverted."""


class NonCommuting(MicrolaxError, ValueError):
    """Phase moduli do not commute with the trace-removal operator."""


class DegenerateLaminate(MicrolaxError, ArithmeticError):
    """Sensitivity of the translation parameter has a zero denominator."""


class RootNotBracketed(MicrolaxError, ArithmeticError):
    """Bisection interval does not contain a sign change."""


class SolverStall(MicrolaxError, RuntimeError):
    """Iterative linear solver hit its iteration cap."""


class NewtonDivergence(MicrolaxError, RuntimeError):
    """Nonlinear elastic iteration failed to converge."""


class StepFailure(MicrolaxError, RuntimeError):
    """Time step rejected after the maximum number of halvings."""
