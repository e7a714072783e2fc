"""
Exception hierarchy shared by the solver, detector, oracle and CLI
"""


class PersuasionError(Exception):
    """Base class for every error raised by this package"""


class ParameterDomainError(PersuasionError, ValueError):
    """A game or run parameter lies outside its domain"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnsupportedPolicyError(PersuasionError, ValueError):
    """The policy is outside the reduced class the detector can solve (rho_g < 1 somewhere)"""


class ScaleError(PersuasionError):
    """Horizon too large for an exhaustive computation"""


class DegenerateCaseError(PersuasionError, ArithmeticError):
    """A closed form is undefined for these parameters (c = 0 or P(theta <= n_p) = 0)"""


class InvariantViolation(PersuasionError):
    """A self-check between two independent computations failed"""
