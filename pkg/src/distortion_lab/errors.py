"""Exception and warning types shared across the package."""


class PoleError(ValueError):
    """A Gamma-family function was evaluated at one of its poles."""


class ConvergenceError(ArithmeticError):
    """A series or quadrature failed to reach its tolerance."""


class DegenerateEigenvaluesError(ValueError):
    """Correlation eigenvalues are too close for the Vandermonde denominator."""


class ConditioningWarning(RuntimeWarning):
    """Result is computed but may have lost significant digits."""
