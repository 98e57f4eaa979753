class MatmeanError(Exception):
    pass


class DimensionError(MatmeanError, ValueError):
    pass


class DomainError(MatmeanError, ValueError):
    """Input outside the domain of the operation (not Hermitian, not positive definite, ...)."""


class RangeError(MatmeanError, ArithmeticError):
    """Result would overflow double precision."""


class ConvergenceError(MatmeanError, ArithmeticError):
    pass
