"""Exception types raised across the package."""


class FVMError(Exception):
    """Base class for all package errors."""


class InvalidLetterError(FVMError, ValueError):
    pass


class CFLViolationError(FVMError, ValueError):
    """Explicit step size exceeds the stability bound under ``cfl_policy='enforce'``."""

    def __init__(self, h, bound, d, m):
        self.h = h
        self.bound = bound
        super().__init__(
            f"explicit step h={h!r} violates CFL bound h <= 2/(d^2 (d+2)^m) = {bound!r} "
            f"for d={d}, m={m}"
        )


class ConvergenceError(FVMError, RuntimeError):
    """Conjugate gradient hit its iteration cap."""

    def __init__(self, message, residual=None, iterations=None, step=None):
        self.residual = residual
        self.iterations = iterations
        self.step = step
        self.series = None
        super().__init__(message)


class NonFiniteError(FVMError, FloatingPointError):
    def __init__(self, message, step=None):
        self.step = step
        self.series = None
        super().__init__(message)


class SizeBudgetError(FVMError, ValueError):
    """Dense computation requested above the allowed matrix size."""


class ConfigError(FVMError, ValueError):
    pass
