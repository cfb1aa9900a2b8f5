"""Exception types raised across the package."""


class ParameterDomainError(ValueError):
    """A family or model parameter lies outside its validity domain."""


class NonConvergenceError(ArithmeticError):
    """A truncated series hit its support cap before the tail criterion held."""

    def __init__(self, message, partial_abs_mass=None):
        super().__init__(message)
        self.partial_abs_mass = partial_abs_mass


class GridTooSmallError(ValueError):
    """Fourier inversion grid cannot hold the measure without aliasing."""


class ResourceLimitError(RuntimeError):
    """An exact computation would exceed its state or enumeration budget."""


class DivergenceError(ArithmeticError):
    """A metric sum diverges (e.g. Wasserstein norm of a nonzero-mass measure)."""
