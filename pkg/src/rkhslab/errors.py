"""Exception types shared across the package."""


class RkhsLabError(Exception):
    """Base class for all rkhslab errors."""


class GridMismatchError(RkhsLabError):
    """A discrete function was used with a grid it is not aligned to."""


class NonHermitianKernelError(RkhsLabError):
    """Kernel evaluation produced a matrix too far from Hermitian."""

    def __init__(self, defect: float, scale: float):
        self.defect = defect
        self.scale = scale
        super().__init__(
            f"kernel matrix is not Hermitian: defect {defect:.3e} "
            f"exceeds tolerance relative to max entry {scale:.3e}"
        )


class RangeViolationError(RkhsLabError):
    """Right-hand side has a significant component outside the operator range."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"range violation: relative residual {residual:.3e} "
            f"exceeds tolerance {tolerance:.3e}"
        )


class NotInjectiveError(RkhsLabError):
    """Operation requires an injective transform but rank is deficient."""

    def __init__(self, numerical_rank: int, expected: int):
        self.numerical_rank = numerical_rank
        self.expected = expected
        super().__init__(
            f"transform is not injective: numerical rank {numerical_rank} < {expected}"
        )


class ConfigError(RkhsLabError):
    """Run configuration is missing, malformed, or inconsistent."""
