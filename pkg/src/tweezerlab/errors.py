"""Exception types shared across the package."""


class TweezerlabError(Exception):
    """Base class for all package-specific errors."""


class BoundsViolationError(TweezerlabError):
    """A tweezer parameter falls outside the configured control bounds.

    Carries the name of the offending field in ``field``.
    """

    def __init__(self, field, value, lo, hi):
        self.field = field
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(f"{field}={value} outside allowed range [{lo}, {hi}]")


class GridMismatchError(TweezerlabError):
    """Two objects that must share a spatial grid do not."""


class CapacityError(TweezerlabError):
    """A request exceeds what the discretization can support (e.g. too many eigenstates)."""


class InfeasiblePathError(TweezerlabError):
    """Requested control path cannot satisfy the kinematic constraints."""


class NumericalFailureError(TweezerlabError):
    """Propagation or optimization produced a non-finite quantity.

    ``iteration`` identifies where the failure occurred when known.
    """

    def __init__(self, message, iteration=None):
        self.iteration = iteration
        super().__init__(message if iteration is None else f"{message} (iteration {iteration})")


class UndefinedHilbertVelocityError(TweezerlabError):
    """The orthogonal target component is undefined because F = 1 at some sample."""

    def __init__(self, sample_index):
        self.sample_index = sample_index
        super().__init__(
            f"direct Hilbert velocity undefined: fidelity is 1 at sample {sample_index}"
        )
