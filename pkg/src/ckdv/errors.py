"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An invalid coupling, pencil weight, grid or integrator setting."""


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


class SingularConstraintError(ParameterError):
    """The constraint bracket matrix is singular beyond its known kernel."""


class BlowUpError(RuntimeError):
    """Raised when a time integration leaves the finite, bounded regime.

    Carries the step index, time and max-norm at detection so callers can
    report a diagnostic instead of writing non-finite data.
    """

    def __init__(self, message, step=None, time=None, max_abs=None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.max_abs = max_abs
