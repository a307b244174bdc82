"""Exception types shared across the package."""


class XbvError(Exception):
    """Base class for package-specific failures."""


class GridError(XbvError, ValueError):
    """Bad grid construction (empty grid, pitch too coarse, resolution too low)."""


class SeparationError(XbvError, ValueError):
    """A deformation map violates the pairwise separation condition.

    Carries the violating pair so the caller can see where the map folds.
    """

    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class DivergenceError(XbvError, RuntimeError):
    """A fixed-point iteration stopped contracting."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class NotDiffeomorphismError(XbvError, ValueError):
    """A candidate coordinate change has a non-positive Jacobian somewhere."""


class ExperimentError(XbvError, RuntimeError):
    """An end-to-end experiment aborted; `stage` tags the failing step."""

    def __init__(self, stage, msg):
        super().__init__(f"[{stage}] {msg}")
        self.stage = stage
