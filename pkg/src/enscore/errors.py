"""Exception types raised by the scoring toolkit."""


class EnscoreError(Exception):
    """Base class for all toolkit errors."""


class MissingArrayError(EnscoreError):
    """A required array entry is absent from a cube or prediction archive."""

    def __init__(self, key: str):
        super().__init__(f"missing required array entry: {key!r}")
        self.key = key


class ShapeMismatchError(EnscoreError):
    """An array has a shape other than the one the container contract fixes."""


class InvalidValueError(EnscoreError):
    """Array values violate the container contract (non-finite, out of
    [0, 1], or mask entries outside {0, 1})."""


class GeometryMismatchError(EnscoreError):
    """Cube or prediction frame counts do not match the requested track."""


class MissingPredictionError(EnscoreError):
    """A test cube has no prediction archive; dataset evaluation aborts."""

    def __init__(self, cube_id: str):
        super().__init__(f"no prediction archive for cube {cube_id!r}")
        self.cube_id = cube_id


class SplitInfeasibleError(EnscoreError):
    """Stratum quotas cannot be met even at the loosest quality threshold."""

    def __init__(self, unfilled: dict):
        detail = ", ".join(f"{k}: short by {v}" for k, v in sorted(unfilled.items()))
        super().__init__(f"quotas infeasible after all thresholds ({detail})")
        self.unfilled = unfilled
