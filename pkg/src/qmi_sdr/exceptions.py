"""Exception types shared across the package."""


class QmiSdrError(Exception):
    """Base class for all errors raised by this package."""


class NonFiniteInput(QmiSdrError):
    """Input array contains NaN or Inf entries."""


class ZeroVarianceColumn(QmiSdrError):
    """A data column is constant and cannot be standardized."""

    def __init__(self, index, block="x"):
        self.index = index
        self.block = block
        super().__init__(f"column {index} of {block} has zero variance")


class DimensionMismatch(QmiSdrError):
    """Array shapes are inconsistent with each other."""


class RankDeficient(QmiSdrError):
    """Matrix does not have full row rank."""


class TooManyCenters(QmiSdrError):
    """Requested more basis centers than available samples."""


class SolveFailure(QmiSdrError):
    """Regularized linear system is numerically singular."""


class UnsupportedDimension(QmiSdrError):
    """Operation is only defined for a restricted target dimension."""


class EmptyGrid(QmiSdrError):
    """Cross-validation candidate grid is empty."""


class FoldTooSmall(QmiSdrError):
    """A cross-validation fold has fewer than two samples."""


class LengthMismatch(QmiSdrError):
    """Paired vectors have different lengths."""


class AllRestartsFailed(QmiSdrError):
    """Every optimizer restart aborted with a numerical failure."""


class ConfigError(QmiSdrError):
    """Invalid or unknown configuration value."""
