"""Exception types shared across the toolkit.

Plain I/O failures are reported as the builtin OSError; everything the
toolkit itself can diagnose gets a named class below so callers (and the
CLI) can react per condition.
"""


class RobologError(Exception):
    """Base class for all toolkit errors."""


# --- planning ---

class OutOfBounds(RobologError):
    """A cell index lies outside the grid."""


class OccupiedEndpoint(RobologError):
    """Start or goal cell is occupied."""


class NoPath(RobologError):
    """No free path connects start and goal."""


class GridFormatError(RobologError):
    """Grid map text could not be parsed."""


# --- simulation ---

class StepCapExceeded(RobologError):
    """Simulation did not finish within the hard step cap."""


class DeadlockDetected(RobologError):
    """Both robots stationary for too many consecutive steps."""


class NonFinite(RobologError):
    """An input or computed value is NaN or infinite."""


# --- anomaly injection ---

class EmptyTrajectory(RobologError):
    """Operation requires at least one record."""


class RateInfeasible(RobologError):
    """Requested anomaly coverage cannot be placed without overlap."""


# --- dataset ---

class MalformedHeader(RobologError):
    """Log file header does not match the expected schema."""


class MalformedLine(RobologError):
    """A log record line is malformed; carries line and column info."""

    def __init__(self, message, line, column=None):
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


class NonUniformTimestamps(RobologError):
    """Timestamps do not lie on a uniform i*dt grid."""


class EmptyInput(RobologError):
    """No records were supplied."""


class SingleClassInput(RobologError):
    """Both labels must be present."""


# --- models ---

class DimensionMismatch(RobologError):
    """Feature vector length does not match the model."""


class DivergenceDetected(RobologError):
    """Training loss became non-finite."""


class UntrainedModel(RobologError):
    """Model is missing state required for this operation."""


class CheckpointError(RobologError):
    """Model checkpoint file could not be parsed."""


# --- evaluation ---

class LengthMismatch(RobologError):
    """Paired sequences have different lengths."""


class MalformedCurve(RobologError):
    """ROC point list violates curve invariants."""


# --- configuration ---

class ConfigError(RobologError):
    """Experiment configuration is invalid; message names the field."""
