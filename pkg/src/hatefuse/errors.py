"""Exception hierarchy shared across the toolkit.

Validation and configuration problems map to CLI exit code 1, everything
else that escapes a command maps to exit code 2.
"""


class HatefuseError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(HatefuseError):
    """Bad data, labels, weights, or arguments."""


class ConfigurationError(HatefuseError):
    """Invalid or unresolvable configuration (encoder family, backbone, ...)."""


class AlignmentError(ValidationError):
    """Prediction matrices disagree on task, label order, or sample order."""


class FingerprintError(ValidationError):
    """Artifacts produced under different config/data lineages were mixed."""


class TrainingDivergedError(HatefuseError):
    """Training produced a non-finite loss."""
