"""hatefuse: multitask text classification with voting-ensemble fusion.

Config-driven toolkit that fine-tunes pluggable text encoders with
single-task or three-head multitask classification heads, fuses model
probability outputs via soft / hard / weighted voting, and evaluates with
micro-F1 and weighted micro-F1.
"""

__version__ = "0.1.0"

from .data import DatasetSplit, Sample, label_distribution, load_split, preprocess
from .ensemble import (
    EnsembleSpec,
    PredictionMatrix,
    argmax_labels,
    hard_vote,
    soft_vote,
    weighted_vote,
)
from .errors import (
    AlignmentError,
    ConfigurationError,
    FingerprintError,
    HatefuseError,
    TrainingDivergedError,
    ValidationError,
)
from .evaluation import confusion_matrix, micro_f1, weighted_micro_f1
from .model import (
    HeadConfig,
    LossWeights,
    TrainedModel,
    TrainingConfig,
    mtl_loss,
    train,
)
from .schema import DEFAULT_SCHEMAS, LabelSchema

__all__ = [
    "AlignmentError",
    "ConfigurationError",
    "DatasetSplit",
    "DEFAULT_SCHEMAS",
    "EnsembleSpec",
    "FingerprintError",
    "HatefuseError",
    "HeadConfig",
    "LabelSchema",
    "LossWeights",
    "PredictionMatrix",
    "Sample",
    "TrainedModel",
    "TrainingConfig",
    "TrainingDivergedError",
    "ValidationError",
    "argmax_labels",
    "confusion_matrix",
    "hard_vote",
    "label_distribution",
    "load_split",
    "micro_f1",
    "mtl_loss",
    "preprocess",
    "soft_vote",
    "train",
    "weighted_micro_f1",
    "weighted_vote",
]
