"""Single-task and three-head multitask classifiers over pluggable encoders."""

from .heads import ClassifierHead, HeadConfig, forward_single, softmax
from .losses import LossWeights, MultitaskPrediction, cross_entropy, mtl_loss
from .optim import AdamW
from .store import TrainedModel
from .train import TrainingConfig, TrainResult, train, write_manifest

__all__ = [
    "AdamW",
    "ClassifierHead",
    "HeadConfig",
    "LossWeights",
    "MultitaskPrediction",
    "TrainedModel",
    "TrainingConfig",
    "TrainResult",
    "cross_entropy",
    "forward_single",
    "mtl_loss",
    "softmax",
    "train",
    "write_manifest",
]
