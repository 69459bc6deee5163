"""From-scratch dense-tensor neural network: layers, loss, SGD, checkpoints."""

from .checkpoint import load_checkpoint, save_checkpoint
from .loss import weighted_ce
from .model import (
    LayerSpec,
    ModelParams,
    ModelSpec,
    backward,
    build,
    forward,
    softmax,
)
from .train import EpochStats, TrainConfig, TrainLog, sgd_step, train
from . import ops, presets

__all__ = [
    "LayerSpec",
    "ModelSpec",
    "ModelParams",
    "build",
    "forward",
    "backward",
    "softmax",
    "weighted_ce",
    "TrainConfig",
    "TrainLog",
    "EpochStats",
    "sgd_step",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "ops",
    "presets",
]
