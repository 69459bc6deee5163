"""SGD training loop with a step learning-rate schedule and layer freezing.

Everything is driven by one seeded generator (shuffling and dropout), so
a (seed, config, data) triple fully determines the resulting parameters
and log. Training is single-threaded; gradients accumulate in a fixed
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DivergedError, ShapeError
from .loss import weighted_ce
from .model import ModelParams, ModelSpec, forward, backward

__all__ = ["TrainConfig", "EpochStats", "TrainLog", "sgd_step", "train"]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    learning_rate: float = 0.001
    lr_drop_epoch: int | None = None  # lr divides by 10 after this epoch
    batch_size: int = 128
    dropout_keep: float | None = None  # None keeps each layer's own value
    seed: int = 0
    trainable_layers: tuple[str, ...] = ()  # empty means all layers train

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")

    def lr_at(self, epoch: int) -> float:
        """Learning rate for a 1-based epoch index."""
        if self.lr_drop_epoch is not None and epoch > self.lr_drop_epoch:
            return self.learning_rate / 10.0
        return self.learning_rate


@dataclass
class EpochStats:
    epoch: int
    lr: float
    train_loss: float
    val_accuracy: float | None = None


@dataclass
class TrainLog:
    epochs: list[EpochStats] = field(default_factory=list)
    steps: int = 0

    def csv_rows(self):
        yield "epoch,train_loss,val_accuracy,lr"
        for e in self.epochs:
            val = "" if e.val_accuracy is None else repr(e.val_accuracy)
            yield f"{e.epoch},{e.train_loss!r},{val},{e.lr!r}"

    def epochs_to_loss(self, threshold: float) -> int | None:
        """First 1-based epoch whose mean train loss is <= threshold."""
        for e in self.epochs:
            if e.train_loss <= threshold:
                return e.epoch
        return None

    def final_val_accuracy(self) -> float | None:
        for e in reversed(self.epochs):
            if e.val_accuracy is not None:
                return e.val_accuracy
        return None


def sgd_step(params: ModelParams, grads: dict, lr: float) -> ModelParams:
    """In-place p <- p - lr * g on trainable layers; returns params."""
    for name, (dw, db) in grads.items():
        if params.trainable.get(name, True):
            params.weights[name] -= (lr * dw).astype(params.dtype)
            params.biases[name] -= (lr * db).astype(params.dtype)
    return params


def _eval_accuracy(spec, params, x, y, batch_size):
    hits = 0
    for start in range(0, len(x), batch_size):
        probs, _ = forward(spec, params, x[start : start + batch_size], mode="eval")
        hits += int((probs.argmax(axis=1) == y[start : start + batch_size]).sum())
    return hits / len(x)


def train(
    spec: ModelSpec,
    params: ModelParams,
    x: np.ndarray,
    y: np.ndarray,
    cfg: TrainConfig,
    class_weights: np.ndarray | None = None,
    val: tuple[np.ndarray, np.ndarray] | None = None,
):
    """Train in place; returns (params, TrainLog).

    Each epoch reshuffles with the seeded generator and walks
    ceil(n / batch) minibatches. ``val`` is an optional (x, y) pair
    scored in eval mode after every epoch. A non-finite loss aborts.
    """
    if len(x) == 0:
        raise ShapeError("training set is empty")
    if len(x) != len(y):
        raise ShapeError(f"{len(x)} inputs vs {len(y)} labels")
    eff_spec = spec.with_dropout_keep(cfg.dropout_keep)
    eff_spec.validate()
    params.set_trainable(cfg.trainable_layers)
    k = eff_spec.num_classes()
    if class_weights is None:
        class_weights = np.ones(k)
    rng = np.random.default_rng(cfg.seed)
    y = np.asarray(y, dtype=np.int64)
    log = TrainLog()
    n = len(x)
    for epoch in range(1, cfg.epochs + 1):
        lr = cfg.lr_at(epoch)
        order = rng.permutation(n)
        loss_sum = 0.0
        batches = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            probs, cache = forward(eff_spec, params, x[idx], mode="train", rng=rng)
            loss, dlogits = weighted_ce(probs, y[idx], class_weights)
            log.steps += 1
            if not math.isfinite(loss):
                raise DivergedError(
                    f"training diverged: loss {loss} at step {log.steps} "
                    f"(epoch {epoch})",
                    step=log.steps,
                )
            grads = backward(eff_spec, params, cache, dlogits)
            sgd_step(params, grads, lr)
            loss_sum += loss
            batches += 1
        stats = EpochStats(epoch=epoch, lr=lr, train_loss=loss_sum / batches)
        if val is not None:
            stats.val_accuracy = _eval_accuracy(eff_spec, params, val[0], val[1],
                                                cfg.batch_size)
        log.epochs.append(stats)
    return params, log
