"""Confusion matrices, accuracy, and inverse-frequency class weights."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ShapeError

__all__ = [
    "confusion_matrix",
    "accuracy_from_confusion",
    "class_weights",
    "class_weights_from_counts",
]


def confusion_matrix(truths, preds, num_classes: int) -> np.ndarray:
    """K x K counts; rows are true classes, columns predictions."""
    truths = np.asarray(truths, dtype=np.int64)
    preds = np.asarray(preds, dtype=np.int64)
    if truths.shape != preds.shape:
        raise ShapeError(f"{truths.shape} truths vs {preds.shape} predictions")
    mat = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(mat, (truths, preds), 1)
    return mat


def accuracy_from_confusion(mat: np.ndarray) -> float:
    total = int(mat.sum())
    if total == 0:
        raise ShapeError("confusion matrix is empty")
    return float(np.trace(mat)) / total


def class_weights_from_counts(counts) -> np.ndarray:
    """w_c = N / (K * n_c): inverse frequency normalized to mean 1."""
    counts = np.asarray(counts, dtype=np.int64)
    if (counts <= 0).any():
        empty = np.flatnonzero(counts <= 0).tolist()
        raise ConfigError(f"classes {empty} have no samples; cannot weight the loss")
    total = counts.sum()
    return total / (len(counts) * counts.astype(np.float64))


def class_weights(labels, num_classes: int) -> np.ndarray:
    """Weights from a training split's labels; empty classes are an error."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=num_classes)
    return class_weights_from_counts(counts)
