"""Class-weighted cross-entropy over softmax outputs."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError

__all__ = ["weighted_ce"]

PROB_FLOOR = 1e-12  # single numerical guard against log(0)


def weighted_ce(probs: np.ndarray, labels: np.ndarray, class_weights: np.ndarray):
    """Mean of w_y * (-ln p_y) over the batch.

    Returns (loss, dloss_dlogits) where the gradient is taken with
    respect to the logits feeding the softmax:
    w_y * (p - onehot(y)) / batch.
    """
    labels = np.asarray(labels)
    class_weights = np.asarray(class_weights, dtype=np.float64)
    n, k = probs.shape
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} does not match batch {n}")
    if class_weights.shape != (k,):
        raise ShapeError(f"need {k} class weights, got shape {class_weights.shape}")
    if (class_weights <= 0).any():
        raise ShapeError("class weights must all be > 0")
    if labels.min() < 0 or labels.max() >= k:
        raise ShapeError(f"labels must be in 0..{k - 1}")
    rows = np.arange(n)
    w = class_weights[labels]
    p_true = np.maximum(probs[rows, labels].astype(np.float64), PROB_FLOOR)
    loss = float(np.mean(w * -np.log(p_true)))
    dlogits = probs.astype(np.float64).copy()
    dlogits[rows, labels] -= 1.0
    dlogits *= w[:, None] / n
    return loss, dlogits.astype(probs.dtype)
