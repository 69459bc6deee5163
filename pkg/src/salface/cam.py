"""Class Activation Maps.

A trained classifier is truncated after its last conv (and the relu that
follows it), the remaining head is replaced with global average pooling
plus a single fc and softmax, and the new head is trained as a read-out
while the conv trunk stays frozen. Projecting a class's fc weights onto
the last conv feature maps then gives a per-pixel evidence heatmap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BuildError, ShapeError
from .imagekit import Image, resize_bilinear
from .saliency import normalize
from .nnet.model import (
    ModelParams,
    ModelSpec,
    build,
    fc,
    forward,
    gap,
    softmax_layer,
)
from .nnet.train import TrainConfig, train

__all__ = ["CamModel", "build_cam_head", "train_cam_head", "compute_cam", "compute_cam_raw"]

HEAD_FC = "cam_fc"


@dataclass
class CamModel:
    """Conv trunk + GAP + fc + softmax; ``trunk_layers`` counts trunk entries."""

    spec: ModelSpec
    params: ModelParams
    trunk_layers: int

    @property
    def feature_channels(self) -> int:
        return self.params.weights[HEAD_FC].shape[1]

    def head_weights(self) -> np.ndarray:
        return self.params.weights[HEAD_FC]


def _trunk_length(spec: ModelSpec) -> int:
    last_conv = None
    for i, layer in enumerate(spec.layers):
        if layer.kind == "conv":
            last_conv = i
    if last_conv is None:
        raise BuildError("cannot build a CAM head: spec has no conv layer")
    end = last_conv + 1
    if end < len(spec.layers) and spec.layers[end].kind == "relu":
        end += 1
    return end


def build_cam_head(spec: ModelSpec, params: ModelParams, num_classes: int,
                   seed: int) -> CamModel:
    """Copy the conv trunk (frozen) and attach a fresh GAP + fc + softmax head.

    The head starts from seeded He-uniform init and should be fitted with
    :func:`train_cam_head` before heatmaps mean anything.
    """
    end = _trunk_length(spec)
    trunk = spec.layers[:end]
    head_spec = ModelSpec(
        spec.in_channels,
        spec.in_height,
        spec.in_width,
        trunk + (gap("cam_gap"), fc(HEAD_FC, num_classes), softmax_layer("cam_prob")),
    )
    head_params = build(head_spec, seed=seed, dtype=params.dtype)
    for layer in trunk:
        if layer.name in params.weights:
            head_params.weights[layer.name] = params.weights[layer.name].copy()
            head_params.biases[layer.name] = params.biases[layer.name].copy()
    head_params.set_trainable([HEAD_FC])
    return CamModel(head_spec, head_params, trunk_layers=end)


def train_cam_head(cam: CamModel, x: np.ndarray, y: np.ndarray, cfg: TrainConfig,
                   class_weights=None, val=None):
    """Fit the read-out head; the trunk never moves."""
    cfg_frozen = TrainConfig(
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        lr_drop_epoch=cfg.lr_drop_epoch,
        batch_size=cfg.batch_size,
        dropout_keep=cfg.dropout_keep,
        seed=cfg.seed,
        trainable_layers=(HEAD_FC,),
    )
    _, log = train(cam.spec, cam.params, x, y, cfg_frozen, class_weights, val)
    return log


def _features(cam: CamModel, img: Image) -> np.ndarray:
    batch = img.data[None, :, :, :]
    trunk_spec = cam.spec.truncated(cam.trunk_layers)
    feats, _ = forward(trunk_spec, cam.params, batch, mode="eval")
    return feats[0]


def compute_cam_raw(cam: CamModel, img: Image, class_idx: int) -> np.ndarray:
    """Weighted sum of last-conv feature maps at feature resolution."""
    if not 0 <= class_idx < cam.head_weights().shape[0]:
        raise ShapeError(f"class index {class_idx} out of range")
    feats = _features(cam, img)
    w = cam.head_weights()[class_idx].astype(np.float64)
    return np.tensordot(w, feats.astype(np.float64), axes=([0], [0]))


def compute_cam(cam: CamModel, img: Image, class_idx: int) -> np.ndarray:
    """Class evidence heatmap at image resolution, min-max normalized.

    Negative raw evidence is kept (no relu clamp) and lands near 0 after
    normalization, so suppressive regions stay visible.
    """
    raw = compute_cam_raw(cam, img, class_idx)
    heat = normalize(raw)
    heat_img = resize_bilinear(Image.from_array(heat), img.width, img.height)
    return heat_img.plane(0)
