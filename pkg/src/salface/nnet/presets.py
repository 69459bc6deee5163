"""Shipped model topologies.

``alexnet`` is the classic eight-learned-layer stack (conv1..conv5 plus
fc6/fc7/fc8) at 224x224x3, structure only and without padding or local
response normalization, so the spatial sizes run slightly smaller than
the original. ``alexlite`` is the desk-scale stack used by the synthetic
experiments. ``alexlite_mini`` is a tiny everything-exercising net for
gradient checks.
"""

from __future__ import annotations

from ..errors import ConfigError
from .model import (
    ModelSpec,
    conv,
    dropout,
    fc,
    flatten,
    gap,
    maxpool,
    relu,
    softmax_layer,
)

__all__ = ["alexnet", "alexlite", "alexlite_mini", "gap_mini", "preset"]


def alexnet(num_classes: int, in_size: int = 224, in_channels: int = 3) -> ModelSpec:
    layers = (
        conv("conv1", 96, 11, 4),
        relu("relu1"),
        maxpool("pool1", 3, 2),
        conv("conv2", 256, 5, 1),
        relu("relu2"),
        maxpool("pool2", 3, 2),
        conv("conv3", 384, 3, 1),
        relu("relu3"),
        conv("conv4", 384, 3, 1),
        relu("relu4"),
        conv("conv5", 256, 3, 1),
        relu("relu5"),
        maxpool("pool5", 3, 2),
        flatten("flat"),
        fc("fc6", 4096),
        relu("relu6"),
        dropout("drop6", 0.5),
        fc("fc7", 4096),
        relu("relu7"),
        dropout("drop7", 0.5),
        fc("fc8", num_classes),
        softmax_layer("prob"),
    )
    return ModelSpec(in_channels, in_size, in_size, layers)


def alexlite(num_classes: int, in_size: int = 64, in_channels: int = 3) -> ModelSpec:
    """Three 3x3 conv blocks (8/16/32 channels), fc 128, dropout, fc K."""
    layers = (
        conv("conv1", 8, 3, 1),
        relu("relu1"),
        maxpool("pool1", 2),
        conv("conv2", 16, 3, 1),
        relu("relu2"),
        maxpool("pool2", 2),
        conv("conv3", 32, 3, 1),
        relu("relu3"),
        maxpool("pool3", 2),
        flatten("flat"),
        fc("fc6", 128),
        relu("relu6"),
        dropout("drop6", 0.5),
        fc("fc8", num_classes),
        softmax_layer("prob"),
    )
    return ModelSpec(in_channels, in_size, in_size, layers)


def alexlite_mini(num_classes: int = 3, in_channels: int = 1) -> ModelSpec:
    """8x8 input; hits conv, relu, maxpool, flatten, fc, dropout, softmax."""
    layers = (
        conv("conv1", 4, 3, 1),
        relu("relu1"),
        maxpool("pool1", 2),
        conv("conv2", 6, 3, 1),
        relu("relu2"),
        flatten("flat"),
        fc("fc6", 8),
        relu("relu6"),
        dropout("drop6", 0.8),
        fc("fc8", num_classes),
        softmax_layer("prob"),
    )
    return ModelSpec(in_channels, 8, 8, layers)


def gap_mini(num_classes: int = 3, in_channels: int = 1) -> ModelSpec:
    """8x8 input with a global-average-pooling head (covers the gap kind)."""
    layers = (
        conv("conv1", 4, 3, 1),
        relu("relu1"),
        gap("gap1"),
        fc("fc8", num_classes),
        softmax_layer("prob"),
    )
    return ModelSpec(in_channels, 8, 8, layers)


_PRESETS = {
    "alexnet": alexnet,
    "alexlite": alexlite,
    "alexlite_mini": alexlite_mini,
}


def preset(name: str, num_classes: int, in_size: int | None = None,
           in_channels: int = 3) -> ModelSpec:
    """Look up a preset by name; in_size defaults per preset."""
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r} (have: {sorted(_PRESETS)})")
    factory = _PRESETS[name]
    if name == "alexlite_mini":
        return factory(num_classes, in_channels=in_channels)
    if in_size is None:
        return factory(num_classes, in_channels=in_channels)
    return factory(num_classes, in_size=in_size, in_channels=in_channels)
