"""Model specification, parameter container, forward and backward passes.

A model is a flat sequence of layers over (n, c, h, w) activations:
conv, relu, maxpool, fc, dropout, flatten, gap, softmax. There is no
padding anywhere; spatial bookkeeping is explicit and validated when the
spec is built. Activations and parameters share one dtype (float32 by
default, float64 for gradient checking).

The spec has a canonical one-line-per-layer text form used by the
checkpoint format, e.g.::

    input 3 64 64
    conv conv1 8 3 1
    relu relu1
    maxpool pool1 2 2
    flatten flat
    fc fc6 128
    dropout drop6 0.5
    fc fc8 3
    softmax prob
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import BuildError, ShapeError
from . import ops

__all__ = [
    "LayerSpec",
    "ModelSpec",
    "ModelParams",
    "conv",
    "relu",
    "maxpool",
    "fc",
    "dropout",
    "flatten",
    "gap",
    "softmax_layer",
    "build",
    "forward",
    "backward",
    "softmax",
]

PARAM_KINDS = ("conv", "fc")
ALL_KINDS = ("conv", "relu", "maxpool", "fc", "dropout", "flatten", "gap", "softmax")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    name: str
    channels: int = 0  # conv: output channels
    kernel: int = 0  # conv/maxpool: square kernel side
    stride: int = 1  # conv/maxpool
    units: int = 0  # fc: output features
    keep: float = 0.5  # dropout: keep probability


def conv(name: str, channels: int, kernel: int, stride: int = 1) -> LayerSpec:
    return LayerSpec("conv", name, channels=channels, kernel=kernel, stride=stride)


def relu(name: str) -> LayerSpec:
    return LayerSpec("relu", name)


def maxpool(name: str, kernel: int, stride: int | None = None) -> LayerSpec:
    return LayerSpec("maxpool", name, kernel=kernel, stride=stride or kernel)


def fc(name: str, units: int) -> LayerSpec:
    return LayerSpec("fc", name, units=units)


def dropout(name: str, keep: float) -> LayerSpec:
    return LayerSpec("dropout", name, keep=keep)


def flatten(name: str) -> LayerSpec:
    return LayerSpec("flatten", name)


def gap(name: str) -> LayerSpec:
    return LayerSpec("gap", name)


def softmax_layer(name: str) -> LayerSpec:
    return LayerSpec("softmax", name)


@dataclass(frozen=True)
class ModelSpec:
    in_channels: int
    in_height: int
    in_width: int
    layers: tuple[LayerSpec, ...]

    def validate(self) -> list[tuple]:
        """Check layer compatibility; returns the per-layer output shapes.

        Shapes are ("map", c, h, w) for spatial activations and
        ("vec", d) after flatten or gap.
        """
        if self.in_channels < 1 or self.in_height < 1 or self.in_width < 1:
            raise BuildError(f"invalid input shape {self._input_shape()}")
        names = [layer.name for layer in self.layers]
        if len(set(names)) != len(names):
            raise BuildError(f"duplicate layer names in {names}")
        shape = ("map", self.in_channels, self.in_height, self.in_width)
        shapes = []
        for i, layer in enumerate(self.layers):
            if layer.kind == "softmax" and i != len(self.layers) - 1:
                raise BuildError(f"layer {layer.name!r}: softmax must be last")
            shape = self._step(layer, shape)
            shapes.append(shape)
        return shapes

    def _input_shape(self):
        return (self.in_channels, self.in_height, self.in_width)

    @staticmethod
    def _step(layer: LayerSpec, shape):
        kind = layer.kind
        if kind in ("conv", "maxpool"):
            if shape[0] != "map":
                raise BuildError(f"layer {layer.name!r}: {kind} needs a spatial input")
            _, c, h, w = shape
            k, s = layer.kernel, layer.stride
            if k < 1 or s < 1:
                raise BuildError(f"layer {layer.name!r}: kernel and stride must be >= 1")
            if k > h or k > w:
                raise BuildError(
                    f"layer {layer.name!r}: kernel {k} larger than input {h}x{w}"
                )
            ho = (h - k) // s + 1
            wo = (w - k) // s + 1
            if kind == "conv":
                if layer.channels < 1:
                    raise BuildError(f"layer {layer.name!r}: channels must be >= 1")
                return ("map", layer.channels, ho, wo)
            return ("map", c, ho, wo)
        if kind == "fc":
            if shape[0] != "vec":
                raise BuildError(
                    f"layer {layer.name!r}: fc needs a flattened input (add flatten/gap)"
                )
            if layer.units < 1:
                raise BuildError(f"layer {layer.name!r}: units must be >= 1")
            return ("vec", layer.units)
        if kind == "flatten":
            if shape[0] != "map":
                raise BuildError(f"layer {layer.name!r}: flatten needs a spatial input")
            _, c, h, w = shape
            return ("vec", c * h * w)
        if kind == "gap":
            if shape[0] != "map":
                raise BuildError(f"layer {layer.name!r}: gap needs a spatial input")
            return ("vec", shape[1])
        if kind == "dropout":
            if not 0.0 < layer.keep <= 1.0:
                raise BuildError(f"layer {layer.name!r}: keep must be in (0, 1]")
            return shape
        if kind in ("relu",):
            return shape
        if kind == "softmax":
            if shape[0] != "vec":
                raise BuildError(f"layer {layer.name!r}: softmax needs a flattened input")
            return shape
        raise BuildError(f"layer {layer.name!r}: unknown kind {kind!r}")

    def num_classes(self) -> int:
        for layer in reversed(self.layers):
            if layer.kind == "fc":
                return layer.units
        raise BuildError("spec has no fc layer to infer the class count from")

    def with_dropout_keep(self, keep: float | None) -> "ModelSpec":
        """Copy with every dropout layer's keep probability overridden."""
        if keep is None:
            return self
        layers = tuple(
            replace(l, keep=keep) if l.kind == "dropout" else l for l in self.layers
        )
        return ModelSpec(self.in_channels, self.in_height, self.in_width, layers)

    def truncated(self, count: int) -> "ModelSpec":
        return ModelSpec(
            self.in_channels, self.in_height, self.in_width, self.layers[:count]
        )

    # -- canonical text form -------------------------------------------------

    def to_text(self) -> str:
        lines = [f"input {self.in_channels} {self.in_height} {self.in_width}"]
        for l in self.layers:
            if l.kind == "conv":
                lines.append(f"conv {l.name} {l.channels} {l.kernel} {l.stride}")
            elif l.kind == "maxpool":
                lines.append(f"maxpool {l.name} {l.kernel} {l.stride}")
            elif l.kind == "fc":
                lines.append(f"fc {l.name} {l.units}")
            elif l.kind == "dropout":
                lines.append(f"dropout {l.name} {l.keep!r}")
            else:
                lines.append(f"{l.kind} {l.name}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ModelSpec":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("input "):
            raise BuildError("spec text must start with an 'input c h w' line")
        try:
            _, c, h, w = lines[0].split()
            spec_in = (int(c), int(h), int(w))
        except ValueError as exc:
            raise BuildError(f"bad input line {lines[0]!r}") from exc
        layers = []
        for ln in lines[1:]:
            parts = ln.split()
            kind = parts[0]
            try:
                if kind == "conv":
                    layers.append(conv(parts[1], int(parts[2]), int(parts[3]), int(parts[4])))
                elif kind == "maxpool":
                    layers.append(maxpool(parts[1], int(parts[2]), int(parts[3])))
                elif kind == "fc":
                    layers.append(fc(parts[1], int(parts[2])))
                elif kind == "dropout":
                    layers.append(dropout(parts[1], float(parts[2])))
                elif kind in ("relu", "flatten", "gap", "softmax"):
                    layers.append(LayerSpec(kind, parts[1]))
                else:
                    raise BuildError(f"unknown layer kind {kind!r} in {ln!r}")
            except (IndexError, ValueError) as exc:
                raise BuildError(f"bad layer line {ln!r}") from exc
        return cls(spec_in[0], spec_in[1], spec_in[2], tuple(layers))


@dataclass
class ModelParams:
    """Weight and bias tensors plus per-layer trainable flags."""

    weights: dict[str, np.ndarray]
    biases: dict[str, np.ndarray]
    trainable: dict[str, bool] = field(default_factory=dict)

    @property
    def dtype(self):
        for w in self.weights.values():
            return w.dtype
        return np.dtype(np.float32)

    def copy(self) -> "ModelParams":
        return ModelParams(
            {k: v.copy() for k, v in self.weights.items()},
            {k: v.copy() for k, v in self.biases.items()},
            dict(self.trainable),
        )

    def set_trainable(self, names) -> None:
        """Mark exactly ``names`` trainable; an empty list means all layers."""
        names = list(names)
        if names:
            unknown = sorted(set(names) - set(self.weights))
            if unknown:
                raise BuildError(f"trainable_layers name unknown layers: {unknown}")
        for key in self.trainable:
            self.trainable[key] = not names or key in names


def build(spec: ModelSpec, seed: int, dtype=np.float32) -> ModelParams:
    """He-uniform initialized parameters (bound sqrt(6 / fan_in)), zero biases."""
    shapes = spec.validate()
    rng = np.random.default_rng(seed)
    weights, biases, trainable = {}, {}, {}
    shape = ("map", spec.in_channels, spec.in_height, spec.in_width)
    for layer, out_shape in zip(spec.layers, shapes):
        if layer.kind == "conv":
            in_c = shape[1]
            fan_in = in_c * layer.kernel * layer.kernel
            bound = np.sqrt(6.0 / fan_in)
            w = rng.uniform(-bound, bound, (layer.channels, in_c, layer.kernel, layer.kernel))
            weights[layer.name] = w.astype(dtype)
            biases[layer.name] = np.zeros(layer.channels, dtype=dtype)
            trainable[layer.name] = True
        elif layer.kind == "fc":
            fan_in = shape[1]
            bound = np.sqrt(6.0 / fan_in)
            w = rng.uniform(-bound, bound, (layer.units, fan_in))
            weights[layer.name] = w.astype(dtype)
            biases[layer.name] = np.zeros(layer.units, dtype=dtype)
            trainable[layer.name] = True
        shape = out_shape
    return ModelParams(weights, biases, trainable)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(spec: ModelSpec, params: ModelParams, x: np.ndarray, mode: str = "eval",
            rng: np.random.Generator | None = None):
    """Run the layer stack; returns (output, cache) for :func:`backward`.

    ``mode`` is "train" or "eval". Dropout fires only in train mode
    (inverted: activations scale by 1/keep at train time) and then needs
    ``rng``. The cache holds exactly what backward consumes.
    """
    if mode not in ("train", "eval"):
        raise ShapeError(f"mode must be train or eval, got {mode!r}")
    expected = (spec.in_channels, spec.in_height, spec.in_width)
    if x.ndim != 4 or x.shape[1:] != expected:
        raise ShapeError(f"batch shape {x.shape} does not match input {expected}")
    a = np.ascontiguousarray(x, dtype=params.dtype)
    cache = []
    for layer in spec.layers:
        kind = layer.kind
        if kind == "conv":
            cache.append((a,))
            a = ops.conv2d_forward(a, params.weights[layer.name],
                                   params.biases[layer.name], layer.stride)
        elif kind == "relu":
            cache.append((a,))
            a = np.maximum(a, 0)
        elif kind == "maxpool":
            h, w = a.shape[2], a.shape[3]
            a, argmax = ops.maxpool_forward(a, layer.kernel, layer.stride)
            cache.append((argmax, h, w))
        elif kind == "fc":
            cache.append((a,))
            a = a @ params.weights[layer.name].T + params.biases[layer.name]
        elif kind == "dropout":
            if mode == "train" and layer.keep < 1.0:
                if rng is None:
                    raise ShapeError("train-mode forward with dropout needs an rng")
                mask = (rng.random(a.shape) < layer.keep).astype(a.dtype) / layer.keep
                cache.append((mask,))
                a = a * mask
            else:
                cache.append((None,))
        elif kind == "flatten":
            cache.append((a.shape,))
            a = a.reshape(a.shape[0], -1)
        elif kind == "gap":
            cache.append((a.shape,))
            a = a.mean(axis=(2, 3))
        elif kind == "softmax":
            a = softmax(a)
            cache.append((a,))
    return a, cache


def backward(spec: ModelSpec, params: ModelParams, cache: list, dlogits: np.ndarray):
    """Backpropagate from d(loss)/d(logits) (the softmax input).

    Returns {layer name: (dw, db)} for parameterized layers. Frozen
    layers still pass gradients through but their own entries are exact
    zeros.
    """
    grads = {}
    grad = np.ascontiguousarray(dlogits, dtype=params.dtype)
    for layer, cached in zip(reversed(spec.layers), reversed(cache)):
        kind = layer.kind
        if kind == "softmax":
            # combined with cross-entropy upstream: incoming grad already
            # differentiates through the softmax
            continue
        if kind == "conv":
            (x,) = cached
            grad, dw, db = ops.conv2d_backward(x, params.weights[layer.name], grad,
                                               layer.stride)
            if params.trainable.get(layer.name, True):
                grads[layer.name] = (dw, db)
            else:
                grads[layer.name] = (np.zeros_like(dw), np.zeros_like(db))
        elif kind == "relu":
            (x,) = cached
            grad = grad * (x > 0)
        elif kind == "maxpool":
            argmax, h, w = cached
            grad = ops.maxpool_backward(grad, argmax, h, w)
        elif kind == "fc":
            (x,) = cached
            dw = grad.T @ x
            db = grad.sum(axis=0)
            if params.trainable.get(layer.name, True):
                grads[layer.name] = (dw, db)
            else:
                grads[layer.name] = (np.zeros_like(dw), np.zeros_like(db))
            grad = grad @ params.weights[layer.name]
        elif kind == "dropout":
            (mask,) = cached
            if mask is not None:
                grad = grad * mask
        elif kind == "flatten":
            (shape,) = cached
            grad = grad.reshape(shape)
        elif kind == "gap":
            (shape,) = cached
            n, c, h, w = shape
            grad = np.broadcast_to(
                grad[:, :, None, None] / (h * w), shape
            ).astype(params.dtype, copy=True)
    return grads
