"""Binary checkpoint format.

Layout (all integers little-endian):

* magic ``SAFB``
* u32 version (currently 1)
* u64 byte length + UTF-8 descriptor text: the canonical spec text,
  optionally followed by one ``frozen <name>...`` line listing layers
  whose trainable flag is off
* per parameterized layer, in spec order: the weight tensor then the
  bias tensor, each as a u64 element count followed by that many
  float32 IEEE-754 values

Parameters are held in float32 by default, so save -> load -> forward
reproduces the original forward output bit for bit. Saving float64
parameters quantizes them to float32 on disk.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import DecodeError
from .model import ModelParams, ModelSpec

__all__ = ["save_checkpoint", "load_checkpoint", "MAGIC", "VERSION"]

MAGIC = b"SAFB"
VERSION = 1


def save_checkpoint(spec: ModelSpec, params: ModelParams) -> bytes:
    spec.validate()
    text = spec.to_text()
    frozen = [n for n, flag in sorted(params.trainable.items()) if not flag]
    if frozen:
        text += "frozen " + " ".join(frozen) + "\n"
    blob = text.encode("utf-8")
    parts = [MAGIC, struct.pack("<I", VERSION), struct.pack("<Q", len(blob)), blob]
    for layer in spec.layers:
        if layer.name in params.weights:
            for arr in (params.weights[layer.name], params.biases[layer.name]):
                flat = np.ascontiguousarray(arr, dtype="<f4").ravel()
                parts.append(struct.pack("<Q", flat.size))
                parts.append(flat.tobytes())
    return b"".join(parts)


def _take(data: bytes, pos: int, count: int, what: str) -> tuple[bytes, int]:
    if len(data) < pos + count:
        raise DecodeError(
            f"checkpoint truncated reading {what}: expected {pos + count} bytes, "
            f"file has {len(data)}"
        )
    return data[pos : pos + count], pos + count


def load_checkpoint(data: bytes) -> tuple[ModelSpec, ModelParams]:
    magic, pos = _take(data, 0, 4, "magic")
    if magic != MAGIC:
        raise DecodeError(f"bad checkpoint magic {magic!r} (expected {MAGIC!r})")
    raw, pos = _take(data, pos, 4, "version")
    version = struct.unpack("<I", raw)[0]
    if version != VERSION:
        raise DecodeError(f"unsupported checkpoint version {version} (expected {VERSION})")
    raw, pos = _take(data, pos, 8, "descriptor length")
    text_len = struct.unpack("<Q", raw)[0]
    blob, pos = _take(data, pos, text_len, "descriptor text")
    lines = blob.decode("utf-8").splitlines()
    frozen: set[str] = set()
    if lines and lines[-1].startswith("frozen "):
        frozen = set(lines[-1].split()[1:])
        lines = lines[:-1]
    spec = ModelSpec.from_text("\n".join(lines))
    shapes = spec.validate()

    weights, biases, trainable = {}, {}, {}
    shape = ("map", spec.in_channels, spec.in_height, spec.in_width)
    for layer, out_shape in zip(spec.layers, shapes):
        if layer.kind == "conv":
            w_shape = (layer.channels, shape[1], layer.kernel, layer.kernel)
            b_shape = (layer.channels,)
        elif layer.kind == "fc":
            w_shape = (layer.units, shape[1])
            b_shape = (layer.units,)
        else:
            shape = out_shape
            continue
        tensors = []
        for t_shape in (w_shape, b_shape):
            raw, pos = _take(data, pos, 8, f"{layer.name} tensor length")
            count = struct.unpack("<Q", raw)[0]
            expected = int(np.prod(t_shape))
            if count != expected:
                raise DecodeError(
                    f"layer {layer.name!r}: expected {expected} values, header says {count}"
                )
            raw, pos = _take(data, pos, count * 4, f"{layer.name} tensor data")
            tensors.append(np.frombuffer(raw, dtype="<f4").reshape(t_shape).copy())
        weights[layer.name], biases[layer.name] = tensors
        trainable[layer.name] = layer.name not in frozen
        shape = out_shape
    if pos != len(data):
        raise DecodeError(f"trailing data after checkpoint payload at offset {pos}")
    return spec, ModelParams(weights, biases, trainable)
