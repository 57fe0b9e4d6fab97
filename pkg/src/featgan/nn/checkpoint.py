"""FGNN model checkpoint format.

Layout: magic "FGNN", format version (u32 LE), layer count (u32 LE), then
per layer a kind tag (u8: 1=linear, 2=relu, 3=tanh, 4=sigmoid); linear
layers carry out/in dims (u32 LE each) followed by raw float32 LE weight
(row-major, out x in) and bias (out) payloads. A trailing UTF-8 metadata
block (u32 LE byte length + JSON) embeds the train config, the section
table grouping layers into named networks, and any extra model state.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from featgan.errors import (BadMagicError, HeaderOverflowError,
                            TruncatedFileError, VersionError)
from featgan.nn.layers import Activation, Layer, Linear, Mlp

MAGIC = b"FGNN"
VERSION = 1

_KIND_TAGS = {"linear": 1, "relu": 2, "tanh": 3, "sigmoid": 4}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}

# Single-layer parameter-count guard against corrupt headers.
_MAX_LAYER_ELEMS = 1 << 28


def save_model(path, sections: list[tuple[str, Mlp]], metadata: dict) -> None:
    """Write named layer stacks plus metadata; sections load back in order."""
    meta = dict(metadata)
    meta["sections"] = [{"name": name, "layers": len(net.layers)}
                        for name, net in sections]
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", VERSION)
    layers = [layer for _, net in sections for layer in net.layers]
    blob += struct.pack("<I", len(layers))
    for layer in layers:
        if isinstance(layer, Linear):
            blob += struct.pack("<B", _KIND_TAGS["linear"])
            blob += struct.pack("<II", layer.out_dim, layer.in_dim)
            blob += np.ascontiguousarray(layer.weight, dtype="<f4").tobytes()
            blob += np.ascontiguousarray(layer.bias, dtype="<f4").tobytes()
        elif isinstance(layer, Activation):
            blob += struct.pack("<B", _KIND_TAGS[layer.kind])
        else:
            raise TypeError(f"cannot serialize layer type {type(layer).__name__}")
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")
    blob += struct.pack("<I", len(meta_bytes))
    blob += meta_bytes
    Path(path).write_bytes(bytes(blob))


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFileError(
                f"{self.path}: expected {n} more bytes at offset {self.pos}, "
                f"file has {len(self.data)}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]


def load_model(path) -> tuple[list[tuple[str, Mlp]], dict]:
    """Read sections and metadata written by save_model."""
    data = Path(path).read_bytes()
    r = _Reader(data, path)
    if r.take(4) != MAGIC:
        raise BadMagicError(f"{path}: not an FGNN checkpoint")
    version = r.u32()
    if version != VERSION:
        raise VersionError(f"{path}: unsupported FGNN version {version}")
    n_layers = r.u32()
    layers: list[Layer] = []
    for _ in range(n_layers):
        tag = r.u8()
        kind = _TAG_KINDS.get(tag)
        if kind is None:
            raise BadMagicError(f"{path}: unknown layer kind tag {tag}")
        if kind == "linear":
            out_dim = r.u32()
            in_dim = r.u32()
            if out_dim * in_dim > _MAX_LAYER_ELEMS:
                raise HeaderOverflowError(
                    f"{path}: layer dims {out_dim}x{in_dim} overflow sanity limit")
            weight = np.frombuffer(r.take(4 * out_dim * in_dim), dtype="<f4")
            bias = np.frombuffer(r.take(4 * out_dim), dtype="<f4")
            layer = Linear.__new__(Linear)
            layer.in_dim = in_dim
            layer.out_dim = out_dim
            layer.name = "linear"
            layer.weight = weight.reshape(out_dim, in_dim).copy()
            layer.bias = bias.copy()
            layer.grad_weight = np.zeros_like(layer.weight)
            layer.grad_bias = np.zeros_like(layer.bias)
            layer._inputs = []
            layers.append(layer)
        else:
            layers.append(Activation(kind))
    meta_len = r.u32()
    metadata = json.loads(r.take(meta_len).decode("utf-8"))
    sections = []
    start = 0
    for entry in metadata.pop("sections"):
        count = entry["layers"]
        net = Mlp(layers[start:start + count], name=entry["name"])
        sections.append((entry["name"], net))
        start += count
    if start != len(layers):
        raise TruncatedFileError(f"{path}: section table covers {start} of "
                                 f"{len(layers)} layers")
    return sections, metadata
