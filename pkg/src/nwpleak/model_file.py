"""Binary model file: ``NWPM`` magic, u32 version, u32 V, D, H, then f64 LE payload."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from nwpleak.model import ModelDims, ModelParams

MAGIC = b"NWPM"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


class ModelFormatError(ValueError):
    pass


def serialize(params: ModelParams) -> bytes:
    d = params.dims
    payload = params.flat().astype("<f8", copy=False).tobytes()
    return _HEADER.pack(MAGIC, VERSION, d.V, d.D, d.H) + payload


def deserialize(data: bytes) -> ModelParams:
    if len(data) < _HEADER.size:
        raise ModelFormatError(f"truncated header: {len(data)} bytes")
    magic, version, V, D, H = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ModelFormatError(f"unsupported format version {version}")
    try:
        dims = ModelDims(V, D, H)
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from exc
    expected = _HEADER.size + 8 * dims.n_params
    if len(data) != expected:
        raise ModelFormatError(
            f"payload length {len(data) - _HEADER.size} does not match dims "
            f"V={V} D={D} H={H} ({8 * dims.n_params} bytes expected)"
        )
    flat = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    return ModelParams.from_flat(dims, flat)


def save(params: ModelParams, path) -> None:
    Path(path).write_bytes(serialize(params))


def load(path) -> ModelParams:
    return deserialize(Path(path).read_bytes())
