"""
Model checkpoint file.

Layout:
    8 bytes   magic b"TORSNET1"
    4 bytes   header length, unsigned little-endian
    n bytes   UTF-8 JSON header: {"spec": {...}, "params": [[name, shape], ...]}
    rest      float64 little-endian parameters, concatenated in header order
"""

import json
import os
import struct

import numpy as np
from pydantic import ValidationError

from neural_net import Model, ModelSpec

MAGIC = b"TORSNET1"
_LENGTH = struct.Struct('<I')
_DTYPE = np.dtype('<f8')


class CheckpointFormatError(ValueError):
    """The file is not a readable model checkpoint."""


def save_checkpoint(model: Model, path: str) -> str:
    header = {
        'spec': model.spec.model_dump(),
        'params': [[name, list(p.shape)] for name, p in model.params.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode('utf-8')
    out_dir = os.path.dirname(path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    with open(path, 'wb') as fh:
        fh.write(MAGIC)
        fh.write(_LENGTH.pack(len(header_bytes)))
        fh.write(header_bytes)
        for p in model.params.values():
            fh.write(np.ascontiguousarray(p, dtype=_DTYPE).tobytes())
    return path


def load_checkpoint(path: str) -> Model:
    with open(path, 'rb') as fh:
        blob = fh.read()

    if blob[:len(MAGIC)] != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic")
    offset = len(MAGIC)
    if len(blob) < offset + _LENGTH.size:
        raise CheckpointFormatError(f"{path}: truncated header")
    (n,) = _LENGTH.unpack_from(blob, offset)
    offset += _LENGTH.size
    try:
        header = json.loads(blob[offset:offset + n].decode('utf-8'))
        spec = ModelSpec(**header['spec'])
        layout = [(name, tuple(shape)) for name, shape in header['params']]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValidationError) as e:
        raise CheckpointFormatError(f"{path}: unreadable header ({e})") from e
    offset += n

    payload = np.frombuffer(blob, dtype=_DTYPE, offset=offset) \
        if (len(blob) - offset) % _DTYPE.itemsize == 0 else None
    expected = sum(int(np.prod(shape)) for _, shape in layout)
    if payload is None or payload.size != expected:
        raise CheckpointFormatError(f"{path}: payload does not match header")

    params = {}
    cursor = 0
    for name, shape in layout:
        size = int(np.prod(shape))
        params[name] = payload[cursor:cursor + size].astype(np.float64).reshape(shape)
        cursor += size
    return Model(spec, params)
