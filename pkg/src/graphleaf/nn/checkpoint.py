"""``GLWT`` parameter checkpoints.

Layout (little-endian)::

    b"GLWT"  u16 version=1
    u32 metadata length + UTF-8 JSON metadata
    u32 record count, then per parameter:
        u16 name length + UTF-8 name
        u8 ndim, ndim * u32 dims
        float32 data, float32 Adam m, float32 Adam v (row-major)
        u32 Adam step count t (identical in every record)
"""

import io
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ..exceptions import CacheCorruptionError, CacheFormatError, InputError
from ..utils.byte_reader import ByteReader
from ..utils.file_utils import atomic_write_bytes, format_file_size
from .optim import ParamSet
from .tensor import Tensor

logger = logging.getLogger(__name__)

MAGIC = b"GLWT"
VERSION = 1


def encode_checkpoint(params: ParamSet, metadata: Optional[Dict[str, Any]] = None) -> bytes:
    buffer = io.BytesIO()
    buffer.write(MAGIC)
    buffer.write(struct.pack("<H", VERSION))
    meta = json.dumps(metadata or {}, sort_keys=True).encode("utf-8")
    buffer.write(struct.pack("<I", len(meta)))
    buffer.write(meta)
    buffer.write(struct.pack("<I", len(params)))
    for name, tensor in params.items():
        encoded = name.encode("utf-8")
        buffer.write(struct.pack("<H", len(encoded)))
        buffer.write(encoded)
        buffer.write(struct.pack("<B", tensor.ndim))
        buffer.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        for array in (tensor.data, params.m[name], params.v[name]):
            buffer.write(np.ascontiguousarray(array, dtype="<f4").tobytes())
        buffer.write(struct.pack("<I", params.t))
    return buffer.getvalue()


def save_checkpoint(path: Union[str, Path], params: ParamSet,
                    metadata: Optional[Dict[str, Any]] = None) -> None:
    payload = encode_checkpoint(params, metadata)
    atomic_write_bytes(path, payload)
    logger.info(f"Saved checkpoint {path} ({format_file_size(len(payload))})")


def decode_checkpoint(payload: bytes) -> Tuple[ParamSet, Dict[str, Any]]:
    if payload[:len(MAGIC)] != MAGIC:
        raise CacheFormatError("not a parameter checkpoint (bad magic bytes)")
    cursor = ByteReader(payload)
    cursor.take(len(MAGIC), "magic")
    (version,) = cursor.unpack("<H", "version")
    if version != VERSION:
        raise CacheFormatError(f"unsupported checkpoint version {version}")

    (meta_length,) = cursor.unpack("<I", "metadata length")
    meta_offset = cursor.offset
    try:
        metadata = json.loads(cursor.take(meta_length, "metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CacheCorruptionError(f"metadata block is not valid JSON: {e}", meta_offset)

    (count,) = cursor.unpack("<I", "record count")
    params = ParamSet()
    steps = set()
    for r in range(count):
        name = cursor.text("<H", f"record {r} name")
        (ndim,) = cursor.unpack("<B", f"'{name}' rank")
        shape = cursor.unpack(f"<{ndim}I", f"'{name}' shape")
        size = int(np.prod(shape, dtype=np.int64))
        arrays = [cursor.array("<f4", size, f"'{name}' {part}").reshape(shape).astype(np.float32)
                  for part in ("data", "m", "v")]
        (t,) = cursor.unpack("<I", f"'{name}' step count")
        params[name] = Tensor(arrays[0])
        params.m[name], params.v[name] = arrays[1], arrays[2]
        steps.add(t)

    if cursor.remaining:
        raise CacheCorruptionError(f"{cursor.remaining} unexpected trailing bytes", cursor.offset)
    if len(steps) > 1:
        raise CacheCorruptionError(f"records disagree on the Adam step count: {sorted(steps)}")
    params.t = steps.pop() if steps else 0
    return params, metadata


def load_checkpoint(path: Union[str, Path]) -> Tuple[ParamSet, Dict[str, Any]]:
    """Parameters with their Adam state, and the metadata block."""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except FileNotFoundError:
        raise InputError(f"checkpoint not found: {path}")
    except OSError as e:
        raise InputError(f"cannot read checkpoint {path}: {e}")
    return decode_checkpoint(payload)
