"""Sequential little-endian reader for the binary cache and checkpoint files."""

import struct
from typing import Tuple

import numpy as np

from ..exceptions import CacheCorruptionError


class ByteReader:
    """Reads fields in order and reports the byte offset of a short read."""

    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise CacheCorruptionError(f"truncated payload while reading {what}", self.offset)
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str, what: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def array(self, dtype: str, count: int, what: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count, what), dtype=dtype)

    def text(self, length_fmt: str, what: str) -> str:
        """A length-prefixed UTF-8 string."""
        (length,) = self.unpack(length_fmt, f"{what} length")
        start = self.offset
        try:
            return self.take(length, what).decode("utf-8")
        except UnicodeDecodeError:
            raise CacheCorruptionError(f"{what} is not valid UTF-8", start)

    @property
    def remaining(self) -> int:
        return len(self.payload) - self.offset
