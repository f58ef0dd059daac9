"""Error types shared across the pipeline.

Each error carries a short ``category`` used in the CLI's one-line
``error: <category>: <detail>`` message and the process exit code.
"""

from typing import Optional


class GraphLeafError(Exception):
    """Base class for all pipeline errors."""

    category = "error"
    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(GraphLeafError):
    """Raised for malformed command lines and configuration files."""

    category = "usage"
    exit_code = 1


class InputError(GraphLeafError, ValueError):
    """Raised when caller-supplied data violates a precondition."""

    category = "input"


class DecodeError(GraphLeafError):
    """Raised when an image file cannot be decoded."""

    category = "decode"


class CacheFormatError(GraphLeafError):
    """Raised when a cache or checkpoint file has the wrong magic or version."""

    category = "format"


class CacheCorruptionError(GraphLeafError):
    """Raised when a cache or checkpoint payload is truncated or inconsistent."""

    category = "corruption"

    def __init__(self, detail: str, offset: Optional[int] = None):
        if offset is not None:
            detail = f"{detail} (at byte offset {offset})"
        super().__init__(detail)
        self.offset = offset


class OutputDirectoryError(GraphLeafError):
    """Raised when output files or directories cannot be written."""

    category = "io"


class NumericError(GraphLeafError, ArithmeticError):
    """Raised when training or optimisation produces non-finite values."""

    category = "numeric"
    exit_code = 3
