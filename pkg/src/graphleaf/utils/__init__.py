"""Utility functions and classes for the pipeline."""

from .byte_reader import ByteReader
from .performance import Timer
from .validation import (
    validate_choice,
    validate_open_fraction,
    validate_positive_integer,
    validate_probability,
)
from .file_utils import ensure_directory_exists, get_file_extension
from .output_manager import OutputManager
from .random_streams import SeedStreams

__all__ = [
    'ByteReader',
    'Timer',
    'validate_choice',
    'validate_open_fraction',
    'validate_positive_integer',
    'validate_probability',
    'ensure_directory_exists',
    'get_file_extension',
    'OutputManager',
    'SeedStreams',
]
