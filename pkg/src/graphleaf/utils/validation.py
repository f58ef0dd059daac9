"""Validation utilities for pipeline parameters."""

from numbers import Integral, Real
from typing import Any, Iterable

from ..exceptions import InputError


def validate_positive_integer(value: Any, name: str = "value",
                              min_value: int = 1) -> int:
    """Validate an integer that must be at least ``min_value``."""
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise InputError(f"{name} must be an integer, got {value!r}")

    if value < min_value:
        raise InputError(f"{name} must be at least {min_value}, got {value}")

    return int(value)


def validate_probability(value: Any, name: str = "value") -> float:
    """Validate a probability in the closed interval [0, 1]."""
    if isinstance(value, bool) or not isinstance(value, Real):
        raise InputError(f"{name} must be a number, got {value!r}")

    if not (0.0 <= value <= 1.0):
        raise InputError(f"{name} must be between 0.0 and 1.0, got {value}")

    return float(value)


def validate_open_fraction(value: Any, name: str = "value") -> float:
    """Validate a fraction in the open interval (0, 1)."""
    value = validate_probability(value, name)
    if value in (0.0, 1.0):
        raise InputError(f"{name} must be strictly between 0 and 1, got {value}")
    return value


def validate_positive_real(value: Any, name: str = "value") -> float:
    """Validate a strictly positive real number."""
    if isinstance(value, bool) or not isinstance(value, Real):
        raise InputError(f"{name} must be a number, got {value!r}")

    if not value > 0:
        raise InputError(f"{name} must be positive, got {value}")

    return float(value)


def validate_choice(value: Any, choices: Iterable[str], name: str = "value") -> str:
    """Validate a name against the available options."""
    options = list(choices)
    if value not in options:
        raise InputError(f"Unknown {name} '{value}'. "
                         f"Available options: {', '.join(options)}")
    return str(value)
