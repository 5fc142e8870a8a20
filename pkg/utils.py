"""
Utility functions for the stammering continued fraction toolkit.

This module provides environment-driven configuration, exact number coercion,
precision setup for the approximate parts of the toolkit, and atomic JSON
writes for report files.
"""

import json
import logging
import os
import pathlib
from fractions import Fraction
from typing import Optional, Union

from dotenv import load_dotenv
from mpmath import mp

log = logging.getLogger(__name__)

# Environment file loading
ENV_PATH = os.path.expanduser("~/cf_stammer/.env")
if os.path.exists(ENV_PATH):
    load_dotenv(ENV_PATH)
else:
    load_dotenv()  # fallback to default .env


def env_int(name: str, default: int) -> int:
    """
    Read an integer from the environment.

    Args:
        name: Environment variable name
        default: Value used when the variable is unset or malformed

    Returns:
        int: Parsed value or the default
    """
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        log.warning("Ignoring malformed %s=%r, using %d", name, raw, default)
        return default


def env_float(name: str, default: float) -> float:
    """
    Read a float from the environment.

    Args:
        name: Environment variable name
        default: Value used when the variable is unset or malformed

    Returns:
        float: Parsed value or the default
    """
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        log.warning("Ignoring malformed %s=%r, using %s", name, raw, default)
        return default


# Precision of log / square-root computations, in decimal digits
LOG_PRECISION = env_int("CF_LOG_PRECISION", 30)
LOG_LEVEL = os.getenv("CF_LOG_LEVEL", "INFO").upper()
DEFAULT_T = env_int("CF_DEFAULT_T", 5)
DEFAULT_TAIL_FRACTION = env_float("CF_TAIL_FRACTION", 0.5)


def configure_precision(digits: Optional[int] = None) -> int:
    """
    Set the mpmath working precision.

    Args:
        digits: Decimal digits; defaults to CF_LOG_PRECISION

    Returns:
        int: The precision now in effect
    """
    digits = LOG_PRECISION if digits is None else int(digits)
    if digits < 15:
        raise ValueError(f"log precision must be at least 15 digits, got {digits}")
    mp.dps = digits
    return digits


def to_fraction(value: Union[Fraction, int, float, str]) -> Fraction:
    """
    Convert a value to Fraction for exact arithmetic.

    Floats go through their shortest decimal representation, so 3.3 becomes
    33/10 rather than the nearest binary fraction.

    Args:
        value: Value to convert (Fraction, int, float, or string like "9/8")

    Returns:
        Fraction: Converted value
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def fraction_to_json(value: Optional[Fraction]) -> Optional[dict]:
    """Serialize a rational as a numerator/denominator pair."""
    if value is None:
        return None
    return {"num": value.numerator, "den": value.denominator}


def atomic_write_json(path: Union[str, pathlib.Path], data: dict) -> None:
    """
    Write a JSON document atomically.

    Args:
        path: Destination file
        data: JSON-serializable document
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_suffix(path.suffix + ".tmp")

    with temp_file.open("w", encoding="utf-8") as file:
        json.dump(data, file, ensure_ascii=False, indent=2)

    temp_file.replace(path)


configure_precision()
