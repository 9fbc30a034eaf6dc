"""Parsing and canonical formatting of exact rationals and floats."""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[Fraction, float]

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def is_exact(value) -> bool:
    return isinstance(value, Rational)


def to_fraction(value) -> Fraction:
    """Exact conversion; strings may be ``"21"``, ``"21/2"`` or decimals like ``"0.5"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a number")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to a rational")


def parse_number(text) -> Number:
    """Parse a JSON scalar into a Fraction when it is written as ``p`` or ``p/q``,
    otherwise into a float."""
    if isinstance(text, bool):
        raise TypeError("bool is not a number")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return text
    if not isinstance(text, str):
        raise TypeError(f"expected a number or string, got {type(text).__name__}")
    if _RATIONAL_RE.match(text):
        return Fraction(text.replace(" ", ""))
    return float(text)


def format_number(value) -> str:
    """Canonical string: ``"p/q"`` in lowest terms (``"p"`` when q = 1), or ``repr`` of a float."""
    if isinstance(value, Rational):
        q = Fraction(value)
        if q.denominator == 1:
            return str(q.numerator)
        return f"{q.numerator}/{q.denominator}"
    return repr(float(value))
