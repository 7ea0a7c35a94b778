"""Exact rational parsing and formatting.

All quantities cross module and file boundaries as exact rationals
("p/q" strings, decimal strings, or ints). Binary floats are rejected
outright: verdicts must not depend on rounding.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import BadParams


def parse_rational(value) -> Fraction:
    """Convert ``"p/q"``, ``"0.25"``, an int, or a Fraction to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise BadParams(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise BadParams("floating point rejected; pass a 'p/q' or decimal string")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise BadParams(f"cannot parse rational {value!r}") from exc
    raise BadParams(f"not a rational: {value!r}")


def parse_nonnegative(value) -> Fraction:
    q = parse_rational(value)
    if q < 0:
        raise BadParams(f"expected a nonnegative rational, got {q}")
    return q


def format_rational(q: Fraction) -> str:
    return str(q)
