"""Bitmask helpers for point sets (points are small nonnegative ints)."""

from __future__ import annotations


def bits(mask: int):
    """Yield set bit positions in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def min_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def mask_of(points) -> int:
    out = 0
    for p in points:
        out |= 1 << p
    return out


def to_frozenset(mask: int) -> frozenset[int]:
    return frozenset(bits(mask))
