"""Exact rational parsing and formatting."""

from __future__ import annotations

from collections.abc import Iterable
from decimal import Decimal
from fractions import Fraction
from typing import Union

from .errors import InputError

RationalLike = Union[Fraction, int, str, Decimal, float]


def to_fraction(value: RationalLike, where: str = "value") -> Fraction:
    """Convert *value* to an exact :class:`~fractions.Fraction`.

    Accepts fractions, integers, ``"p/q"`` strings, finite decimal strings
    and :class:`~decimal.Decimal`. Floats are read through their shortest
    decimal representation (``0.1`` becomes ``1/10``, not the binary value).
    """
    if isinstance(value, bool):
        raise InputError(f"{where}: booleans are not numbers")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise InputError(f"{where}: non-finite number {value!r}")
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise InputError(f"{where}: non-finite number {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            result = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{where}: cannot parse {value!r} as an exact rational") from None
        return result
    raise InputError(f"{where}: unsupported number type {type(value).__name__}")


def to_fractions(values: Iterable[RationalLike], where: str = "vector") -> tuple[Fraction, ...]:
    return tuple(to_fraction(v, f"{where}[{i}]") for i, v in enumerate(values))


def fmt(x: Fraction) -> str:
    """Serialize as ``"p/q"`` (or ``"p"`` for integers)."""
    return str(x)


def fmt_all(xs: Iterable[Fraction]) -> list[str]:
    return [str(x) for x in xs]


def dot(a: Iterable[Fraction], b: Iterable[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))
