"""Exact rational parsing for probabilities given on the command line or over the wire."""

from __future__ import annotations

from fractions import Fraction

from .errors import ParameterError


def parse_rational(value: str | int | Fraction) -> Fraction:
    """Parse "a/b", a decimal string like "0.25", or an int into an exact Fraction.

    Decimal strings convert exactly (0.1 -> 1/10), never through binary floats.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ParameterError(
            f"refusing float {value!r}; pass a string like '1/3' or '0.25' for an exact value"
        )
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"not a rational: {value!r}") from exc


def check_probability(p: Fraction, name: str = "p", *, open_interval: bool = True) -> Fraction:
    """Validate p in (0,1) (or [0,1] when open_interval is False)."""
    if open_interval:
        if not (0 < p < 1):
            raise ParameterError(f"{name} must be in (0,1), got {p}")
    else:
        if not (0 <= p <= 1):
            raise ParameterError(f"{name} must be in [0,1], got {p}")
    return p
