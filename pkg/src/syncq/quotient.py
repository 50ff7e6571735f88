"""The excess process as a walk on integer vectors modulo the all-ones direction.

Two integer vectors are equivalent when they differ by k*(1,...,1). Each class
is stored by its canonical representative, the translate with min component 0,
which reads as "customers in excess of the shortest queue". Arrivals drive the
class evolution; service shifts along the diagonal and never moves the class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ParameterError


@dataclass(frozen=True)
class ExcessState:
    """Canonical class representative: componentwise >= 0 with min component 0."""

    x: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(int(v) for v in self.x))
        if len(self.x) < 1:
            raise ParameterError("excess state needs at least one component")
        if min(self.x) != 0:
            raise ParameterError(f"not canonical (min component must be 0): {self.x}")

    @property
    def d(self) -> int:
        return len(self.x)

    @property
    def is_origin(self) -> bool:
        return all(v == 0 for v in self.x)


def canonicalize(v: Sequence[int]) -> ExcessState:
    """Map any integer vector to its class representative by subtracting the min component."""
    v = tuple(int(x) for x in v)
    if not v:
        raise ParameterError("empty vector")
    lo = min(v)
    return ExcessState(tuple(x - lo for x in v))


def equivalent(u: Sequence[int], v: Sequence[int]) -> bool:
    """True iff u - v is an integer multiple of the all-ones vector."""
    if len(u) != len(v):
        raise ParameterError(f"length mismatch: {len(u)} vs {len(v)}")
    diff = u[0] - v[0]
    return all(int(a) - int(b) == diff for a, b in zip(u, v))


def excess_step(x: ExcessState, a: Sequence[int]) -> ExcessState:
    """One arrival slot on the quotient: canonicalize(x + a)."""
    a = tuple(int(b) for b in a)
    if len(a) != x.d:
        raise ParameterError(f"arrival vector has length {len(a)}, state has {x.d}")
    if any(b not in (0, 1) for b in a):
        raise ParameterError(f"arrivals must be bits, got {a}")
    return canonicalize(tuple(xi + ai for xi, ai in zip(x.x, a)))


def to_difference_coords(x: ExcessState) -> int | tuple[int, int]:
    """Difference view of a class for d in {2,3}.

    d=2: x1 - x2 (a lazy simple walk coordinate). d=3: (x1 - x2, x1 - x3), a pair
    of coupled lazy simple walks. Both are invariant under the choice of class
    representative. No such correspondence is defined for d >= 4.
    """
    if x.d == 2:
        return x.x[0] - x.x[1]
    if x.d == 3:
        return (x.x[0] - x.x[1], x.x[0] - x.x[2])
    raise ParameterError(f"difference coordinates are defined for d in {{2,3}}, got d={x.d}")


def from_difference_coords(coords: int | tuple[int, int], d: int) -> ExcessState:
    """Inverse of to_difference_coords; bijective on classes."""
    if d == 2:
        if not isinstance(coords, int):
            raise ParameterError(f"d=2 expects a single integer, got {coords!r}")
        return canonicalize((coords, 0))
    if d == 3:
        try:
            u, v = coords  # type: ignore[misc]
        except TypeError:
            raise ParameterError(f"d=3 expects a pair, got {coords!r}") from None
        return canonicalize((0, -int(u), -int(v)))
    raise ParameterError(f"difference coordinates are defined for d in {{2,3}}, got d={d}")
