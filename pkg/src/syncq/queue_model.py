"""A batch of d synchronized queues in discrete time.

State evolution: q_{t+1} = q_t - 1*m_t*v_t + a_t, where v_t is the joint service
decision (admissible only while every queue is nonempty), m_t a Bernoulli
disturbance that can void the service, and a_t a vector of i.i.d. Bernoulli
arrivals. The state splits into a scalar level along the all-ones diagonal and
an excess vector relative to the shortest queue; only the level is controllable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ConstraintViolation, ParameterError
from .quotient import ExcessState
from .rational import check_probability, parse_rational
from .streams import RandomStream


@dataclass(frozen=True)
class SystemParams:
    """Batch parameters: queue count d, arrival probability p, service success probability m_bar."""

    d: int
    p: Fraction
    m_bar: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ParameterError(f"d must be >= 2, got {self.d}")
        object.__setattr__(self, "p", parse_rational(self.p))
        object.__setattr__(self, "m_bar", parse_rational(self.m_bar))
        check_probability(self.p, "p")
        if not (0 < self.m_bar <= 1):
            raise ParameterError(f"m_bar must be in (0,1], got {self.m_bar}")
        if not (self.p < self.m_bar):
            raise ParameterError(
                f"need p < m_bar for the service to keep up on average, got p={self.p}, m_bar={self.m_bar}"
            )

    @property
    def p_tilde(self) -> Fraction:
        return 1 - self.p

    @classmethod
    def degenerate(cls, d: int, p: Fraction | str | int, m_bar: Fraction | str | int = 1) -> "SystemParams":
        """Test-fixture constructor admitting p in {0,1} and skipping the p < m_bar check.

        Production paths must use the normal constructor.
        """
        obj = object.__new__(cls)
        object.__setattr__(obj, "d", d)
        object.__setattr__(obj, "p", parse_rational(p))
        object.__setattr__(obj, "m_bar", parse_rational(m_bar))
        if d < 2:
            raise ParameterError(f"d must be >= 2, got {d}")
        check_probability(obj.p, "p", open_interval=False)
        if not (0 < obj.m_bar <= 1):
            raise ParameterError(f"m_bar must be in (0,1], got {obj.m_bar}")
        return obj


@dataclass(frozen=True)
class QueueState:
    """Backlogs of the d queues at time slot t."""

    q: tuple[int, ...]
    t: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", tuple(int(v) for v in self.q))
        if len(self.q) < 1:
            raise ParameterError("queue state needs at least one component")
        if any(v < 0 for v in self.q):
            raise ParameterError(f"backlogs must be nonnegative, got {self.q}")
        if self.t < 0:
            raise ParameterError(f"time index must be nonnegative, got {self.t}")

    @property
    def d(self) -> int:
        return len(self.q)


@dataclass(frozen=True)
class ControlDecision:
    """One slot's control: the service bit v and the disturbance sample m."""

    v: int
    m: int = 1

    def __post_init__(self) -> None:
        if self.v not in (0, 1) or self.m not in (0, 1):
            raise ParameterError(f"v and m must be bits, got v={self.v}, m={self.m}")


def greedy_policy(q: QueueState) -> int:
    """Serve whenever possible: v = 1 iff every queue is nonempty."""
    return 1 if min(q.q) >= 1 else 0


def never_serve_policy(q: QueueState) -> int:
    """Always idle; useful as the counterpart in control-independence checks."""
    return 0


def step(q: QueueState, v: int, m: int, a: Sequence[int]) -> QueueState:
    """Advance one slot: q - 1*m*v + a componentwise.

    Raises ConstraintViolation if v = 1 while some queue is empty. A suppressed
    service (v = 1, m = 0) leaves the queues untouched; nothing is reserved.
    """
    if v not in (0, 1) or m not in (0, 1):
        raise ParameterError(f"v and m must be bits, got v={v}, m={m}")
    a = tuple(int(x) for x in a)
    if len(a) != q.d:
        raise ParameterError(f"arrival vector has length {len(a)}, state has {q.d}")
    if any(x not in (0, 1) for x in a):
        raise ParameterError(f"arrivals must be bits, got {a}")
    if v == 1 and min(q.q) < 1:
        raise ConstraintViolation(f"joint service needs every queue nonempty, state is {q.q}")
    dec = m * v
    return QueueState(tuple(qi - dec + ai for qi, ai in zip(q.q, a)), q.t + 1)


def sample_arrivals(params: SystemParams, rng: RandomStream) -> tuple[int, ...]:
    """Draw one slot's arrival vector: d i.i.d. Bernoulli(p) bits, p exact."""
    return tuple(int(b) for b in rng.bernoulli_bits(params.p, params.d))


def decompose(q: QueueState) -> tuple[int, ExcessState]:
    """Split q into its level along the diagonal and the excess over the shortest queue.

    The level is min(q) (the "div by all-ones" quotient) and the excess is
    q - 1*min(q), the canonical class representative. recompose inverts this exactly.
    """
    level = min(q.q)
    return level, ExcessState(tuple(qi - level for qi in q.q))


def recompose(q_par: int, q_perp: ExcessState, t: int = 0) -> QueueState:
    """Rebuild the queue state 1*q_par + q_perp from its two components."""
    if q_par < 0:
        raise ParameterError(f"level must be nonnegative, got {q_par}")
    return QueueState(tuple(q_par + xi for xi in q_perp.x), t)
