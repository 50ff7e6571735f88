"""Seeded stochastic simulation of the queue batch and its excess walk.

All sampling flows through counter-based streams (see streams.py), so every
result is bit-reproducible from (seed, parameters) and partial results merge
deterministically regardless of worker count or scheduling. Return-probability
estimation defaults to independent restarts per horizon n, which keeps the
per-n estimates uncorrelated; a cheaper correlated mode reads all horizons off
one trajectory per trial.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ConstraintViolation, ParameterError, WorkLimitExceeded
from .queue_model import QueueState, SystemParams, decompose, greedy_policy, never_serve_policy
from .rational import check_probability, parse_rational
from .streams import BLOCK_TRIALS, RandomStream, TAG_RETURN, TAG_SIMULATE, TAG_VISITS, pack_index

DEFAULT_SAMPLE_LIMIT = 2_000_000_000  # Bernoulli draws per operation

POLICIES: dict[str, Callable[[QueueState], int]] = {
    "greedy": greedy_policy,
    "never": never_serve_policy,
}


def _check_sampling_work(draws: int, limit: int | None) -> None:
    cap = DEFAULT_SAMPLE_LIMIT if limit is None else limit
    if draws > cap:
        raise WorkLimitExceeded(
            f"operation would draw about {draws} Bernoulli samples (limit {cap})",
            estimated_work=draws,
            limit=cap,
        )


@dataclass(frozen=True)
class ReturnEstimate:
    """Monte Carlo estimate of one n-step return probability."""

    n: int
    returns: int
    trials: int
    estimate: float
    std_error: float  # binomial standard error sqrt(p(1-p)/trials)


@dataclass
class ReturnEstimateReport:
    d: int
    p: Fraction
    n_max: int
    trials: int
    seed: int
    mode: str  # "restarts" (independent per n) or "trajectory" (correlated)
    rows: list[ReturnEstimate]


def _blocks(trials: int) -> list[tuple[int, int]]:
    """(block index, block size) pairs covering `trials` in BLOCK_TRIALS chunks."""
    out = []
    blk = 0
    left = trials
    while left > 0:
        size = min(BLOCK_TRIALS, left)
        out.append((blk, size))
        blk += 1
        left -= size
    return out


def _returns_in_block(seed: int, n: int, block: int, size: int, d: int, p: Fraction) -> int:
    if n == 0:
        return size  # a zero-step walk is already home
    stream = RandomStream(seed, pack_index(TAG_RETURN, n, block))
    bits = stream.bernoulli_bits(p, (size, n, d))
    sums = bits.sum(axis=1, dtype=np.int64)
    return int((sums == sums[:, :1]).all(axis=1).sum())


def _trajectory_block(seed: int, n_max: int, block: int, size: int, d: int, p: Fraction) -> np.ndarray:
    """Per-n return counts along one trajectory per trial (correlated across n)."""
    counts = np.zeros(n_max + 1, dtype=np.int64)
    counts[0] = size
    if n_max == 0:
        return counts
    stream = RandomStream(seed, pack_index(TAG_RETURN, 0, block))
    bits = stream.bernoulli_bits(p, (size, n_max, d))
    cum = bits.cumsum(axis=1, dtype=np.int64)
    home = (cum == cum[:, :, :1]).all(axis=2)  # (size, n_max)
    counts[1:] = home.sum(axis=0)
    return counts


def estimate_rd(
    n_max: int,
    d: int,
    p: Fraction | str,
    trials: int,
    seed: int,
    mode: str = "restarts",
    workers: int = 1,
    sample_limit: int | None = None,
) -> ReturnEstimateReport:
    """Estimate the n-step return probability of the excess walk for every n <= n_max.

    A trajectory counts as returned when every queue accumulated the same number
    of arrivals over its n slots, which is exactly the event that the walk is
    back in its starting class.
    """
    p = check_probability(parse_rational(p), "p")
    if n_max < 0:
        raise ParameterError(f"n_max must be >= 0, got {n_max}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if mode not in ("restarts", "trajectory"):
        raise ParameterError(f"mode must be 'restarts' or 'trajectory', got {mode!r}")

    blocks = _blocks(trials)
    if mode == "restarts":
        _check_sampling_work(trials * d * n_max * (n_max + 1) // 2, sample_limit)
        jobs = [(n, blk, size) for n in range(n_max + 1) for blk, size in blocks]

        def run(job: tuple[int, int, int]) -> tuple[int, int]:
            n, blk, size = job
            return n, _returns_in_block(seed, n, blk, size, d, p)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, jobs))
        else:
            results = [run(j) for j in jobs]
        counts = [0] * (n_max + 1)
        for n, c in results:
            counts[n] += c
    else:
        _check_sampling_work(trials * d * n_max, sample_limit)

        def run_traj(job: tuple[int, int]) -> np.ndarray:
            blk, size = job
            return _trajectory_block(seed, n_max, blk, size, d, p)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run_traj, blocks))
        else:
            parts = [run_traj(j) for j in blocks]
        counts = list(int(v) for v in np.sum(parts, axis=0))

    rows = []
    for n in range(n_max + 1):
        est = counts[n] / trials
        rows.append(
            ReturnEstimate(
                n=n,
                returns=counts[n],
                trials=trials,
                estimate=est,
                std_error=math.sqrt(est * (1 - est) / trials),
            )
        )
    return ReturnEstimateReport(d=d, p=p, n_max=n_max, trials=trials, seed=seed, mode=mode, rows=rows)


@dataclass
class VisitGrowthReport:
    """Origin-class visit counts at horizons T and 2T, a recurrence diagnostic.

    The ratio grows like sqrt(2) for a recurrent one-dimensional-like walk and
    saturates near 1 when the walk is transient.
    """

    d: int
    p: Fraction
    horizon: int
    trials: int
    seed: int
    visits_horizon: list[int]  # per trial, visits during t in [1, T]
    visits_double: list[int]  # per trial, visits during t in [1, 2T]
    mean_visits_horizon: float
    mean_visits_double: float
    growth_ratio: float


def _visits_for_trial(seed: int, trial: int, horizon: int, d: int, p: Fraction) -> tuple[int, int]:
    stream = RandomStream(seed, pack_index(TAG_VISITS, trial, 0))
    bits = stream.bernoulli_bits(p, (2 * horizon, d))
    cum = bits.cumsum(axis=0, dtype=np.int64)
    home = (cum == cum[:, :1]).all(axis=1)
    return int(home[:horizon].sum()), int(home.sum())


def visit_growth(
    d: int,
    p: Fraction | str,
    horizon: int,
    trials: int,
    seed: int,
    workers: int = 1,
    sample_limit: int | None = None,
) -> VisitGrowthReport:
    """Average origin-class visits of the excess walk up to T and up to 2T."""
    p = check_probability(parse_rational(p), "p")
    if horizon < 2:
        raise ParameterError(f"horizon must be >= 2, got {horizon}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    _check_sampling_work(2 * horizon * d * trials, sample_limit)

    ids = list(range(trials))
    run = lambda t: _visits_for_trial(seed, t, horizon, d, p)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(run, ids))
    else:
        pairs = [run(t) for t in ids]
    v1 = [a for a, _ in pairs]
    v2 = [b for _, b in pairs]
    m1 = sum(v1) / trials
    m2 = sum(v2) / trials
    return VisitGrowthReport(
        d=d,
        p=p,
        horizon=horizon,
        trials=trials,
        seed=seed,
        visits_horizon=v1,
        visits_double=v2,
        mean_visits_horizon=m1,
        mean_visits_double=m2,
        growth_ratio=(m2 / m1) if m1 > 0 else math.inf,
    )


@dataclass
class TrajectoryStats:
    """Summary of one simulated queue trajectory plus its decomposition statistics."""

    d: int
    p: Fraction
    m_bar: Fraction
    horizon: int
    seed: int
    policy: str
    q0: tuple[int, ...]
    final_q: tuple[int, ...]
    services_attempted: int
    services_successful: int
    origin_visits: int  # slots t >= 1 where the excess class equals its starting class
    return_times: list[int]
    max_backlog: int
    mean_min_queue: float  # time average of min(q_t), all T+1 states
    mean_qpar: float  # time average of the diagonal level from decompose()
    excess_digest: str  # sha256 over the little-endian int64 excess path
    excess_path: np.ndarray | None = None  # (T+1, d) canonical excess states, on request


def simulate_queue(
    params: SystemParams,
    policy: str | Callable[[QueueState], int] = "greedy",
    horizon: int = 1000,
    seed: int = 0,
    q0: Sequence[int] | None = None,
    record_excess: bool = False,
    sample_limit: int | None = None,
) -> TrajectoryStats:
    """Run the batch for `horizon` slots under a policy, tracking backlog and excess.

    Arrivals and disturbances are drawn up front from two fixed substreams of the
    seed, so runs with different policies but the same seed see identical input
    randomness (which makes excess paths comparable across policies).
    """
    if horizon < 1:
        raise ParameterError(f"horizon must be >= 1, got {horizon}")
    _check_sampling_work(horizon * (params.d + 1), sample_limit)
    if isinstance(policy, str):
        try:
            policy_fn = POLICIES[policy]
        except KeyError:
            raise ParameterError(f"unknown policy {policy!r}; choose from {sorted(POLICIES)}") from None
        policy_name = policy
    else:
        policy_fn = policy
        policy_name = getattr(policy, "__name__", "custom")

    d = params.d
    q = [0] * d if q0 is None else [int(v) for v in q0]
    if len(q) != d or any(v < 0 for v in q):
        raise ParameterError(f"q0 must be {d} nonnegative integers, got {q0}")

    arrivals = RandomStream(seed, pack_index(TAG_SIMULATE, 0, 0)).bernoulli_bits(params.p, (horizon, d))
    disturb = RandomStream(seed, pack_index(TAG_SIMULATE, 1, 0)).bernoulli_bits(params.m_bar, horizon)
    arrival_rows: list[list[int]] = arrivals.tolist()
    disturb_bits: list[int] = disturb.tolist()

    fast_greedy = policy_fn is greedy_policy
    fast_never = policy_fn is never_serve_policy

    mn = min(q)
    start_class = tuple(v - mn for v in q)
    path = [tuple(v - mn for v in q)]
    max_backlog = max(q)
    sum_min = mn
    sum_qpar = decompose(QueueState(tuple(q), 0))[0]
    attempted = 0
    successful = 0
    return_times: list[int] = []

    for t in range(horizon):
        mn = min(q)
        if fast_greedy:
            v = 1 if mn >= 1 else 0
        elif fast_never:
            v = 0
        else:
            v = policy_fn(QueueState(tuple(q), t))
            if v not in (0, 1):
                raise ParameterError(f"policy returned {v!r}, expected a bit")
            if v == 1 and mn < 1:
                raise ConstraintViolation(f"policy served at t={t} with an empty queue: {tuple(q)}")
        m = disturb_bits[t]
        dec = m * v
        attempted += v
        successful += dec
        row = arrival_rows[t]
        for i in range(d):
            q[i] = q[i] - dec + row[i]
        mn = min(q)
        excess = tuple(v_ - mn for v_ in q)
        path.append(excess)
        if excess == start_class:
            return_times.append(t + 1)
        if max(q) > max_backlog:
            max_backlog = max(q)
        sum_min += mn
        sum_qpar += decompose(QueueState(tuple(q), t + 1))[0]

    path_arr = np.asarray(path, dtype="<i8")
    digest = hashlib.sha256(path_arr.tobytes()).hexdigest()
    return TrajectoryStats(
        d=d,
        p=params.p,
        m_bar=params.m_bar,
        horizon=horizon,
        seed=seed,
        policy=policy_name,
        q0=tuple(int(v) for v in (q0 if q0 is not None else [0] * d)),
        final_q=tuple(q),
        services_attempted=attempted,
        services_successful=successful,
        origin_visits=len(return_times),
        return_times=return_times,
        max_backlog=max_backlog,
        mean_min_queue=sum_min / (horizon + 1),
        mean_qpar=sum_qpar / (horizon + 1),
        excess_digest=digest,
        excess_path=path_arr if record_excess else None,
    )
