"""Shared oracles for the test suite.

These deliberately avoid the library's own series code paths: the brute-force
oracles enumerate arrival sequences directly, and the closed form for two
queues at p = 1/2 comes straight from a central binomial coefficient.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest

from syncq import canonicalize, excess_step


def brute_force_return_probability(n: int, d: int, p: Fraction) -> Fraction:
    """Exact n-step return probability by enumerating per-queue arrival bit-sequences.

    Every queue independently runs one of the 2^n arrival sequences; a joint
    sequence is a return iff all queues accumulated the same number of arrivals.
    Matching joint sequences are visited one by one and weighted by their exact
    path probability.
    """
    q = 1 - p
    weights: list[Fraction] = []
    by_count: list[list[int]] = [[] for _ in range(n + 1)]
    for s in range(2**n):
        ones = bin(s).count("1")
        by_count[ones].append(s)
        weights.append(p**ones * q ** (n - ones))
    total = Fraction(0)
    for ones in range(n + 1):
        for combo in itertools.product(by_count[ones], repeat=d):
            w = Fraction(1)
            for s in combo:
                w *= weights[s]
            total += w
    return total


def return_probability_by_dynamics(n: int, d: int, p: Fraction) -> Fraction:
    """Exact n-step return probability by walking every (2^d)^n path through excess_step.

    Also asserts, per path, that landing back in the start class coincides with
    all queues having received equal increment counts.
    """
    q = 1 - p
    outcomes = list(itertools.product((0, 1), repeat=d))
    start = canonicalize((0,) * d)
    total = Fraction(0)
    for path in itertools.product(outcomes, repeat=n):
        state = start
        for a in path:
            state = excess_step(state, a)
        sums = [sum(step_[i] for step_ in path) for i in range(d)]
        returned = state == start
        assert returned == (len(set(sums)) <= 1), (path, state, sums)
        if returned:
            ones = sum(sums)
            total += p**ones * q ** (n * d - ones)
    return total


def closed_form_r2(n: int) -> Fraction:
    """Independent oracle for two queues at p = 1/2: central binomial over 4^n."""
    return Fraction(math.comb(2 * n, n), 4**n)


@pytest.fixture(scope="session")
def acceptance_log() -> list[str]:
    return []
