"""Return-probability series of the excess walk, in exact and log-domain arithmetic.

The n-step return probability of the excess walk is a power sum over
Bernoulli-weighted binomial terms,

    r(n) = sum_k [ C(n,k) p^k (1-p)^(n-k) ]^d ,

whose partial sums decide transience. The exact backend keeps every term as an
integer numerator over a common denominator b^(dn) (p = a/b) built from the
multiplicative row recurrence, so results are exact rationals. The log backend
evaluates terms through the log-gamma function and sums with a max shift, which
keeps n up to about 10^6 in reach. Alongside the series itself this module
carries the row diagnostics used by the convergence arguments: the peak term
and its Stirling-style bound, the harmonic lower bound for d=2, the power-sum
inequalities, the symmetry/convexity probes in p, and the central-limit
approximation of the row sum.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError, WorkLimitExceeded
from .rational import check_probability, parse_rational

Backend = Literal["exact", "log"]

# work guards: number of series terms sum_{n<=n_max}(n+1) a backend may evaluate
EXACT_TERM_LIMIT = 600_000
LOG_TERM_LIMIT = 50_000_000

# classification dead band for the tail log-log slope
SLOPE_DEAD_BAND = (-1.05, -0.95)

_table_lock = threading.Lock()
_log_fact = np.zeros(1)  # _log_fact[i] = ln(i!)


def _log_factorials(n: int) -> np.ndarray:
    """Cached table of ln(i!) for i <= n (grown geometrically, thread safe)."""
    global _log_fact
    if len(_log_fact) <= n:
        with _table_lock:
            if len(_log_fact) <= n:
                size = max(n + 1, 2 * len(_log_fact), 1024)
                _log_fact = gammaln(np.arange(size, dtype=np.float64) + 1.0)
    return _log_fact


def _validate(n: int, d: int, p: Fraction) -> Fraction:
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    return check_probability(parse_rational(p), "p")


def term_numerators(n: int, p: Fraction) -> tuple[list[int], int]:
    """Row of integer numerators N_k with P(n,k) = N_k / b^n, via the row recurrence.

    N_k = C(n,k) a^k (b-a)^(n-k) for p = a/b; the binomial factor advances by
    C(n,k+1) = C(n,k)(n-k)/(k+1), which divides exactly.
    """
    a, b = p.numerator, p.denominator
    c = b - a
    binom = 1
    a_pow = 1
    c_pow = c**n
    nums = []
    for k in range(n + 1):
        nums.append(binom * a_pow * c_pow)
        binom = binom * (n - k) // (k + 1)
        a_pow *= a
        c_pow //= c
    return nums, b**n


def term(n: int, k: int, d: int, p: Fraction | str) -> Fraction:
    """Exact probability that every queue sees exactly k arrivals in n slots: [C(n,k) p^k (1-p)^(n-k)]^d."""
    p = _validate(n, d, p)
    if not (0 <= k <= n):
        raise ParameterError(f"k must be in [0, n], got k={k}, n={n}")
    a, b = p.numerator, p.denominator
    one_dim = Fraction(math.comb(n, k) * a**k * (b - a) ** (n - k), b**n)
    return one_dim**d


def rd_exact(n: int, d: int, p: Fraction | str) -> Fraction:
    """Exact n-step return probability: sum of the d-th powers of the row terms."""
    p = _validate(n, d, p)
    nums, denom = term_numerators(n, p)
    return Fraction(sum(v**d for v in nums), denom**d)


def rd_log(n: int, d: int, p: Fraction | str) -> float:
    """Log-domain n-step return probability (natural log, 0.0 means certainty)."""
    p = _validate(n, d, p)
    if n == 0:
        return 0.0
    lf = _log_factorials(n)
    k = np.arange(n + 1)
    log_p = math.log(p.numerator) - math.log(p.denominator)
    log_q = math.log(p.denominator - p.numerator) - math.log(p.denominator)
    terms = d * (lf[n] - lf[k] - lf[n - k] + k * log_p + (n - k) * log_q)
    shift = terms.max()
    return float(shift + math.log(np.exp(terms - shift).sum()))


def rd(n: int, d: int, p: Fraction | str, backend: Backend = "exact") -> Fraction | float:
    """n-step return probability; exact backend yields a Fraction, log backend a log-domain float."""
    if backend == "exact":
        return rd_exact(n, d, p)
    if backend == "log":
        return rd_log(n, d, p)
    raise ParameterError(f"unknown backend {backend!r}")


def row_normalization(n: int, p: Fraction | str) -> Fraction:
    """Sum of one row's d=1 terms; equals 1 exactly for every n and p."""
    p = _validate(n, 1, p)
    nums, denom = term_numerators(n, p)
    return Fraction(sum(nums), denom)


@dataclass
class SeriesReport:
    """Per-n return probabilities, running partial sums and a tail slope diagnostic."""

    d: int
    p: Fraction
    n_max: int
    backend: Backend
    values: list[Fraction] | list[float]  # r(n) for n = 0..n_max (floats for log backend)
    log_values: list[float] | None  # log backend only: the raw log-domain values
    partial_sums: list[Fraction] | list[float]
    slope: float | None  # least-squares slope of log r vs log n on the tail window
    slope_window: tuple[int, int] | None
    slope_residual: float | None
    classification: str  # diverging-like | converging-like | inconclusive

    def rows(self) -> list[dict]:
        out = []
        for n in range(self.n_max + 1):
            r = self.values[n]
            s = self.partial_sums[n]
            row: dict = {
                "n": n,
                "r": float(r),
                "inv_r": float(1 / r) if self.backend == "exact" else math.exp(-self.log_values[n]),
                "partial_sum": float(s),
            }
            if self.backend == "exact":
                row["r_exact"] = str(r)
                row["inv_r_exact"] = str(1 / r) if r else None
                row["partial_sum_exact"] = str(s)
            out.append(row)
        return out


def _fit_tail_slope(ns: np.ndarray, log_r: np.ndarray) -> tuple[float, float]:
    design = np.vstack([np.log(ns), np.ones(len(ns))]).T
    coef, *_ = np.linalg.lstsq(design, log_r, rcond=None)
    resid = log_r - design @ coef
    return float(coef[0]), float(math.sqrt(np.mean(resid**2)))


def classify_slope(slope: float | None) -> str:
    if slope is None:
        return "inconclusive"
    lo, hi = SLOPE_DEAD_BAND
    if slope >= hi:
        return "diverging-like"
    if slope <= lo:
        return "converging-like"
    return "inconclusive"


def partial_sum(
    n_max: int,
    d: int,
    p: Fraction | str,
    backend: Backend = "exact",
    workers: int = 1,
    work_limit: int | None = None,
) -> SeriesReport:
    """Evaluate r(n) for n = 0..n_max with running sums and the tail log-log slope.

    The slope is fit over the upper half of the range, [n_max//2, n_max] (n >= 1),
    and classified with a dead band around -1 where the dichotomy is undecidable
    at finite n.
    """
    p = _validate(n_max, d, p)
    terms = (n_max + 1) * (n_max + 2) // 2
    limit = work_limit if work_limit is not None else (EXACT_TERM_LIMIT if backend == "exact" else LOG_TERM_LIMIT)
    if terms > limit:
        raise WorkLimitExceeded(
            f"{backend} backend would evaluate {terms} series terms (limit {limit}); "
            f"lower n_max or raise the work limit",
            estimated_work=terms,
            limit=limit,
        )

    ns = range(n_max + 1)
    if backend == "exact":
        evaluate = lambda n: rd_exact(n, d, p)  # noqa: E731
    elif backend == "log":
        _log_factorials(n_max)  # build the shared table once, outside the pool
        evaluate = lambda n: rd_log(n, d, p)  # noqa: E731
    else:
        raise ParameterError(f"unknown backend {backend!r}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(evaluate, ns))  # keyed by n through ordering
    else:
        values = [evaluate(n) for n in ns]

    if backend == "exact":
        sums: list[Fraction] = []
        acc = Fraction(0)
        for v in values:
            acc += v
            sums.append(acc)
        report_values: list = values
        log_values = None
        float_log = [math.log(float(v)) for v in values]
    else:
        log_values = [float(v) for v in values]
        report_values = [math.exp(v) for v in log_values]
        sums_f: list[float] = []
        acc_f = 0.0
        for v in report_values:
            acc_f += v
            sums_f.append(acc_f)
        sums = sums_f
        float_log = log_values

    lo = max(1, n_max // 2)
    tail = np.arange(lo, n_max + 1)
    if len(tail) >= 2 and n_max >= 2:
        slope, resid = _fit_tail_slope(tail.astype(float), np.array(float_log[lo:]))
        window = (lo, n_max)
    else:
        slope, resid, window = None, None, None

    return SeriesReport(
        d=d,
        p=p,
        n_max=n_max,
        backend=backend,
        values=report_values,
        log_values=log_values,
        partial_sums=sums,
        slope=slope,
        slope_window=window,
        slope_residual=resid,
        classification=classify_slope(slope),
    )


@dataclass(frozen=True)
class PeakInfo:
    """Largest term of a row, its location, and the Stirling-style cap on it."""

    n: int
    p: Fraction
    eps: float
    k_hat: int
    interval: tuple[Fraction, Fraction]  # [np - (1-p), np + p]
    peak: Fraction  # exact P(n, k_hat)
    stirling_bound: float  # (e^2 + eps) / (2 pi sqrt(n p (1-p)))
    in_interval: bool
    below_bound: bool


def _argmax_k(n: int, p: Fraction) -> int:
    """Leftmost maximizer of C(n,k) p^k (1-p)^(n-k), by scanning the exact term ratio.

    The ratio P(n,k)/P(n,k+1) = ((k+1)(b-a)) / ((n-k) a) first reaches >= 1 at the
    peak; only word-size integers are compared.
    """
    a, b = p.numerator, p.denominator
    c = b - a
    for k in range(n):
        if (k + 1) * c >= (n - k) * a:
            return k
    return n


def stirling_bound_value(n: int, p: Fraction, eps: float) -> float:
    pf = float(p)
    return (math.e**2 + eps) / (2 * math.pi * math.sqrt(n * pf * (1 - pf)))


def peak_info(n: int, p: Fraction | str, eps: float = 0.01) -> PeakInfo:
    """Locate the row peak exactly and compare it against the Stirling-style bound."""
    p = _validate(n, 1, p)
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if eps <= 0:
        raise ParameterError(f"eps must be > 0, got {eps}")
    k_hat = _argmax_k(n, p)
    peak = term(n, k_hat, 1, p)
    lo = n * p - (1 - p)
    hi = n * p + p
    bound = stirling_bound_value(n, p, eps)
    return PeakInfo(
        n=n,
        p=p,
        eps=eps,
        k_hat=k_hat,
        interval=(lo, hi),
        peak=peak,
        stirling_bound=bound,
        in_interval=(lo <= k_hat <= hi),
        below_bound=(float(peak) <= bound),
    )


@dataclass(frozen=True)
class StirlingScanReport:
    """Forward scan for the smallest n past which the peak bound always holds."""

    p: Fraction
    eps: float
    horizon: int
    first_n: int  # first n such that the bound holds for every scanned n' >= n
    recommended_n: int  # 2x safety margin on first_n
    holds_from_recommended: bool
    peaks_in_interval: bool  # every realized argmax landed in [np-(1-p), np+p]


def _log_peak(n: int, k: int, p: Fraction) -> float:
    lf = _log_factorials(n)
    log_p = math.log(p.numerator) - math.log(p.denominator)
    log_q = math.log(p.denominator - p.numerator) - math.log(p.denominator)
    return float(lf[n] - lf[k] - lf[n - k] + k * log_p + (n - k) * log_q)


def stirling_scan(horizon: int, p: Fraction | str, eps: float = 0.01) -> StirlingScanReport:
    """Scan n = 1..horizon and report from where the peak bound holds, with a 2x margin.

    Peak positions come from the closed form of the ratio test, k = ceil((na - c)/b),
    verified exactly against both neighbors; peak values go through the log-gamma
    path (the bound exceeds the peak by a factor near e^2/sqrt(2 pi), so double
    precision is far more than enough).
    """
    p = _validate(horizon, 1, p)
    if horizon < 1:
        raise ParameterError(f"horizon must be >= 1, got {horizon}")
    a, b = p.numerator, p.denominator
    c = b - a
    _log_factorials(horizon)
    first_n: int | None = None
    peaks_ok = True
    for n in range(1, horizon + 1):
        k_hat = max(0, min(n, -((-(n * a - c)) // b)))  # ceil((na-c)/b) clamped
        # exact neighbor checks: peak >= right neighbor and > nothing to its left
        if k_hat < n and (k_hat + 1) * c < (n - k_hat) * a:
            raise AssertionError(f"argmax formula failed right check at n={n}")
        if k_hat > 0 and k_hat * c > (n - k_hat + 1) * a:
            raise AssertionError(f"argmax formula failed left check at n={n}")
        in_lo = b * k_hat >= n * a - c
        in_hi = b * k_hat <= n * a + a
        peaks_ok = peaks_ok and in_lo and in_hi
        holds = math.exp(_log_peak(n, k_hat, p)) <= stirling_bound_value(n, p, eps)
        if holds:
            if first_n is None:
                first_n = n
        else:
            first_n = None
    if first_n is None:
        raise ParameterError(f"bound never settled below the peak up to horizon {horizon}")
    recommended = 2 * first_n
    return StirlingScanReport(
        p=p,
        eps=eps,
        horizon=horizon,
        first_n=first_n,
        recommended_n=recommended,
        holds_from_recommended=recommended <= horizon,
        peaks_in_interval=peaks_ok,
    )


@dataclass(frozen=True)
class HarmonicBoundReport:
    """Exact harmonic lower bound for the d=2 series and its per-row verification."""

    n_max: int
    harmonic_sum: Fraction  # sum_{n<=n_max} 1/(n+1)
    checked_ps: tuple[Fraction, ...]
    per_row_ok: bool  # r(n; 2, p) >= 1/(n+1) for every n and every checked p
    min_margin: Fraction  # smallest r(n) - 1/(n+1) seen
    series_sums: dict[Fraction, Fraction]  # exact sum_{n<=n_max} r(n; 2, p) per checked p


def d2_lower_bound(n_max: int, extra_ps: Sequence[Fraction | str] = ()) -> HarmonicBoundReport:
    """Harmonic partial sum bounding the d=2 series from below, verified row by row.

    Each d=1 row sums to one over n+1 terms, so its squared row sums to at least
    1/(n+1); the claim is checked exactly at p = 1/2 and any extra p supplied.
    """
    if n_max < 0:
        raise ParameterError(f"n_max must be >= 0, got {n_max}")
    ps = (Fraction(1, 2),) + tuple(check_probability(parse_rational(q)) for q in extra_ps)
    harmonic = sum((Fraction(1, n + 1) for n in range(n_max + 1)), Fraction(0))
    ok = True
    min_margin: Fraction | None = None
    sums: dict[Fraction, Fraction] = {}
    for p in ps:
        total = Fraction(0)
        for n in range(n_max + 1):
            r = rd_exact(n, 2, p)
            total += r
            margin = r - Fraction(1, n + 1)
            ok = ok and margin >= 0
            if min_margin is None or margin < min_margin:
                min_margin = margin
        sums[p] = total
    return HarmonicBoundReport(
        n_max=n_max,
        harmonic_sum=harmonic,
        checked_ps=ps,
        per_row_ok=ok,
        min_margin=min_margin if min_margin is not None else Fraction(0),
        series_sums=sums,
    )


def clt_approx(n: int, d: int) -> float:
    """Central-limit approximation of r(n) at p = 1/2: (1/sqrt(d)) (2/(pi n))^((d-1)/2).

    Diagnostic only; its error is O(1/sqrt(n)) per term, too coarse for any
    convergence claim but a useful sanity check at large n.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    return (1 / math.sqrt(d)) * (2 / (math.pi * n)) ** ((d - 1) / 2)


@dataclass(frozen=True)
class SymmetryConvexityReport:
    """Exact p <-> 1-p symmetry of r(n) and its curvature at the symmetric point."""

    n: int
    d: int
    p: Fraction
    h: Fraction
    symmetric: bool  # r(n; p) == r(n; 1-p), exact
    first_difference: Fraction  # r(1/2 + h) - r(1/2 - h), exact
    second_difference: Fraction  # r(1/2 + h) - 2 r(1/2) + r(1/2 - h), exact
    first_difference_zero: bool
    second_difference_positive: bool
    degenerate: bool  # n == 0: r is identically 1, both differences vanish


def symmetry_and_convexity_check(
    n: int, d: int, p: Fraction | str, h: Fraction | str
) -> SymmetryConvexityReport:
    """Verify r(n; p) = r(n; 1-p) exactly and probe convexity at p = 1/2 with step h."""
    p = _validate(n, d, p)
    h = parse_rational(h)
    if not (0 < p - h and p + h < 1):
        raise ParameterError(f"need 0 < p - h and p + h < 1, got p={p}, h={h}")
    if not (0 < h < Fraction(1, 2)):
        raise ParameterError(f"h must be in (0, 1/2), got {h}")
    half = Fraction(1, 2)
    symmetric = rd_exact(n, d, p) == rd_exact(n, d, 1 - p)
    plus = rd_exact(n, d, half + h)
    minus = rd_exact(n, d, half - h)
    center = rd_exact(n, d, half)
    first = plus - minus
    second = plus - 2 * center + minus
    degenerate = n == 0
    return SymmetryConvexityReport(
        n=n,
        d=d,
        p=p,
        h=h,
        symmetric=symmetric,
        first_difference=first,
        second_difference=second,
        first_difference_zero=(first == 0),
        second_difference_positive=(second > 0) if not degenerate else False,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class PowerSumReport:
    """The two power-sum inequalities behind the convergence bounds, checked exactly."""

    size: int
    d: int
    power_sum: Fraction  # sum x_i^d
    peak_power: Fraction  # max(x)^(d-1)
    power_ok: bool  # sum x_i^d <= max(x)^(d-1)
    square_sum: Fraction  # sum x_i^2
    mean_square_floor: Fraction  # size * mean^2 = 1/size for a normalized vector
    square_ok: bool  # sum x_i^2 >= size * mean^2


def power_sum_check(x: Sequence[Fraction | str | int], d: int) -> PowerSumReport:
    """Check sum x^d <= max(x)^(d-1) (d >= 4) and sum x^2 >= n mean^2 on a stochastic vector."""
    if d < 4:
        raise ParameterError(f"the power-sum inequality is stated for d >= 4, got {d}")
    xs = [parse_rational(v) for v in x]
    if not xs:
        raise ParameterError("empty vector")
    if any(v < 0 for v in xs):
        raise ParameterError("components must be nonnegative")
    total = sum(xs)
    if total != 1:
        raise ParameterError(f"vector must sum to 1 exactly, got {total}")
    n = len(xs)
    x_hat = max(xs)
    power_sum = sum(v**d for v in xs)
    peak_power = x_hat ** (d - 1)
    square_sum = sum(v**2 for v in xs)
    mean = Fraction(1, n)
    floor_ = n * mean**2
    return PowerSumReport(
        size=n,
        d=d,
        power_sum=power_sum,
        peak_power=peak_power,
        power_ok=power_sum <= peak_power,
        square_sum=square_sum,
        mean_square_floor=floor_,
        square_ok=square_sum >= floor_,
    )
