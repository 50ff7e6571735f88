"""syncq: synchronized-queue batches and their quotient-space excess walk.

Core pieces: the discrete-time queue model and its diagonal/excess
decomposition, the excess walk on integer vectors modulo the all-ones
direction, exact and log-domain return-probability series with the row
diagnostics behind the convergence arguments, a Lyapunov drift certificate for
the three-queue symmetric case, and seeded Monte Carlo cross-checks. A FastAPI
service exposes every analysis; the CLI is a thin client over it.
"""

__version__ = "0.1.0"

from .errors import ConstraintViolation, ParameterError, WorkLimitExceeded
from .quotient import (
    ExcessState,
    canonicalize,
    equivalent,
    excess_step,
    from_difference_coords,
    to_difference_coords,
)
from .queue_model import (
    ControlDecision,
    QueueState,
    SystemParams,
    decompose,
    greedy_policy,
    never_serve_policy,
    recompose,
    sample_arrivals,
    step,
)
from .rational import parse_rational
from .series import (
    HarmonicBoundReport,
    PeakInfo,
    PowerSumReport,
    SeriesReport,
    StirlingScanReport,
    SymmetryConvexityReport,
    clt_approx,
    d2_lower_bound,
    power_sum_check,
    partial_sum,
    peak_info,
    rd,
    rd_exact,
    rd_log,
    row_normalization,
    stirling_scan,
    symmetry_and_convexity_check,
    term,
)
from .drift import (
    DriftReport,
    delta_f,
    drift_scan,
    hex_angle,
    hex_radius,
    lyapunov,
    polar_delta_f,
    polar_drift,
    polar_drift_bound,
    rho,
    sublevel_count,
)
from .montecarlo import (
    ReturnEstimate,
    ReturnEstimateReport,
    TrajectoryStats,
    VisitGrowthReport,
    estimate_rd,
    simulate_queue,
    visit_growth,
)
from .streams import BLOCK_TRIALS, RandomStream

__all__ = [
    "BLOCK_TRIALS",
    "ConstraintViolation",
    "ControlDecision",
    "DriftReport",
    "ExcessState",
    "HarmonicBoundReport",
    "ParameterError",
    "PeakInfo",
    "PowerSumReport",
    "QueueState",
    "RandomStream",
    "ReturnEstimate",
    "ReturnEstimateReport",
    "SeriesReport",
    "StirlingScanReport",
    "SymmetryConvexityReport",
    "SystemParams",
    "TrajectoryStats",
    "VisitGrowthReport",
    "WorkLimitExceeded",
    "canonicalize",
    "clt_approx",
    "d2_lower_bound",
    "decompose",
    "delta_f",
    "drift_scan",
    "equivalent",
    "estimate_rd",
    "excess_step",
    "from_difference_coords",
    "greedy_policy",
    "hex_angle",
    "hex_radius",
    "power_sum_check",
    "lyapunov",
    "never_serve_policy",
    "parse_rational",
    "partial_sum",
    "peak_info",
    "polar_delta_f",
    "polar_drift",
    "polar_drift_bound",
    "rd",
    "rd_exact",
    "rd_log",
    "recompose",
    "rho",
    "row_normalization",
    "sample_arrivals",
    "simulate_queue",
    "step",
    "stirling_scan",
    "sublevel_count",
    "symmetry_and_convexity_check",
    "term",
    "to_difference_coords",
    "visit_growth",
]
