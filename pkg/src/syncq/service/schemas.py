"""Request and response models for the compute service.

Probabilities travel as strings ("1/2", "0.25") so exactness survives the wire;
every response echoes its validated request plus the tool version, and carries
the timestamp in its own top-level field so file outputs stay byte-comparable.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class SeriesRequest(BaseModel):
    d: int = Field(ge=1, le=64)
    p: str = "1/2"
    n_max: int = Field(ge=0)
    backend: Literal["exact", "log"] = "exact"
    workers: int = Field(default=1, ge=1, le=64)
    work_limit: int | None = Field(default=None, ge=1)


class SeriesRow(BaseModel):
    n: int
    r: float
    inv_r: float
    partial_sum: float
    r_exact: str | None = None
    inv_r_exact: str | None = None
    partial_sum_exact: str | None = None


class SeriesResponse(BaseModel):
    config: SeriesRequest
    version: str
    timestamp: str
    rows: list[SeriesRow]
    slope: float | None
    slope_window: tuple[int, int] | None
    slope_residual: float | None
    classification: str


class DriftScanRequest(BaseModel):
    radius: float = Field(gt=0)
    verify_doubling: bool = True
    per_state: bool = False
    workers: int = Field(default=1, ge=1, le=64)
    state_limit: int | None = Field(default=None, ge=1)


class ExceptionalState(BaseModel):
    state: tuple[int, int, int]
    rho: str  # exact rational
    drift: float


class PerStateDrift(BaseModel):
    state: tuple[int, int, int]
    rho: str
    drift: float


class DriftConditions(BaseModel):
    """The three conditions of the non-transience drift criterion."""

    sublevel_sets_finite: bool
    drift_bounded: bool
    negative_outside_exceptional: bool


class DriftScanResponse(BaseModel):
    config: DriftScanRequest
    version: str
    timestamp: str
    radius: float
    n_scanned: int
    exceptional_states: list[ExceptionalState]
    rho0: str | None
    max_drift_beyond_rho0: float | None
    max_abs_drift: float
    error_budget: float
    margin_vs_budget: float | None
    conditions: DriftConditions
    stable_under_doubling: bool | None  # None when doubling was not requested
    doubled_radius: float | None
    per_state: list[PerStateDrift] | None = None


class SimulateRequest(BaseModel):
    d: int = Field(ge=2, le=64)
    p: str = "1/4"
    m_bar: str = "1/2"
    horizon: int = Field(ge=1)
    seed: int = Field(ge=0)
    policy: Literal["greedy", "never"] = "greedy"
    q0: list[int] | None = None
    sample_limit: int | None = Field(default=None, ge=1)


class SimulateResponse(BaseModel):
    config: SimulateRequest
    version: str
    timestamp: str
    final_q: list[int]
    services_attempted: int
    services_successful: int
    origin_visits: int
    return_times: list[int]
    max_backlog: int
    mean_min_queue: float
    mean_qpar: float
    excess_digest: str


class EstimateReturnRequest(BaseModel):
    d: int = Field(ge=1, le=64)
    p: str = "1/2"
    n_max: int = Field(ge=0)
    trials: int = Field(ge=1)
    seed: int = Field(ge=0)
    mode: Literal["restarts", "trajectory"] = "restarts"
    workers: int = Field(default=1, ge=1, le=64)
    sample_limit: int | None = Field(default=None, ge=1)


class EstimateRow(BaseModel):
    n: int
    returns: int
    trials: int
    estimate: float
    std_error: float


class EstimateReturnResponse(BaseModel):
    config: EstimateReturnRequest
    version: str
    timestamp: str
    rows: list[EstimateRow]


class VisitGrowthRequest(BaseModel):
    d: int = Field(ge=1, le=64)
    p: str = "1/2"
    horizon: int = Field(ge=2)
    trials: int = Field(ge=1)
    seed: int = Field(ge=0)
    workers: int = Field(default=1, ge=1, le=64)
    sample_limit: int | None = Field(default=None, ge=1)


class VisitGrowthResponse(BaseModel):
    config: VisitGrowthRequest
    version: str
    timestamp: str
    visits_horizon: list[int]
    visits_double: list[int]
    mean_visits_horizon: float
    mean_visits_double: float
    growth_ratio: float


class HealthResponse(BaseModel):
    status: str
    version: str
