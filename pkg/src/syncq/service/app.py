"""FastAPI service wrapping the core package, one endpoint per analysis.

Error contract: schema violations surface as 422 (FastAPI default), domain
validation failures as 400 with detail.kind = "validation", and refused
oversized computations as 403 with detail.kind = "work_guard" plus the work
estimate, so clients can distinguish the two without parsing messages.
"""

from __future__ import annotations

from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..drift import drift_scan, rho
from ..errors import ConstraintViolation, ParameterError, WorkLimitExceeded
from ..montecarlo import estimate_rd, simulate_queue, visit_growth
from ..queue_model import SystemParams
from ..series import partial_sum
from . import schemas

app = FastAPI(
    title="syncq",
    version=__version__,
    description="Synchronized-queue batches, quotient-walk return series, drift certificates and Monte Carlo.",
)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@app.exception_handler(ParameterError)
@app.exception_handler(ConstraintViolation)
async def _validation_handler(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"detail": {"kind": "validation", "message": str(exc)}},
    )


@app.exception_handler(WorkLimitExceeded)
async def _guard_handler(request: Request, exc: WorkLimitExceeded) -> JSONResponse:
    return JSONResponse(
        status_code=403,
        content={
            "detail": {
                "kind": "work_guard",
                "message": str(exc),
                "estimated_work": exc.estimated_work,
                "limit": exc.limit,
            }
        },
    )


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/series", response_model=schemas.SeriesResponse)
def series(req: schemas.SeriesRequest) -> schemas.SeriesResponse:
    report = partial_sum(
        n_max=req.n_max,
        d=req.d,
        p=req.p,
        backend=req.backend,
        workers=req.workers,
        work_limit=req.work_limit,
    )
    return schemas.SeriesResponse(
        config=req,
        version=__version__,
        timestamp=_now(),
        rows=[schemas.SeriesRow(**row) for row in report.rows()],
        slope=report.slope,
        slope_window=report.slope_window,
        slope_residual=report.slope_residual,
        classification=report.classification,
    )


@app.post("/drift-scan", response_model=schemas.DriftScanResponse)
def drift_scan_endpoint(req: schemas.DriftScanRequest) -> schemas.DriftScanResponse:
    kwargs = {} if req.state_limit is None else {"state_limit": req.state_limit}
    report = drift_scan(req.radius, workers=req.workers, keep_per_state=req.per_state, **kwargs)
    stable: bool | None = None
    doubled_radius: float | None = None
    if req.verify_doubling:
        doubled_radius = 2 * req.radius
        doubled = drift_scan(req.radius * 2, workers=req.workers, **kwargs)
        stable = doubled.exceptional == report.exceptional
    per_state = None
    if req.per_state and report.per_state is not None:
        per_state = [
            schemas.PerStateDrift(state=state, rho=str(r), drift=dr)
            for state, r, dr in report.per_state
        ]
    return schemas.DriftScanResponse(
        config=req,
        version=__version__,
        timestamp=_now(),
        radius=report.radius,
        n_scanned=report.n_scanned,
        exceptional_states=[
            schemas.ExceptionalState(state=state, rho=str(rho(state)), drift=dr)
            for state, dr in zip(report.exceptional, report.exceptional_drifts)
        ],
        rho0=str(report.rho0) if report.rho0 is not None else None,
        max_drift_beyond_rho0=report.max_drift_beyond_rho0,
        max_abs_drift=report.max_abs_drift,
        error_budget=report.error_budget,
        margin_vs_budget=report.margin_vs_budget(),
        conditions=schemas.DriftConditions(
            sublevel_sets_finite=report.sublevel_sets_finite,
            drift_bounded=report.drift_bounded,
            negative_outside_exceptional=report.negative_outside_exceptional,
        ),
        stable_under_doubling=stable,
        doubled_radius=doubled_radius,
        per_state=per_state,
    )


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    params = SystemParams(d=req.d, p=req.p, m_bar=req.m_bar)
    stats = simulate_queue(
        params,
        policy=req.policy,
        horizon=req.horizon,
        seed=req.seed,
        q0=req.q0,
        sample_limit=req.sample_limit,
    )
    return schemas.SimulateResponse(
        config=req,
        version=__version__,
        timestamp=_now(),
        final_q=list(stats.final_q),
        services_attempted=stats.services_attempted,
        services_successful=stats.services_successful,
        origin_visits=stats.origin_visits,
        return_times=stats.return_times,
        max_backlog=stats.max_backlog,
        mean_min_queue=stats.mean_min_queue,
        mean_qpar=stats.mean_qpar,
        excess_digest=stats.excess_digest,
    )


@app.post("/estimate-return", response_model=schemas.EstimateReturnResponse)
def estimate_return(req: schemas.EstimateReturnRequest) -> schemas.EstimateReturnResponse:
    report = estimate_rd(
        n_max=req.n_max,
        d=req.d,
        p=req.p,
        trials=req.trials,
        seed=req.seed,
        mode=req.mode,
        workers=req.workers,
        sample_limit=req.sample_limit,
    )
    return schemas.EstimateReturnResponse(
        config=req,
        version=__version__,
        timestamp=_now(),
        rows=[
            schemas.EstimateRow(
                n=row.n,
                returns=row.returns,
                trials=row.trials,
                estimate=row.estimate,
                std_error=row.std_error,
            )
            for row in report.rows
        ],
    )


@app.post("/visit-growth", response_model=schemas.VisitGrowthResponse)
def visit_growth_endpoint(req: schemas.VisitGrowthRequest) -> schemas.VisitGrowthResponse:
    report = visit_growth(
        d=req.d,
        p=req.p,
        horizon=req.horizon,
        trials=req.trials,
        seed=req.seed,
        workers=req.workers,
        sample_limit=req.sample_limit,
    )
    return schemas.VisitGrowthResponse(
        config=req,
        version=__version__,
        timestamp=_now(),
        visits_horizon=report.visits_horizon,
        visits_double=report.visits_double,
        mean_visits_horizon=report.mean_visits_horizon,
        mean_visits_double=report.mean_visits_double,
        growth_ratio=report.growth_ratio,
    )
