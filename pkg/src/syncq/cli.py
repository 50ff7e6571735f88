"""Command line front end; a thin client over the HTTP service.

By default every subcommand talks to the FastAPI app in-process through an
httpx ASGI transport, so no server needs to be running; pass --server URL to
target a remote instance. Outputs embed the full run configuration and tool
version; the timestamp is the only line that differs between reruns.

Exit codes: 0 success, 2 parameter/validation failure, 3 work-guard trip,
4 drift-scan exceptional set unstable under radius doubling, 1 anything else.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from . import tables

EXIT_VALIDATION = 2
EXIT_GUARD = 3
EXIT_UNSTABLE = 4


def _post(server: str | None, path: str, payload: dict) -> dict:
    """POST to the service (remote or in-process) and map errors to exit codes."""
    try:
        if server:
            with httpx.Client(base_url=server, timeout=None) as client:
                response = client.post(path, json=payload)
                status, body = response.status_code, response.json()
        else:
            status, body = asyncio.run(_post_in_process(path, payload))
    except httpx.HTTPError as exc:
        click.echo(f"transport error: {exc}", err=True)
        sys.exit(1)
    if status == 200:
        return body
    detail = body.get("detail", body)
    kind = detail.get("kind") if isinstance(detail, dict) else None
    message = detail.get("message", detail) if isinstance(detail, dict) else detail
    click.echo(f"error ({status}): {message}", err=True)
    if status == 403 and kind == "work_guard":
        sys.exit(EXIT_GUARD)
    if status in (400, 422):
        sys.exit(EXIT_VALIDATION)
    sys.exit(1)


async def _post_in_process(path: str, payload: dict) -> tuple[int, dict]:
    from .service.app import app

    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport, base_url="http://syncq.internal") as client:
        response = await client.post(path, json=payload, timeout=None)
        return response.status_code, response.json()


def _emit(text: str, output: str | None) -> None:
    if output is None:
        click.echo(text, nl=False)
        return
    target = Path(output)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)
    click.echo(f"wrote {target}", err=True)


server_option = click.option("--server", default=None, help="Remote service URL (default: in-process).")
format_option = click.option(
    "--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True
)
output_option = click.option("--output", default=None, help="Output path (default: stdout).")
workers_option = click.option("--workers", type=click.IntRange(1, 64), default=1, show_default=True)


@click.group()
@click.version_option(version=__version__, prog_name="syncq")
def main() -> None:
    """Synchronized queue batches, their excess walk, and the analyses around them."""


@main.command()
@click.option("--d", "d", type=int, default=2, show_default=True, help="Number of queues.")
@click.option("--p", default="1/2", show_default=True, help="Arrival probability, exact rational.")
@click.option("--n-max", type=int, default=40, show_default=True)
@click.option("--backend", type=click.Choice(["exact", "log"]), default="exact", show_default=True)
@click.option("--work-limit", type=int, default=None, help="Override the term-count work guard.")
@click.option("--fig2", is_flag=True, help="Preset: d in {2,3,4,5}, p=1/2, n=0..40, exact backend.")
@workers_option
@format_option
@output_option
@server_option
def series(d, p, n_max, backend, work_limit, fig2, workers, fmt, output, server) -> None:
    """Return-probability series r(n) with partial sums and a tail slope diagnostic."""
    if fig2:
        out_dir = Path(output) if output else Path("fig2")
        out_dir.mkdir(parents=True, exist_ok=True)
        for dim in (2, 3, 4, 5):
            payload = {"d": dim, "p": "1/2", "n_max": 40, "backend": "exact", "workers": workers}
            body = _post(server, "/series", payload)
            text = tables.series_csv(body) if fmt == "csv" else tables.to_json(body, "series", fmt)
            _emit(text, str(out_dir / f"fig2_d{dim}.{fmt}"))
        return
    payload = {"d": d, "p": p, "n_max": n_max, "backend": backend, "workers": workers}
    if work_limit is not None:
        payload["work_limit"] = work_limit
    body = _post(server, "/series", payload)
    text = tables.series_csv(body) if fmt == "csv" else tables.to_json(body, "series", fmt)
    _emit(text, output)


@main.command("drift-scan")
@click.option("--radius", type=float, required=True, help="Scan all classes with rho <= radius^2.")
@click.option("--emit-per-state", is_flag=True, help="Include per-state drifts (CSV rows).")
@click.option("--no-verify-doubling", is_flag=True, help="Skip the radius-doubling stability check.")
@click.option("--state-limit", type=int, default=None, help="Override the state-count work guard.")
@workers_option
@format_option
@output_option
@server_option
def drift_scan_cmd(radius, emit_per_state, no_verify_doubling, state_limit, workers, fmt, output, server) -> None:
    """Exhaustive drift scan certifying negativity outside a finite exceptional set (d=3, p=1/2).

    Exit status 4 when the exceptional set changes under radius doubling.
    """
    per_state = emit_per_state or fmt == "csv"
    payload = {
        "radius": radius,
        "verify_doubling": not no_verify_doubling,
        "per_state": per_state,
        "workers": workers,
    }
    if state_limit is not None:
        payload["state_limit"] = state_limit
    body = _post(server, "/drift-scan", payload)
    text = tables.drift_csv(body) if fmt == "csv" else tables.to_json(body, "drift-scan", fmt)
    _emit(text, output)
    if body.get("stable_under_doubling") is False:
        click.echo("exceptional set NOT stable under radius doubling", err=True)
        sys.exit(EXIT_UNSTABLE)


@main.command()
@click.option("--d", "d", type=int, default=2, show_default=True)
@click.option("--p", default="1/4", show_default=True)
@click.option("--mbar", default="1/2", show_default=True, help="Service success probability.")
@click.option("--T", "horizon", type=int, default=10000, show_default=True, help="Slots to simulate.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--policy", type=click.Choice(["greedy", "never"]), default="greedy", show_default=True)
@click.option("--q0", default=None, help="Initial backlogs, comma separated (default zeros).")
@format_option
@output_option
@server_option
def simulate(d, p, mbar, horizon, seed, policy, q0, fmt, output, server) -> None:
    """Simulate the queue batch and report backlog and excess statistics."""
    payload = {"d": d, "p": p, "m_bar": mbar, "horizon": horizon, "seed": seed, "policy": policy}
    if q0 is not None:
        try:
            payload["q0"] = [int(v) for v in q0.split(",")]
        except ValueError:
            raise click.BadParameter(f"q0 must be comma separated integers, got {q0!r}")
    body = _post(server, "/simulate", payload)
    text = tables.simulate_csv(body) if fmt == "csv" else tables.to_json(body, "simulate", fmt)
    _emit(text, output)


@main.command("estimate-return")
@click.option("--d", "d", type=int, default=2, show_default=True)
@click.option("--p", default="1/2", show_default=True)
@click.option("--n-max", type=int, default=10, show_default=True)
@click.option("--trials", type=int, default=100000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(["restarts", "trajectory"]), default="restarts", show_default=True)
@workers_option
@format_option
@output_option
@server_option
def estimate_return(d, p, n_max, trials, seed, mode, workers, fmt, output, server) -> None:
    """Monte Carlo estimates of the n-step return probabilities, with standard errors."""
    payload = {
        "d": d,
        "p": p,
        "n_max": n_max,
        "trials": trials,
        "seed": seed,
        "mode": mode,
        "workers": workers,
    }
    body = _post(server, "/estimate-return", payload)
    text = tables.estimate_csv(body) if fmt == "csv" else tables.to_json(body, "estimate-return", fmt)
    _emit(text, output)


@main.command("visit-growth")
@click.option("--d", "d", type=int, default=2, show_default=True)
@click.option("--p", default="1/2", show_default=True)
@click.option("--T", "horizon", type=int, default=100000, show_default=True)
@click.option("--trials", type=int, default=64, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@workers_option
@format_option
@output_option
@server_option
def visit_growth_cmd(d, p, horizon, trials, seed, workers, fmt, output, server) -> None:
    """Origin-visit counts at T and 2T; the growth ratio separates recurrence from transience."""
    payload = {"d": d, "p": p, "horizon": horizon, "trials": trials, "seed": seed, "workers": workers}
    body = _post(server, "/visit-growth", payload)
    text = tables.visit_growth_csv(body) if fmt == "csv" else tables.to_json(body, "visit-growth", fmt)
    _emit(text, output)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("syncq.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
