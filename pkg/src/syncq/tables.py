"""CSV rendering for service responses.

Schema is fixed and versioned in the leading comment line; the config echo and
tool version ride along as comments, and the timestamp sits alone on its own
line so reruns of the same config differ in exactly that one line.
"""

from __future__ import annotations

import json
from typing import Any

SCHEMA_VERSION = "v1"


def _head(kind: str, columns: list[str], response: dict[str, Any], subcommand: str, fmt: str) -> list[str]:
    config = dict(response.get("config", {}))
    config["subcommand"] = subcommand
    config["format"] = fmt
    return [
        f"# syncq-{kind} csv-schema {SCHEMA_VERSION} columns={','.join(columns)}",
        f"# version: {response.get('version', '')}",
        f"# config: {json.dumps(config, sort_keys=True, separators=(',', ':'))}",
        f"# timestamp: {response.get('timestamp', '')}",
    ]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render(head: list[str], columns: list[str], rows: list[list[Any]]) -> str:
    lines = list(head)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def series_csv(response: dict[str, Any], subcommand: str = "series") -> str:
    exact = response["config"]["backend"] == "exact"
    columns = ["n", "r", "inv_r", "partial_sum"]
    if exact:
        columns += ["r_exact", "inv_r_exact", "partial_sum_exact"]
    rows = [[row.get(c) for c in columns] for row in response["rows"]]
    head = _head("series", columns, response, subcommand, "csv")
    head.insert(1, f"# slope: {_cell(response.get('slope'))} classification: {response.get('classification')}")
    return _render(head, columns, rows)


def drift_csv(response: dict[str, Any]) -> str:
    columns = ["x1", "x2", "x3", "rho", "drift"]
    rows = [[*rec["state"], rec["rho"], rec["drift"]] for rec in response.get("per_state") or []]
    head = _head("drift-scan", columns, response, "drift-scan", "csv")
    head.insert(1, f"# rho0: {_cell(response.get('rho0'))} n_scanned: {response.get('n_scanned')}")
    return _render(head, columns, rows)


def estimate_csv(response: dict[str, Any]) -> str:
    columns = ["n", "estimate", "std_error", "returns", "trials"]
    rows = [[row[c] for c in columns] for row in response["rows"]]
    return _render(_head("estimate-return", columns, response, "estimate-return", "csv"), columns, rows)


def visit_growth_csv(response: dict[str, Any]) -> str:
    columns = ["trial", "visits_horizon", "visits_double"]
    rows = [
        [i, a, b]
        for i, (a, b) in enumerate(zip(response["visits_horizon"], response["visits_double"]))
    ]
    head = _head("visit-growth", columns, response, "visit-growth", "csv")
    head.insert(
        1,
        f"# mean_visits_horizon: {_cell(response['mean_visits_horizon'])}"
        f" mean_visits_double: {_cell(response['mean_visits_double'])}"
        f" growth_ratio: {_cell(response['growth_ratio'])}",
    )
    return _render(head, columns, rows)


def simulate_csv(response: dict[str, Any]) -> str:
    columns = ["key", "value"]
    keys = [
        "final_q",
        "services_attempted",
        "services_successful",
        "origin_visits",
        "max_backlog",
        "mean_min_queue",
        "mean_qpar",
        "excess_digest",
    ]
    rows: list[list[Any]] = []
    for key in keys:
        value = response[key]
        if isinstance(value, list):
            value = ";".join(str(v) for v in value)
        rows.append([key, _cell(value)])
    rows.append(["return_times", ";".join(str(t) for t in response["return_times"])])
    return _render(_head("simulate", columns, response, "simulate", "csv"), columns, rows)


def to_json(response: dict[str, Any], subcommand: str, fmt: str) -> str:
    payload = dict(response)
    config = dict(payload.get("config", {}))
    config["subcommand"] = subcommand
    config["format"] = fmt
    payload["config"] = config
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
