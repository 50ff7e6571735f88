from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

from syncq import __version__, rd_exact
from syncq.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    body = client.get("/health").json()
    assert body == {"status": "ok", "version": __version__}


class TestSeriesEndpoint:
    def test_exact_series(self, client):
        resp = client.post("/series", json={"d": 2, "p": "1/2", "n_max": 4, "backend": "exact"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["config"]["d"] == 2
        assert body["version"] == __version__
        assert "timestamp" in body
        assert body["rows"][2]["r_exact"] == "3/8"
        assert body["rows"][2]["r"] == 0.375
        sums = [row["partial_sum"] for row in body["rows"]]
        assert sums == sorted(sums)

    def test_log_series_has_no_exact_columns(self, client):
        body = client.post(
            "/series", json={"d": 3, "p": "1/2", "n_max": 4, "backend": "log"}
        ).json()
        assert body["rows"][2]["r_exact"] is None
        assert body["rows"][2]["r"] == pytest.approx(float(rd_exact(2, 3, Fraction(1, 2))), rel=1e-10)

    def test_validation_error_kind(self, client):
        resp = client.post("/series", json={"d": 2, "p": "7/3", "n_max": 4})
        assert resp.status_code == 400
        assert resp.json()["detail"]["kind"] == "validation"

    def test_schema_error(self, client):
        resp = client.post("/series", json={"d": 2, "p": "1/2", "n_max": -1})
        assert resp.status_code == 422

    def test_work_guard_kind(self, client):
        resp = client.post("/series", json={"d": 2, "p": "1/2", "n_max": 5000, "backend": "exact"})
        assert resp.status_code == 403
        detail = resp.json()["detail"]
        assert detail["kind"] == "work_guard"
        assert detail["estimated_work"] > detail["limit"]


class TestDriftScanEndpoint:
    def test_scan_with_doubling(self, client):
        resp = client.post("/drift-scan", json={"radius": 15, "verify_doubling": True})
        assert resp.status_code == 200
        body = resp.json()
        assert body["rho0"] == "6"
        assert body["stable_under_doubling"] is True
        assert body["doubled_radius"] == 30
        assert body["conditions"] == {
            "sublevel_sets_finite": True,
            "drift_bounded": True,
            "negative_outside_exceptional": True,
        }
        states = [tuple(e["state"]) for e in body["exceptional_states"]]
        assert (0, 0, 0) in states
        assert body["max_drift_beyond_rho0"] < 0

    def test_per_state(self, client):
        body = client.post(
            "/drift-scan", json={"radius": 3, "verify_doubling": False, "per_state": True}
        ).json()
        assert body["stable_under_doubling"] is None
        assert len(body["per_state"]) == body["n_scanned"]

    def test_guard(self, client):
        resp = client.post("/drift-scan", json={"radius": 10, "state_limit": 5})
        assert resp.status_code == 403


class TestSimulateEndpoint:
    def test_simulate(self, client):
        req = {"d": 2, "p": "1/4", "m_bar": "1/2", "horizon": 2000, "seed": 1, "policy": "greedy"}
        body = client.post("/simulate", json=req).json()
        assert body["config"]["policy"] == "greedy"
        assert len(body["final_q"]) == 2
        assert body["origin_visits"] == len(body["return_times"])
        rerun = client.post("/simulate", json=req).json()
        assert rerun["excess_digest"] == body["excess_digest"]

    def test_rejects_unstable_parameters(self, client):
        resp = client.post(
            "/simulate",
            json={"d": 2, "p": "1/2", "m_bar": "1/4", "horizon": 100, "seed": 1},
        )
        assert resp.status_code == 400
        assert resp.json()["detail"]["kind"] == "validation"


class TestEstimateReturnEndpoint:
    def test_estimates(self, client):
        req = {"d": 2, "p": "1/2", "n_max": 2, "trials": 40000, "seed": 7}
        body = client.post("/estimate-return", json=req).json()
        assert body["rows"][0]["estimate"] == 1.0
        exact = float(rd_exact(1, 2, Fraction(1, 2)))
        row = body["rows"][1]
        assert abs(row["estimate"] - exact) <= 4 * row["std_error"]

    def test_deterministic(self, client):
        req = {"d": 3, "p": "1/2", "n_max": 3, "trials": 10000, "seed": 5, "workers": 2}
        a = client.post("/estimate-return", json=req).json()
        b = client.post("/estimate-return", json=req).json()
        assert a["rows"] == b["rows"]


class TestVisitGrowthEndpoint:
    def test_growth(self, client):
        req = {"d": 2, "p": "1/2", "horizon": 4000, "trials": 8, "seed": 3}
        body = client.post("/visit-growth", json=req).json()
        assert len(body["visits_horizon"]) == 8
        assert body["growth_ratio"] > 1.0
        assert body["mean_visits_double"] >= body["mean_visits_horizon"]
