import numpy as np
import pytest
from fastapi.testclient import TestClient

from tvvar.service import app
from tvvar.simulation import eq_smooth_var2, simulate_panel


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def panel_payload():
    panel = simulate_panel(eq_smooth_var2(), 150, seed=12)
    return {
        "rows": panel.data.tolist(),
        "columns": ["y0", "y1"],
        "presample": 2,
    }


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


class TestFitEndpoint:
    def test_fit_fixed_h(self, client, panel_payload):
        resp = client.post("/fit", json={"panel": panel_payload, "p": 2, "h": 0.3})
        assert resp.status_code == 200
        body = resp.json()
        assert body["p"] == 2
        assert body["h"] == 0.3
        assert not body["h_was_cv"]
        assert len(body["grid"]) == 150
        kinds = {c["quantity"] for c in body["estimates"]}
        assert kinds == {"A", "Omega"}
        assert all(c["se"] is not None for c in body["estimates"] if c["quantity"] == "A")

    def test_fit_cv_bandwidth(self, client, panel_payload):
        resp = client.post("/fit", json={"panel": panel_payload, "p": 1, "h": None,
                                         "with_se": False, "grid_size": 11})
        assert resp.status_code == 200
        body = resp.json()
        assert body["h_was_cv"]
        assert 0 < body["h"] < 1
        assert len(body["grid"]) == 11

    def test_deterministic_config_hash(self, client, panel_payload):
        req = {"panel": panel_payload, "p": 1, "h": 0.4}
        a = client.post("/fit", json=req).json()
        b = client.post("/fit", json=req).json()
        assert a == b
        assert a["config_hash"] == b["config_hash"]

    def test_ragged_panel_rejected(self, client):
        resp = client.post("/fit", json={"panel": {"rows": [[1.0], [1.0, 2.0]]}, "p": 1})
        assert resp.status_code == 422  # request validation

    def test_numerical_error_maps_to_422(self, client, panel_payload):
        resp = client.post("/fit", json={"panel": panel_payload, "p": 1, "h": 0.006})
        assert resp.status_code == 422
        assert resp.json()["kind"] in ("SingularDesignError", "DegenerateWindowError")

    def test_data_error_maps_to_400(self, client):
        rows = np.ones((60, 2)).tolist()  # constant series: singular design
        bad = {"rows": [[1.0, float("nan")]] * 30}
        # non-finite values are a data problem
        resp = client.post("/fit", json={"panel": {"rows": [[1.0, 2.0]] * 30,
                                                   "presample": 40}, "p": 1, "h": 0.3})
        assert resp.status_code == 400


class TestOtherEndpoints:
    def test_irf(self, client, panel_payload):
        resp = client.post("/irf", json={"panel": panel_payload, "p": 1, "h": 0.35,
                                         "horizons": 4, "grid_size": 5,
                                         "cumulative": True})
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["responses"]) == 5 * 5 * 4
        assert body["cumulative"] is not None
        h0 = [c for c in body["responses"] if c["horizon"] == 0 and c["tau"] == body["grid"][2]]
        impact = np.array([c["value"] for c in h0]).reshape(2, 2)
        assert impact[0, 1] == pytest.approx(0.0, abs=1e-12)  # recursive ordering

    def test_select_lag(self, client, panel_payload):
        resp = client.post("/select-lag", json={"panel": panel_payload, "max_lag": 3})
        assert resp.status_code == 200
        body = resp.json()
        assert body["candidates"] == [1, 2, 3]
        assert body["chosen"] in body["candidates"]
        assert len(body["ic"]) == 3

    def test_bandwidth(self, client, panel_payload):
        resp = client.post("/bandwidth", json={"panel": panel_payload, "p": 1,
                                               "h_grid": [0.004, 0.3, 0.5]})
        body = resp.json()
        assert resp.status_code == 200
        assert body["cv_scores"][0] is None  # degenerate candidate marked null
        assert body["chosen"] in (0.3, 0.5)

    def test_stability(self, client, panel_payload):
        resp = client.post("/test-stability", json={"panel": panel_payload, "p": 1,
                                                    "h": 0.35, "block": "A1",
                                                    "B": 19, "seed": 3})
        assert resp.status_code == 200
        body = resp.json()
        assert 0.05 <= body["p_value"] <= 1.0
        assert set(body["reject"]) == {"0.01", "0.05", "0.1"}
        assert body["n_skipped"] == 0

    def test_simulate_roundtrip(self, client):
        resp = client.post("/simulate", json={"dgp": "smooth", "T": 100, "seed": 8})
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["rows"]) == 100 + body["presample"]
        again = client.post("/simulate", json={"dgp": "smooth", "T": 100, "seed": 8}).json()
        assert body == again

    def test_simulate_local_null(self, client):
        resp = client.post("/simulate", json={"dgp": "local", "T": 100, "seed": 8,
                                              "b": 2.0})
        assert resp.status_code == 200

    def test_diagnostics(self, client, panel_payload):
        resp = client.post("/diagnostics", json={"panel": panel_payload, "p": 2,
                                                 "h": 0.35})
        assert resp.status_code == 200
        body = resp.json()
        assert body["df"] == 4
        assert 0.0 <= body["p_value"] <= 1.0
