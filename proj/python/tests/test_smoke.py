import csv
import io
import math
import os
from pathlib import Path

import pytest

import gridmarket as gm

DATA = Path(os.environ.get("GRIDMARKET_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_two_node_closed_form():
    assert gm.two_node_voltage(0.1, 0.1, -0.5, 0.0) == pytest.approx(0.894409720866, abs=1e-10)


def test_distflow_and_matrices():
    feeder, demand = gm.load_feeder(str(DATA / "feeders" / "three_node.json"))
    assert feeder.node_count == 2
    mats = gm.build_matrices(feeder)
    assert mats["C"].shape == (2, 2)
    assert mats["Mp"][1, 1] == pytest.approx(0.08)
    flow = gm.solve_distflow(feeder, [-p for p in demand.p_load], [-q for q in demand.q_load])
    assert flow["converged"]
    assert flow["residual"] < 1e-8
    assert all(v < 1.0 for v in flow["V"])


def test_market_run_is_clean_and_deterministic():
    s = gm.Scenario(str(DATA / "feeders" / "ieee37.json"), str(DATA / "bids" / "ieee37_case1.json"))
    a = gm.run(s, audit_samples=50, seed=3)
    b = gm.run(s, audit_samples=50, seed=3)
    assert not a["accepted_all"]
    assert a["audit"]["clean"]
    assert a["audit"]["evaluated"] == a["audit"]["samples"] + a["audit"]["corners"]
    assert a["allocation"]["revenue"] == b["allocation"]["revenue"]
    assert 0.0 < a["allocation"]["total_mw"] < 15.45
    prices = [p for p in a["allocation"]["clearing_price"] if p is not None]
    assert prices and min(prices) > 0


def test_tiny_bids_are_accepted():
    s = gm.Scenario(str(DATA / "feeders" / "three_node.json"), str(DATA / "bids" / "three_node_tiny.json"))
    assert gm.step1(s)["feasible"]
    assert gm.run(s, audit_samples=0)["accepted_all"]


def test_robust_reduces_allocation():
    feeder = str(DATA / "feeders" / "ieee37.json")
    bids = str(DATA / "bids" / "ieee37_case2.json")
    det = gm.step2(gm.Scenario(feeder, bids))
    rob = gm.step2(gm.Scenario(feeder, bids, robust=True))
    assert rob["total_mw"] < det["total_mw"]


def test_compare_csv():
    feeder, demand = gm.load_feeder(str(DATA / "feeders" / "two_node.json"))
    rows = list(csv.DictReader(io.StringIO(gm.compare(feeder, demand, [0.0, 1.0]))))
    methods = {r["method"] for r in rows}
    assert methods == {"lindist", "socp", "cia", "exact"}
    cia = next(r for r in rows if r["method"] == "cia" and float(r["p_max_mw"]) == 1.0)
    assert float(cia["injection_mw"]) <= 1.0
    assert not math.isnan(float(cia["true_max_v_pu"]))


def test_input_errors_raise_value_error():
    with pytest.raises(ValueError):
        gm.Scenario(str(DATA / "feeders" / "three_node.json"), str(DATA / "bids" / "three_node.json"),
                    direction="sideways")
    with pytest.raises(ValueError):
        gm.load_feeder(str(DATA / "feeders" / "missing.json"))
