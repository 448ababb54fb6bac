import json
import math
import os
import pathlib

import pytest

import htlob

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_prob_up_orientation_and_forms():
    p = htlob.DiffusionParams.standard(0.0)
    assert htlob.prob_up(1.0, 1.0, p) == pytest.approx(0.5, abs=1e-15)
    assert htlob.prob_up(math.sqrt(3.0), 1.0, p) == pytest.approx(2.0 / 3.0, abs=1e-12)
    q = htlob.DiffusionParams.standard(-0.7)
    for x, y in [(0.5, 4.0), (2.0, 1.0), (3.0, 3.0)]:
        assert abs(htlob.prob_up_arcsin(x, y, q) - htlob.prob_up_arctan(x, y, q)) < 1e-10


def test_geometry_and_tail_index():
    assert htlob.cone_alpha(0.5) == pytest.approx(2 * math.pi / 3)
    assert htlob.duration_tail_index(0.0) == pytest.approx(1.0)
    assert htlob.duration_tail_index(-0.7) == pytest.approx(2.0, abs=0.05)


def test_survival_and_monte_carlo():
    p = htlob.DiffusionParams.standard(0.0)
    s = htlob.duration_survival(1.0, 1.0, 1.0, p)
    assert s == pytest.approx(0.4660649426743922, abs=1e-8)
    assert htlob.duration_survival_drifted(1.0, 1.0, 1.0, p) == pytest.approx(s, abs=1e-6)
    mc = htlob.exit_statistics(p, 1.0, 1.0, paths=40000, seed=3, grid=[1.0])
    assert abs(mc["survival"][0] - s) < 4 * mc["survival_se"][0]
    assert mc["censored"] > 0  # the horizon defaults to the last grid time
    full = htlob.exit_statistics(p, 1.0, 1.0, paths=40000, seed=4)
    assert full["censored"] == 0
    assert abs(full["p_up"] - 0.5) < 4 * full["p_up_se"]


def test_params_validation_raises_value_error():
    with pytest.raises(ValueError):
        htlob.DiffusionParams.from_moments(0, 0, 1, 1, 1.5)
    with pytest.raises(ValueError):
        htlob.params_from_json(json.dumps({"sd_bid": 1, "sd_ask": 1, "bogus": 2}))


def test_flow_replay_and_estimation():
    ev = htlob.generate_flow({"type": "poisson", "lambda_limit": 1.2, "mu_market": 0.5, "theta_cancel": 0.3}, 20000.0, 5)
    assert len(ev["time"]) == pytest.approx(80000, rel=0.03)
    rule = {"type": "fixed", "bid": 3.0, "ask": 3.0}
    r = htlob.replay(ev["time"], ev["side"], ev["delta"], 3.0, 3.0, json.dumps(rule), 1)
    assert min(r["q_bid"]) > 0 and min(r["q_ask"]) > 0
    assert r["jumps"] == len(r["price_ticks"]) - 1
    rho, se = htlob.estimate_rho(ev["time"], ev["side"], ev["delta"])
    assert abs(rho) < 4 * se + 0.01


def test_agent_rho_is_negative():
    a = htlob.agent_model_params(0.2, 0.3, 0.5, 1.0, 1.0, 1.0)
    assert a["rho"] == pytest.approx(-1.0 / 3.0)


def test_run_command_round_trip(tmp_path):
    cfg = json.loads((ROOT / "configs" / "simulate_lob_table3.json").read_text())
    rep = htlob.run_command("simulate-lob", cfg, out=tmp_path / "lob", seed=3)
    assert rep["pass"]
    assert rep["provenance"]["seed"] == 3
    assert (tmp_path / "lob" / "events.csv").exists()
    again = htlob.run_command("simulate-lob", cfg, out=tmp_path / "lob2", seed=3)
    assert (tmp_path / "lob" / "events.csv").read_bytes() == (tmp_path / "lob2" / "events.csv").read_bytes()
    assert again["provenance"]["config_hash"] == rep["provenance"]["config_hash"]
    est = htlob.run_command("estimate", {}, out=tmp_path / "est", input=tmp_path / "lob" / "events.csv")
    assert est["results"]["rates"]["bid"]["value"] == pytest.approx(223.45, rel=0.1)


def test_run_command_rejects_unknown_keys(tmp_path):
    with pytest.raises(ValueError, match="unknown key"):
        htlob.run_command("pup", {"params": {"sd_bid": 1, "sd_ask": 1}, "grid": 3}, out=tmp_path)


def test_example_configs_match_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads((ROOT / "schemas" / "config.schema.json").read_text())
    pairs = {
        "simulate_lob_table3": "simulate-lob",
        "simulate_q": "simulate-q",
        "validate_fclt": "validate-fclt",
        "pup_rho0": "pup",
        "duration_rho0": "duration",
        "estimate": "estimate",
    }
    for name, command in pairs.items():
        doc = json.loads((ROOT / "configs" / f"{name}.json").read_text())
        jsonschema.validate(doc, {"$defs": schema["$defs"], "$ref": f"#/$defs/{command}"})
