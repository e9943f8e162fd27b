"""Experiment harness: traces, invariant checks, verification, sweeps."""

import json
import math

import numpy as np
import pytest

from barrons.domain import ProblemDims
from barrons.harness import (
    LEARNER_NAMES,
    growth_ratios,
    load_trace,
    run_experiment,
    run_market,
    save_trace,
    sweep,
    verify_trace,
    write_sweep_csv,
    write_sweep_json,
)
from barrons.markets import MarketSpec, generate
from barrons.solver import SolverConfig, SolverFailure

DIMS = ProblemDims(2, 64)


@pytest.fixture(scope="module")
def blowup_result():
    return run_market("ada", MarketSpec("blowup", DIMS))


def test_run_validation():
    rounds = generate(MarketSpec("constant", DIMS))
    with pytest.raises(ValueError, match="unknown learner"):
        run_experiment("newton", rounds, DIMS)
    with pytest.raises(ValueError, match="rounds"):
        run_experiment("eg", rounds[:10], DIMS)


def test_trace_layout_and_summary(blowup_result):
    trace = blowup_result.trace_dict()
    assert trace["schema"] == "portfolio-trace/1"
    assert trace["config"]["learner"] == "ada"
    assert trace["config"]["n"] == 2 and trace["config"]["t"] == 64
    assert len(trace["per_round"]) == 64
    first = trace["per_round"][0]
    for key in ("t", "epoch", "beta", "x", "r", "loss", "cum_loss", "grad_inf", "alpha", "u", "restart"):
        assert key in first
    summary = trace["summary"]
    assert summary["rounds_played"] == 64
    assert summary["restarts"] >= 1
    assert summary["epoch_count"] == summary["restarts"] + 1
    assert summary["invariant_violations"] == []
    assert summary["regret"] == pytest.approx(
        summary["total_loss"] - summary["best_crp_loss"], abs=1e-12
    )


def test_losses_match_recorded_plays(blowup_result):
    for rec in blowup_result.per_round:
        x = np.array(rec["x"])
        r = np.array(rec["r"])
        assert rec["loss"] == pytest.approx(-math.log(float(x @ r)), rel=1e-12)


def test_verifier_accepts_unmodified_trace(blowup_result):
    assert verify_trace(blowup_result.trace_dict()) == []


def test_verifier_accepts_every_learner():
    dims = ProblemDims(2, 24)
    for learner in LEARNER_NAMES:
        result = run_market(learner, MarketSpec("iid_lognormal", dims, seed=2))
        assert verify_trace(result.trace_dict()) == [], learner
        assert result.summary["invariant_violations"] == []


def test_verifier_catches_tampered_loss(blowup_result):
    trace = json.loads(blowup_result.body_json())
    trace["per_round"][5]["loss"] += 1e-6
    problems = verify_trace(trace)
    assert any("loss" in p for p in problems)


def test_verifier_catches_tampered_play(blowup_result):
    trace = json.loads(blowup_result.body_json())
    rec = trace["per_round"][8]
    rec["x"] = [rec["x"][1], rec["x"][0]]
    assert verify_trace(trace)


def test_verifier_catches_tampered_ceiling(blowup_result):
    trace = json.loads(blowup_result.body_json())
    trace["per_round"][3]["alpha"] = 0.4999
    problems = verify_trace(trace)
    assert any("alpha" in p or "ceiling" in p for p in problems)


def test_verifier_catches_tampered_restart_flag(blowup_result):
    trace = json.loads(blowup_result.body_json())
    flipped = None
    for rec in trace["per_round"]:
        if rec["restart"]:
            rec["restart"] = False
            flipped = rec["t"]
            break
    assert flipped is not None
    assert verify_trace(trace)


def test_verifier_catches_tampered_summary(blowup_result):
    trace = json.loads(blowup_result.body_json())
    trace["summary"]["total_loss"] += 0.5
    problems = verify_trace(trace)
    assert any("total" in p or "summary" in p for p in problems)


def test_save_and_load_roundtrip(tmp_path, blowup_result):
    path = tmp_path / "trace.json"
    save_trace(blowup_result, path)
    loaded = load_trace(path)
    assert loaded == json.loads(blowup_result.body_json())
    doc = json.loads(path.read_text())
    assert "created_at" in doc["meta"]


def test_load_rejects_foreign_json(tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"hello": 1}))
    with pytest.raises(ValueError, match="trace"):
        load_trace(path)


def test_trace_bodies_are_deterministic():
    spec = MarketSpec("iid_lognormal", ProblemDims(2, 32), seed=9)
    a = run_market("ada", spec).body_json()
    b = run_market("ada", spec).body_json()
    assert a == b


def test_regret_matches_wealth_ratio():
    # Regret equals the log of the wealth ratio between the best CRP and
    # the learner, so exponentiating recovers the ratio of final wealths.
    dims = ProblemDims(2, 128)
    for learner in ("ada", "eg"):
        result = run_market(learner, MarketSpec("iid_lognormal", dims, seed=4))
        wealth = 1.0
        for rec in result.per_round:
            wealth *= float(np.array(rec["x"]) @ np.array(rec["r"]))
        crp_wealth = math.exp(-result.summary["best_crp_loss"])
        want = math.log(crp_wealth / wealth)
        assert result.summary["regret"] == pytest.approx(want, rel=1e-6, abs=1e-9)


def test_partial_trace_persisted_on_solver_failure(tmp_path):
    out = tmp_path / "aborted.json"
    cfg = SolverConfig(max_newton_iters=1)
    with pytest.raises(SolverFailure):
        run_market("ada", MarketSpec("blowup", ProblemDims(2, 16)), solver_cfg=cfg, out_path=out)
    trace = load_trace(out)
    assert trace["summary"]["aborted"]
    assert trace["summary"]["best_crp_loss"] is None


def test_bad_learner_params_propagate():
    with pytest.raises(ValueError, match="beta"):
        run_market("ada", MarketSpec("constant", ProblemDims(2, 8)), params={"beta": 0.7})


def test_strict_run_matches_relaxed_run_when_clean():
    # Strict mode only changes what happens on a violation; a clean run
    # must produce the identical trace body.
    spec = MarketSpec("blowup", ProblemDims(2, 32))
    relaxed = run_market("ada", spec)
    strict = run_market("ada", spec, strict=True)
    assert relaxed.summary["invariant_violations"] == []
    a = json.loads(relaxed.body_json())
    b = json.loads(strict.body_json())
    a["config"].pop("strict"), b["config"].pop("strict")
    assert a == b


def test_sweep_rows_and_csv(tmp_path):
    rows = sweep("eg", "iid_lognormal", 2, [16, 32], reps=2, seed=5)
    assert len(rows) == 4
    seeds = [row["seed"] for row in rows]
    assert seeds == [5, 6, 5, 6]
    for row in rows:
        assert row["error"] == ""
        assert row["regret"] is not None
        assert row["runtime_ms"] >= 0.0
    path = tmp_path / "sweep.csv"
    write_sweep_csv(rows, path)
    header = path.read_text().splitlines()[0]
    assert header == "learner,market,N,T,seed,regret,epochs,G,runtime_ms,error"
    assert len(path.read_text().splitlines()) == 5


def test_sweep_records_failures_and_continues():
    rows = sweep("ada", "blowup", 2, [2, 16], seed=0)
    assert len(rows) == 2
    assert "horizon must exceed" in rows[0]["error"]
    assert rows[0]["regret"] is None
    assert rows[1]["error"] == ""


def test_sweep_needs_horizons():
    with pytest.raises(ValueError, match="at least one horizon"):
        sweep("eg", "constant", 2, [])


def test_growth_ratios_pair_consecutive_horizons():
    rows = [
        {"learner": "eg", "market": "blowup", "N": 2, "T": 16, "seed": 0, "regret": 2.0, "error": ""},
        {"learner": "eg", "market": "blowup", "N": 2, "T": 64, "seed": 0, "regret": 3.0, "error": ""},
        {"learner": "eg", "market": "blowup", "N": 2, "T": 32, "seed": 0, "regret": 0.0, "error": ""},
        {"learner": "eg", "market": "blowup", "N": 2, "T": 128, "seed": 0, "regret": None, "error": "boom"},
    ]
    ratios = growth_ratios(rows)
    steps = ratios["eg|blowup|N=2|seed=0"]
    assert [(s["t_from"], s["t_to"]) for s in steps] == [(16, 32), (32, 64)]
    assert steps[0]["ratio"] == 0.0
    assert steps[1]["ratio"] is None


def test_sweep_json_carries_rows_and_ratios(tmp_path):
    rows = sweep("softbayes", "cover_alternating", 2, [16, 32], seed=1)
    path = write_sweep_json(rows, tmp_path / "sweep.json")
    doc = json.loads(path.read_text())
    assert len(doc["rows"]) == 2
    steps = doc["growth_ratios"]["softbayes|cover_alternating|N=2|seed=1"]
    assert len(steps) == 1 and steps[0]["t_from"] == 16 and steps[0]["t_to"] == 32
