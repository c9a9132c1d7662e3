import math

import numpy as np
import pytest

import lossdecay as ld


def test_presets_round_trip():
    names = ld.preset_names()
    assert "linear-2-0" in names
    spec = ld.preset("linear-2-0")
    assert spec["kind"] == "LinearDecrease"
    assert ld.schedule_weight(spec, 0.5) == 1.0
    assert ld.schedule_weight("poly-0.9", 0.5) == pytest.approx(0.5 ** 0.9)


def test_schedule_trace_is_piecewise_per_epoch():
    w = ld.schedule_trace({"preset": "linear-2-0", "granularity": "PerEpoch"}, 20, 5)
    assert w[:5] == [2.0] * 5
    assert w[5] == pytest.approx(1.5)
    noisy = ld.schedule_trace("random-unit", 50, 10, seed=3)
    assert noisy == ld.schedule_trace("random-unit", 50, 10, seed=3)
    assert all(0.0 <= x < 1.0 for x in noisy)


def test_run_returns_records_and_summary():
    cfg = {"problem": "QuadraticBowl", "epochs": 3, "steps_per_epoch": 10, "weight_schedule": "linear-2-0"}
    r = ld.run(cfg, trajectory=True)
    assert r["status"] == "ok"
    rec = r["records"]
    assert rec["step"].tolist() == list(range(30))
    assert rec["loss_raw"].shape == (30,)
    assert not np.isnan(rec["gTg"][0])
    assert np.isnan(rec["gTg"][1])
    assert len(r["trajectory"]) == 30
    assert r["final_theta"].shape == (10,)
    assert r["summary"]["steps"] == 30
    assert r["final_loss"] < rec["loss_raw"][0]
    again = ld.run(cfg, trajectory=True)
    assert np.array_equal(again["final_theta"], r["final_theta"])


def test_scaling_modes_agree_for_sgd():
    base = {"problem": {"kind": "QuadraticBowl", "condition_number": 50}, "optimizer": {"eta": 0.01}, "epochs": 2, "steps_per_epoch": 50,
            "weight_schedule": {"preset": "linear-2-0", "granularity": "PerStep"}, "probe_every": "never"}
    thetas = [ld.run(base, {"optimizer.scaling": m})["final_theta"]
              for m in ("ScaleLoss", "ScaleGradient", "ScaleLearningRate")]
    assert np.max(np.abs(thetas[0] - thetas[1])) < 1e-12
    assert np.max(np.abs(thetas[0] - thetas[2])) < 1e-12


def test_divergence_is_reported():
    r = ld.run({"problem": {"kind": "QuadraticBowl", "condition_number": 1000}, "optimizer": {"eta": 0.01},
                "epochs": 100})
    assert r["status"] == "nonfinite"
    assert 0 < len(r["records"]["step"]) < 10000


def test_errors_map_to_python_exceptions():
    with pytest.raises(ld.ConfigError, match="optimizer.eta"):
        ld.run({"optimizer": {"eta": -1}})
    with pytest.raises(ld.ParseError, match="line 1"):
        ld.normalize_config("{oops")
    with pytest.raises(ValueError):
        ld.preset("cosine")


def test_normalize_config_fills_defaults():
    c = ld.normalize_config({"problem": "DeepMLP"}, ["optimizer.eta=0.05"])
    assert c["problem"]["kind"] == "DeepMLP"
    assert c["optimizer"]["eta"] == 0.05
    assert c["dataset"]["kind"] == "GaussianBlobs"


def test_sweep_rows_are_ordered():
    rows = ld.sweep({"defaults": {"epochs": 2, "steps_per_epoch": 5}, "runs": [{"seed": 1}, {"seed": 2}]},
                    parallelism=2)
    assert [r["id"] for r in rows] == ["run-0", "run-1"]
    assert all(r["status"] == "ok" for r in rows)


def test_curvature_and_floor():
    p = ld.probe_quadratic([1.0, 100.0], np.array([1.0, 1.0]), 0.01)
    assert p["gTg"] == 10001.0
    assert p["predicted_decrease"] == pytest.approx(-50.00995, rel=1e-12)
    assert p["actual_decrease"] == pytest.approx(p["predicted_decrease"], rel=1e-12)
    assert ld.stationary_loss_floor([1.0], 1.0, 0.1) == pytest.approx(0.1 / 3.8)


def test_plateau_detector():
    means = [1.0] * 20 + [0.5] * 10
    rep = ld.detect_plateau_break(means, 0.01, 5)
    assert rep["plateau_start_epoch"] <= 15
    assert rep["break_epoch"] == 20
    assert ld.detect_plateau_break([1.0] * 30, 0.01)["break_epoch"] is None


def test_gradient_check():
    cfg = {"problem": {"kind": "DeepMLP", "depth": 4, "width": 8},
           "dataset": {"kind": "Spirals", "n_samples": 60, "n_classes": 3}}
    assert ld.gradient_check(cfg, draws=3) < 1e-5
    assert math.isfinite(ld.gradient_check({"problem": "QuadraticBowl"}))
