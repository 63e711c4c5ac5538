import math

import dopd


def test_presets():
    names = dopd.preset_names()
    assert "desk" in names and "paper-sec4" in names


def test_run_is_deterministic():
    a = dopd.run(preset="desk", overrides={"T": "50"})
    b = dopd.run(preset="desk", overrides={"T": "50"})
    assert a == b
    assert a["T"] == 50 and a["n"] == 10
    assert len(a["avg_cum_loss"]) == 50
    assert len(a["config_hash"]) == 16
    assert a["cum_triggers"][0] == 10  # round one broadcasts unconditionally
    assert a["final"]["avg_cum_loss"] == a["avg_cum_loss"][-1]


def test_seed_changes_trajectory():
    a = dopd.run(preset="desk", overrides={"T": "50"})
    c = dopd.run(preset="desk", overrides={"T": "50", "seed": "2"})
    assert a["avg_cum_loss"] != c["avg_cum_loss"]


def test_project():
    assert dopd.project("box", 2.0, [3.0, -7.0]) == [2.0, -2.0]
    y = dopd.project("ball", 1.0, [3.0, 4.0], shrink=0.5)
    assert math.isclose(math.hypot(*y), 0.5, rel_tol=1e-12)


def test_step_params():
    sp = dopd.step_params(4, preset="desk")
    assert math.isclose(sp["alpha"], 0.5, rel_tol=1e-12)
    assert math.isclose(sp["tau"], 1.0, rel_tol=1e-12)


def test_canonical_config():
    text = dopd.canonical_config(preset="desk")
    assert "n = 10\n" in text
    assert "schedule_family = paper-sec4\n" in text
