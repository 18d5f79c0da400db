import json
import math
import os
from dataclasses import replace

import numpy as np
import pytest

from arsim import engine as E
from arsim.dynamics import eta, spawn, step


@pytest.fixture(scope="module")
def conv_run():
    return E.run(E.ScenarioConfig(procedure="conventional", trace=True))


@pytest.fixture(scope="module")
def ars_run():
    return E.run(E.ScenarioConfig(procedure="ars", trace=True))


def test_spawn_schedule_gaps():
    cfg = E.ScenarioConfig(T_s=90.0, distance_to_gap=2, gap_period=3)
    times, m = E.spawn_schedule(cfg)
    assert m == 6 and len(times) == 6 + 1 + 6
    d = np.diff(times)
    doubles = [i for i, v in enumerate(d) if v == 180.0]
    # gap after the 2nd aircraft behind the missed one, then every 3rd slot
    assert doubles == [m + 2, m + 5]
    assert set(d) == {90.0, 180.0}


def test_spawn_jitter_is_seeded():
    cfg = E.ScenarioConfig(spawn_jitter=5.0, seed=3)
    a, _ = E.spawn_schedule(cfg)
    b, _ = E.spawn_schedule(cfg)
    c, _ = E.spawn_schedule(replace(cfg, seed=4))
    assert a == b and a != c
    assert min(np.diff(a)) >= cfg.T_s
    with pytest.raises(E.ConfigError):
        E.ScenarioConfig(spawn_jitter=5.0)


@pytest.mark.parametrize("kw,path", [
    ({"T_s": 0.0}, "engine.T_s"), ({"T_1": -1.0}, "engine.T_1"), ({"gap_period": 0}, "engine.gap_period"),
    ({"procedure": "hold"}, "engine.procedure"),
])
def test_config_invariants(kw, path):
    with pytest.raises(E.ConfigError) as ei:
        E.ScenarioConfig(**kw)
    assert ei.value.path == path


def test_separation_monitor():
    assert E.separation_monitor([5.0]) is None
    assert E.separation_monitor([]) is None
    assert E.separation_monitor([300.0, 100.0, 190.0]) == 90.0


def test_undisturbed_pair_keeps_spacing(chart, limits):
    a, b = spawn(chart, 0.0, id=0), None
    seps = []
    for t in range(1, 1400):
        if t == 90:
            b = spawn(chart, 90.0, id=1)
        for ac in (a, b):
            if ac is not None:
                step(ac, limits)
        if b is not None and not a.completed:
            seps.append(E.separation_monitor([eta(a, limits), eta(b, limits)]))
    assert all(abs(s - 90.0) <= 2.0 for s in seps)


def _passes(tr, wp, r=300.0):
    d = np.hypot(tr[:, 2] - wp.x, tr[:, 3] - wp.y)
    return int(np.argmin(d)) if d.min() < r else None


def test_conventional_route(conv_run, chart):
    assert conv_run.outcome == "landed"
    tr = E.missed_trace(conv_run)
    tr = tr[tr[:, 0] > conv_run.t_mapt[0]]
    order = [_passes(tr, w) for w in chart.missed_sequence()]
    assert None not in order and order == sorted(order)


def test_maneuver_fuel_matches_trace(conv_run, ars_run):
    for rep in (conv_run, ars_run):
        tr = E.missed_trace(rep)
        t0, t1 = rep.t_mapt
        fa = dict(zip(tr[:, 0], tr[:, 11]))
        assert abs(rep.maneuver_fuel - (fa[t1] - fa[t0])) <= 1.0 / 60.0
        assert rep.maneuver_time > 0 and rep.maneuver_fuel >= 0
        assert np.all(np.diff(tr[:, 11]) >= 0.0)


def test_ars_separation(ars_run):
    assert ars_run.outcome == "landed"
    assert ars_run.separation_min >= ars_run.config.T_s - 2.0
    assert ars_run.plan["gap"]["ghost_eta"] == pytest.approx(5 * 90.0, abs=2.0)


def test_traffic_conservation(conv_run, ars_run):
    for rep in (conv_run, ars_run):
        t = rep.traffic
        assert t["spawned"] == t["landed"] + t["airborne"]
        ids = set(rep.trace[:, 1].astype(int))
        assert len(ids) == t["spawned"]


def test_determinism():
    cfg = E.ScenarioConfig(T_s=120.0, distance_to_gap=2, trace=True)
    a, b = E.run(cfg), E.run(cfg)
    assert a.summary() == b.summary()
    assert np.array_equal(a.trace, b.trace)


def test_timeout():
    rep = E.run(E.ScenarioConfig(duration_cap=500.0))
    assert rep.outcome == "timeout" and rep.maneuver_time is None


def test_fallback_when_no_gap():
    # designated gap beyond the approach entry and no tail room: conventional fallback
    rep = E.run(E.ScenarioConfig(T_s=180.0, distance_to_gap=8))
    assert rep.outcome == "fallback_conventional"


def test_sweep_pairs_share_traffic():
    cells = E.sweep(E.ScenarioConfig(), [90.0], [2, 4])
    for c in cells:
        assert c.conv.config.procedure == "conventional" and c.ars.config.procedure == "ars"
        assert E.spawn_schedule(c.conv.config) == E.spawn_schedule(c.ars.config)
        assert c.time_saving == pytest.approx(1 - c.ars.maneuver_time / c.conv.maneuver_time)
    par = E.sweep(E.ScenarioConfig(), [90.0], [2, 4], jobs=2)
    assert [c.row() for c in par] == [c.row() for c in cells]


def test_sweep_requires_lists():
    with pytest.raises(ValueError):
        E.sweep(E.ScenarioConfig(), [], [1])


def test_documents_and_overrides(tmp_path):
    doc = E.default_document()
    cfg = E.config_from_document(doc)
    assert cfg == E.ScenarioConfig()
    E.apply_override(doc, "engine.T_s=120")
    E.apply_override(doc, "engine.procedure=conventional")
    cfg = E.config_from_document(doc)
    assert cfg.T_s == 120.0 and cfg.procedure == "conventional"
    assert E.sweep_lists(doc) == ([60.0, 90.0, 120.0, 150.0, 180.0], list(range(1, 9)))
    doc["performance"] = "perf.json"
    assert E.config_from_document(doc, str(tmp_path)).performance == os.path.join(str(tmp_path), "perf.json")


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d["engine"].__setitem__("T_s", "fast"), "engine.T_s"),
    (lambda d: d["engine"].__setitem__("gap_period", 1.5), "engine.gap_period"),
    (lambda d: d["guidance"].__setitem__("climb", -1.0), "guidance"),
    (lambda d: d.__setitem__("extra", 1), "extra"),
    (lambda d: d["sweep"].__setitem__("T_s", []), "sweep.T_s"),
])
def test_document_errors(mutate, path):
    doc = E.default_document()
    mutate(doc)
    with pytest.raises(E.ConfigError) as ei:
        E.config_from_document(doc)
        E.sweep_lists(doc)
    assert ei.value.path == path


def test_fmt():
    assert E.fmt(1 / 3) == "0.333333333"
    assert E.fmt(123456789012.0) == "1.23456789e+11"
    assert E.fmt(7) == "7" and E.fmt(None) == "" and E.fmt(math.nan) == "nan"


def test_atomic_write_failure_leaves_nothing(tmp_path):
    target = tmp_path / "out.csv"
    target.write_text("old")

    class Boom:
        def __str__(self):
            raise RuntimeError("boom")

    with pytest.raises(TypeError):
        E.atomic_write(str(target), Boom())
    assert target.read_text() == "old"
    assert os.listdir(tmp_path) == ["out.csv"]


def test_writers(tmp_path, ars_run):
    E.write_summary(str(tmp_path / "s.json"), ars_run)
    s = json.loads((tmp_path / "s.json").read_text())
    assert s["outcome"] == "landed" and "trace" not in s
    E.write_trace(str(tmp_path / "t.csv"), ars_run)
    head = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert head.split(",") == list(E.TRACE_COLUMNS)
