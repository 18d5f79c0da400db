import copy
import json
import math

import pytest

from arsim.chart import (
    MALAGA_NOMINAL,
    ApproachSequence,
    ChartError,
    Waypoint,
    builtin_malaga_rwy13,
    chart_to_document,
    charts_equal,
    dump_chart,
    load_chart,
)

TABLE_1 = {
    "LOJAS": (32115.94, 7950.47, 2133.60, 123.47),
    "TOLSU": (3788.66, 49848.85, 2133.60, 123.47),
    "MARTIN": (-38123.21, 41103.20, 2133.60, 123.47),
    "MG403": (-29788.86, 28279.77, 1524, 123.47),
    "MG402": (-26759.25, 23616.67, 1524, 82.31),
    "MG401": (-16175.05, 14299.41, 1280.16, 82.31),
    "LTP": (55.74, -53.08, 15.85, 72.02),
    "RWY13": (2179.44, -2035.92, 15.85, 25.72),
    "XILVI": (36907.56, -7831.11, 670.56, 113.18),
}


def test_table_fidelity(chart):
    wps = chart.waypoints
    for name, row in TABLE_1.items():
        w = wps[name]
        assert (w.x, w.y, w.z, w.speed) == row


def test_entry(chart):
    e = chart.entry
    assert e.name == "LOJAS" and (e.x, e.y, e.z) == (32115.94, 7950.47, 2133.60)


def test_nominal_order(chart):
    assert tuple(chart.nominal.names) == MALAGA_NOMINAL
    assert len(chart.nominal) == 7
    assert chart.mapt.name == "LTP"


def test_speeds_from_table(chart):
    assert {w.speed for w in chart.waypoints.values()} <= {123.47, 82.31, 72.02, 25.72, 113.18}


def test_descent_from_tolsu(chart):
    z = [w.z for w in chart.nominal.starting_at("TOLSU")]
    assert all(b <= a for a, b in zip(z, z[1:]))


def test_missed_route(chart):
    ma, xilvi, tolsu = chart.missed_route
    assert (xilvi.name, tolsu.name) == ("XILVI", "TOLSU")
    assert math.hypot(ma.x - chart.mapt.x, ma.y - chart.mapt.y) == pytest.approx(37040.0)
    end = chart.waypoints["RWY13"]
    rwy = math.atan2(end.y - chart.mapt.y, end.x - chart.mapt.x)
    assert math.atan2(ma.y - chart.mapt.y, ma.x - chart.mapt.x) == pytest.approx(rwy)
    assert (ma.z, ma.speed) == (xilvi.z, xilvi.speed)
    assert chart.missed_sequence().names == ["MA20NM", "XILVI", "TOLSU", "MARTIN", "MG403", "MG402", "MG401", "LTP"]


def test_round_trip(chart):
    again = load_chart(dump_chart(chart))
    assert charts_equal(chart, again)
    assert load_chart(json.loads(dump_chart(chart))).missed_route.names == chart.missed_route.names


def test_round_trip_file(chart, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(dump_chart(chart))
    assert charts_equal(chart, load_chart(str(p)))


def _doc():
    return chart_to_document(builtin_malaga_rwy13())


def _err(doc):
    with pytest.raises(ChartError) as ei:
        load_chart(doc)
    return ei.value.path


def test_missing_mapt():
    d = _doc()
    del d["mapt"]
    assert _err(d) == "mapt"


def test_zero_speed():
    d = _doc()
    d["waypoints"][3]["speed"] = 0
    assert _err(d) == "waypoints[3].speed"


def test_duplicate_name():
    d = _doc()
    d["waypoints"].append(copy.deepcopy(d["waypoints"][0]))
    assert _err(d).endswith(".name")


def test_missed_route_must_rejoin():
    d = _doc()
    d["missed_route"] = ["MA20NM", "XILVI"]
    assert _err(d) == "missed_route"


def test_unknown_reference_and_frame():
    d = _doc()
    d["nominal"][2] = "NOPE"
    assert _err(d) == "nominal[2]"
    d = _doc()
    d["frame"] = "wgs84"
    assert _err(d) == "frame"


def test_bad_json():
    assert _err("{not json") == "$"


def test_waypoint_invariants():
    with pytest.raises(ValueError):
        Waypoint("A", 0, 0, 0, 0.0)
    with pytest.raises(ValueError):
        Waypoint("A", 0, 0, -1.0, 10.0)


def test_sequence_invariants():
    a = Waypoint("A", 0, 0, 0, 10.0)
    with pytest.raises(ValueError):
        ApproachSequence(())
    with pytest.raises(ValueError):
        ApproachSequence((a, Waypoint("B", 0, 0, 0, 12.0)))
