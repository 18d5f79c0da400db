import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arsim import ars as A
from arsim import kernels as K
from arsim.chart import ApproachSequence, Waypoint
from arsim.dynamics import AircraftState, GuidanceLimits, eta, spawn, step
from arsim.geometry import Pose2D, dubins_shortest


def flow(*etas):
    return [A.FlowEntry(i, float(e)) for i, e in enumerate(etas)]


def test_find_gap_example():
    g = A.find_gap(flow(100, 190, 460, 550), 90.0, 240.0, 0.0)
    assert (g.leader, g.follower) == (1, 2)
    assert g.ghost_eta == 280.0


def test_uniform_flow_has_no_gap():
    f = flow(*np.arange(0.0, 2000.0, 90.0))
    assert A.find_gap(f, 90.0, 240.0, 0.0, window_end=1427.0) is None


def test_empty_flow_uses_window_start():
    g = A.find_gap([], 90.0, 240.0, 0.0)
    assert g.ghost_eta == 240.0 and g.leader is None and g.follower is None


def test_tail_gap():
    g = A.find_gap(flow(100, 190, 280), 90.0, 240.0, 0.0, window_end=1000.0)
    assert (g.leader, g.follower, g.ghost_eta) == (2, None, 370.0)


def test_earliest_gap_wins():
    # (0, 300): ghost 90 is inside T_1; (300, 600) and (690, 1000) both qualify
    g = A.find_gap(flow(0, 300, 600, 690, 1000), 90.0, 240.0, 0.0)
    assert (g.leader, g.ghost_eta) == (1, 390.0)


def test_gap_slack():
    f = flow(150, 330)  # difference exactly 2*T_s
    assert A.find_gap(f, 90.0, 240.0, 0.0, window_end=300.0) is None
    assert A.find_gap(f, 90.0, 240.0, 0.0, window_end=300.0, slack=2.0).ghost_eta == 240.0


def test_find_gap_preconditions():
    with pytest.raises(ValueError):
        A.find_gap(flow(200, 100), 90.0)
    with pytest.raises(ValueError):
        A.find_gap([], 0.0)


@given(st.lists(st.floats(0.0, 3000.0), max_size=12), st.floats(30.0, 200.0), st.floats(1.0, 600.0),
       st.floats(300.0, 3000.0))
def test_gap_respects_window(etas, T_s, T_1, end):
    g = A.find_gap(flow(*sorted(etas)), T_s, T_1, 0.0, end)
    if g is not None:
        assert T_1 <= g.ghost_eta <= end
        if g.follower is not None:
            assert g.follower_eta - g.leader_eta > 2 * T_s
            assert g.ghost_eta == g.leader_eta + T_s


def _gap(ghost):
    return A.Gap(0, 1, ghost - 90.0, ghost + 90.0, ghost)


def test_predict_ghost_now(reference):
    fix = A.predict_ghost(_gap(700.0), reference, 0.0)
    _, _, _, p, z = reference.locate(700.0)
    assert fix.pose == p and fix.z == z and fix.time_to_go == 700.0


def test_predict_ghost_straight_advance(reference):
    T = reference.total - 100.0
    a = A.predict_ghost(_gap(T), reference, 0.0)
    b = A.predict_ghost(_gap(T), reference, 10.0)
    assert a.leg == b.leg == 0
    assert math.hypot(b.pose.x - a.pose.x, b.pose.y - a.pose.y) == pytest.approx(1234.7, abs=1e-6)


def test_predicted_pose_eta(chart, limits, reference):
    for T, dt in [(1200.0, 0.0), (1200.0, 300.0), (800.0, 555.0)]:
        fix = A.predict_ghost(_gap(T), reference, dt)
        g = spawn(chart, 0.0, "ghost", 7, time_to_go=fix.time_to_go, reference=reference)
        assert eta(g, limits) == pytest.approx(T - dt, abs=0.5)


def test_predict_ghost_range(reference):
    with pytest.raises(ValueError):
        A.predict_ghost(_gap(500.0), reference, 501.0)
    with pytest.raises(ValueError):
        A.predict_ghost(_gap(500.0), reference, -1.0)


@pytest.fixture(scope="module")
def at_mapt(chart, limits):
    a = spawn(chart, 0.0, "missed", 0)
    while not a.completed:
        step(a, limits)
    return a


@dataclass
class _Leg:
    speed: float


class StationaryGhost:
    """Test double: a ghost that never moves."""

    def __init__(self, pose, z, speed):
        self.pose, self.z = pose, z
        self.legs = [_Leg(speed)]
        self.waypoints = (Waypoint("HOLD", pose.x + 5000.0, pose.y, z, speed),)
        self.total = 1e9

    def locate(self, ttg):
        return 0, 0.0, self.legs[0].speed, self.pose, self.z


def test_stationary_ghost_fixed_point(limits):
    speed = 80.0
    seq = ApproachSequence((Waypoint("X", 1e5, 0.0, 500.0, speed),))
    missed = AircraftState(0, "missed", 0.0, 0.0, 300.0, 0.0, speed, seq)
    goal = Pose2D(-9000.0, 7000.0, 2.0)
    plan = A.solve_reinjection(missed, _gap(5000.0), StationaryGhost(goal, 600.0, speed), limits, 2133.6)
    L = dubins_shortest(missed.pose, goal, speed / limits.turn_rate).length
    assert plan.t_star == pytest.approx(L / speed, abs=0.1)


def test_plan_structure(at_mapt, reference, limits, chart):
    plan = A.solve_reinjection(at_mapt, _gap(450.0), reference, limits, 2133.6)
    assert len(plan.waypoints) == 3
    assert abs(plan.residual) <= 0.1
    assert plan.sequence[-1].name == chart.mapt.name
    fix = A.predict_ghost(_gap(450.0), reference, plan.t_star)
    r = plan.reinjection
    assert (r.x, r.y, r.z) == (fix.pose.x, fix.pose.y, fix.z)
    assert all(w.speed == fix.speed for w in plan.waypoints)
    # altitudes interpolate from the go-around altitude toward the ghost
    zs = [w.z for w in plan.waypoints]
    assert all(min(2133.6, fix.z) <= z <= max(2133.6, fix.z) for z in zs)
    assert zs == sorted(zs, reverse=fix.z < 2133.6)
    doc = plan.to_document()
    assert set(doc) == {"gap", "t_star", "waypoints", "reinjection_point"}
    assert doc["reinjection_point"]["t"] == plan.t_star


def test_plan_geometry_rejoins_before_fap(at_mapt, reference, limits, chart):
    plan = A.solve_reinjection(at_mapt, _gap(840.0), reference, limits, 2133.6)
    names = plan.sequence.names
    assert names.index("REINJ") < names.index("MG401")
    fap, ltp = chart.waypoints["MG401"], chart.mapt
    ux, uy = fap.x - ltp.x, fap.y - ltp.y
    n = math.hypot(ux, uy)
    ux, uy = ux / n, uy / n
    r = plan.path.radius

    def along_cross(w):
        dx, dy = w.x - ltp.x, w.y - ltp.y
        return dx * ux + dy * uy, dx * uy - dy * ux

    reinj_along, _ = along_cross(plan.reinjection)
    for w in plan.waypoints:
        al, cr = along_cross(w)
        assert -r <= al <= reinj_along + r
        assert abs(cr) <= 2.1 * r


def test_residual_random_scenarios(at_mapt, reference, limits):
    rng = np.random.default_rng(2024)
    worst, unreachable = 0.0, 0
    for _ in range(100):
        pose = Pose2D(at_mapt.x + rng.uniform(-3000, 3000), at_mapt.y + rng.uniform(-3000, 3000),
                      at_mapt.psi + rng.uniform(-0.5, 0.5))
        m = AircraftState(0, "missed", pose.x, pose.y, 300.0, pose.psi, rng.uniform(70.0, 90.0), at_mapt.sequence)
        gap = _gap(rng.uniform(240.0, reference.total))
        try:
            plan = A.solve_reinjection(m, gap, reference, limits, 2133.6)
        except A.UnreachableGap:
            unreachable += 1
            continue
        fix = A.predict_ghost(gap, reference, plan.t_star)
        L = dubins_shortest(m.pose, fix.pose, max(m.V, fix.speed) / limits.turn_rate).length
        travel = K.ramp_time(L, m.V, fix.speed, limits.accel)[0]
        worst = max(worst, abs(travel - plan.t_star))
    assert unreachable == 0
    assert worst <= A.RESIDUAL_TOL


def test_unreachable_gap(at_mapt, reference, limits):
    with pytest.raises(A.UnreachableGap):
        A.solve_reinjection(at_mapt, _gap(30.0), reference, limits, 2133.6)


def test_simulated_arrival_matches_t_star(at_mapt, reference, limits):
    import copy
    for ghost in (450.0, 840.0):
        m = copy.deepcopy(at_mapt)
        plan = A.solve_reinjection(m, _gap(ghost), reference, limits, 2133.6)
        m.set_sequence(plan.sequence)
        t = 0
        while True:
            _, _, ev = step(m, limits)
            t += 1
            if ("captured", "REINJ") in ev:
                break
            assert t < 3000
        assert abs(t - plan.t_star) <= 5.0


def test_plan_determinism(at_mapt, reference, limits):
    a = A.solve_reinjection(at_mapt, _gap(600.0), reference, limits, 2133.6)
    b = A.solve_reinjection(at_mapt, _gap(600.0), reference, limits, 2133.6)
    assert a == b


def test_activate_conventional(chart, limits):
    a = spawn(chart, 0.0, "missed")
    seq = A.activate_conventional(a, chart)
    assert seq.names == ["MA20NM", "XILVI", "TOLSU", "MARTIN", "MG403", "MG402", "MG401", "LTP"]
    step(a, limits)
    target = a.target
    again = A.activate_conventional(a, chart)
    assert again == seq and a.target == target and a.sequence == seq
    assert seq[-1].name == "LTP"
