"""Aircraft Reinjection System: gap search, ghost prediction and the reinjection solve.

The missed aircraft is sent into a gap of the arrival flow. A ghost aircraft
sits in the gap one separation behind the gap leader and flies the nominal
reference; the reinjection point is where a shortest turn-limited path from
the missed aircraft's pose reaches the ghost's future pose at the same time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from arsim import kernels as K
from arsim.chart import ApproachChart, ApproachSequence, Waypoint
from arsim.dynamics import AircraftState, GuidanceLimits
from arsim.geometry import DubinsPath, Pose2D, ReferenceTrajectory, dubins_sample, dubins_shortest, turn_radius

T_1_DEFAULT = 240.0
RESIDUAL_TOL = 0.1  # s
SCAN_STEP = 5.0  # s
BISECT_TOL = 1e-3  # s


class UnreachableGap(RuntimeError):
    """No interception time exists for the requested gap."""


@dataclass(frozen=True)
class FlowEntry:
    id: int
    eta: float


@dataclass(frozen=True)
class Gap:
    leader: int | None
    follower: int | None
    leader_eta: float | None
    follower_eta: float | None
    ghost_eta: float

    def to_document(self) -> dict:
        return {"leader": self.leader, "follower": self.follower, "ghost_eta": self.ghost_eta}


@dataclass(frozen=True)
class GhostFix:
    pose: Pose2D
    z: float
    leg: int  # index of the nominal leg (== target waypoint index)
    s: float
    speed: float  # published speed of that leg
    time_to_go: float


@dataclass(frozen=True)
class ReinjectionPlan:
    gap: Gap
    t_star: float
    residual: float
    waypoints: tuple[Waypoint, Waypoint, Waypoint]
    reinjection: Waypoint
    reinjection_time: float  # s after plan creation; equals t_star
    path: DubinsPath
    sequence: ApproachSequence  # aux fixes, reinjection point and the nominal remainder

    def to_document(self) -> dict:
        r = self.reinjection
        return {
            "gap": self.gap.to_document(),
            "t_star": self.t_star,
            "waypoints": [
                {"name": w.name, "x": w.x, "y": w.y, "z": w.z, "speed": w.speed, "heading": w.heading}
                for w in self.waypoints
            ],
            "reinjection_point": {"x": r.x, "y": r.y, "z": r.z, "t": self.reinjection_time},
        }


def find_gap(
    flow: Sequence[FlowEntry],
    T_s: float,
    T_1: float = T_1_DEFAULT,
    missed_eta: float = 0.0,
    window_end: float = math.inf,
    slack: float = 0.0,
) -> Gap | None:
    """Earliest eligible gap in an ETA-ordered flow.

    A pair qualifies when its ETA difference exceeds ``2*T_s - slack`` and
    the ghost ETA (leader + T_s) lies in ``[missed_eta + T_1, window_end]``;
    ``slack`` also widens the near edge to absorb ETA prediction noise.
    Behind the last aircraft a tail gap is always available, its ghost no
    earlier than the window start.
    """
    if not (T_s > 0.0 and T_1 > 0.0):
        raise ValueError("T_s and T_1 must be positive")
    etas = [f.eta for f in flow]
    if any(b < a for a, b in zip(etas, etas[1:])):
        raise ValueError("flow must be sorted by ETA")
    start = missed_eta + T_1
    lo, hi = start - slack, window_end
    for a, b in zip(flow, flow[1:]):
        ghost = a.eta + T_s
        if b.eta - a.eta > 2.0 * T_s - slack and lo <= ghost <= hi:
            return Gap(a.id, b.id, a.eta, b.eta, ghost)
    if flow:
        last = flow[-1]
        ghost = max(last.eta + T_s, start)
        gap = Gap(last.id, None, last.eta, None, ghost)
    else:
        gap = Gap(None, None, None, None, start)
    return gap if gap.ghost_eta <= hi else None


def predict_ghost(gap: Gap, reference: ReferenceTrajectory, dt: float) -> GhostFix:
    """Where the ghost is ``dt`` seconds from now along the nominal reference."""
    if dt < 0.0:
        raise ValueError("dt must be non-negative")
    ttg = gap.ghost_eta - dt
    k, s, _v, pose, z = reference.locate(ttg)
    return GhostFix(pose, z, k, s, reference.legs[k].speed, ttg)


def _travel(pose: Pose2D, V0: float, fix: GhostFix, limits: GuidanceLimits) -> tuple[float, DubinsPath]:
    r = turn_radius(V0, fix.speed, limits.turn_rate)
    path = dubins_shortest(pose, fix.pose, r)
    return K.ramp_time(path.length, V0, fix.speed, limits.accel)[0], path


def _aux_points(path: DubinsPath):
    """Arc lengths of: end of first arc, middle of middle segment, start of last arc."""
    l0, l1, l2 = path.segments
    return (l0, l0 + 0.5 * l1, l0 + l1)


def solve_reinjection(
    missed: AircraftState,
    gap: Gap,
    reference: ReferenceTrajectory,
    limits: GuidanceLimits,
    go_around_altitude: float,
) -> ReinjectionPlan:
    """Intercept time t* with travel(t*) == t*, and the waypoints that fly it.

    The residual is scanned on a coarse grid and each sign change is refined
    by bisection; the first bracket whose root meets the residual tolerance
    wins (jumps from Dubins word switches are rejected that way).
    """
    pose, V0 = missed.pose, missed.V
    t_max = min(gap.ghost_eta, reference.total)

    def f(t: float) -> float:
        return _travel(pose, V0, predict_ghost(gap, reference, t), limits)[0] - t

    grid = np.arange(0.0, t_max, SCAN_STEP).tolist() + [t_max]
    vals = [f(t) for t in grid]
    t_star = None
    for i in range(len(grid) - 1):
        lo, hi, flo, fhi = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if fhi == 0.0:
            lo = hi
        elif not (flo > 0.0 > fhi):
            continue
        while hi - lo > BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if f(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        cand = 0.5 * (lo + hi)
        if abs(f(cand)) <= RESIDUAL_TOL:
            t_star = cand
            break
    if t_star is None:
        raise UnreachableGap(f"no interception time for ghost ETA {gap.ghost_eta:.1f} s")

    fix = predict_ghost(gap, reference, t_star)
    travel, path = _travel(pose, V0, fix, limits)
    L = path.length
    aux = []
    for i, s in enumerate(_aux_points(path), start=1):
        p = dubins_sample(path, s)
        z = go_around_altitude + (fix.z - go_around_altitude) * (s / L if L > 0.0 else 1.0)
        aux.append(Waypoint(f"AUX{i}", p.x, p.y, z, fix.speed, p.psi))
    reinj = Waypoint("REINJ", fix.pose.x, fix.pose.y, fix.z, fix.speed, fix.pose.psi)
    rest = reference.waypoints[fix.leg:]
    chain: list[Waypoint] = []
    for w in (*aux, reinj, *rest):
        if chain and math.hypot(w.x - chain[-1].x, w.y - chain[-1].y) < 1e-6:
            chain[-1] = w
        else:
            chain.append(w)
    return ReinjectionPlan(
        gap=gap,
        t_star=t_star,
        residual=travel - t_star,
        waypoints=tuple(aux),
        reinjection=reinj,
        reinjection_time=t_star,
        path=path,
        sequence=ApproachSequence(tuple(chain)),
    )


def activate_conventional(missed: AircraftState, chart: ApproachChart) -> ApproachSequence:
    """Switch to the published missed-approach route; idempotent."""
    seq = chart.missed_sequence()
    if missed.sequence != seq:
        missed.set_sequence(seq)
    return seq


__all__ = [
    "FlowEntry",
    "Gap",
    "GhostFix",
    "ReinjectionPlan",
    "UnreachableGap",
    "find_gap",
    "predict_ghost",
    "solve_reinjection",
    "activate_conventional",
    "T_1_DEFAULT",
]
