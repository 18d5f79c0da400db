"""Dubins paths, leg chaining and travel-time estimation.

Poses use a local east/north frame in metres; headings are radians measured
counter-clockwise from east and normalised to [0, 2*pi).

Waypoint-like arguments only need ``x``, ``y`` and ``speed`` attributes and
an optional ``heading`` (radians or None). When ``heading`` is None the
aircraft is expected to cross the waypoint already pointing at the next one,
which reproduces the fly-by transit points between legs.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence

from arsim import kernels as K

STANDARD_TURN_RATE = math.radians(3.0)  # rad/s

__all__ = [
    "Pose2D",
    "DubinsPath",
    "LegPlan",
    "STANDARD_TURN_RATE",
    "bearing",
    "turn_radius",
    "dubins_shortest",
    "dubins_sample",
    "leg_headings",
    "plan_legs",
    "sequence_eta",
    "ReferenceTrajectory",
]


def _norm(psi: float) -> float:
    return K.mod2pi(float(psi))


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "psi", _norm(self.psi))

    def reversed(self) -> "Pose2D":
        return Pose2D(self.x, self.y, self.psi + math.pi)

    def distance_to(self, other) -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass(frozen=True)
class DubinsPath:
    start: Pose2D
    radius: float
    word: str
    segments: tuple[float, float, float]

    @property
    def kinds(self) -> tuple[int, int, int]:
        return tuple(K.WORD_SEGMENTS[K.WORD_NAMES.index(self.word)])

    @property
    def length(self) -> float:
        return self.segments[0] + self.segments[1] + self.segments[2]

    @property
    def end(self) -> Pose2D:
        return dubins_sample(self, self.length)

    def sample(self, s: float) -> Pose2D:
        return dubins_sample(self, s)


@dataclass(frozen=True)
class LegPlan:
    """One flown leg: reference path, commanded speed and altitude endpoints."""

    path: DubinsPath
    speed: float
    z_start: float
    z_end: float
    v_in: float = 0.0
    v_out: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if not self.speed > 0.0:
            raise ValueError("leg speed must be positive")

    @property
    def length(self) -> float:
        return self.path.length

    def altitude_at(self, s: float) -> float:
        L = self.path.length
        if L <= 0.0:
            return self.z_end
        return self.z_start + (self.z_end - self.z_start) * min(max(s / L, 0.0), 1.0)


def bearing(ax: float, ay: float, bx: float, by: float) -> float:
    return _norm(math.atan2(by - ay, bx - ax))


def turn_radius(v_in: float, speed: float, turn_rate: float = STANDARD_TURN_RATE) -> float:
    """Radius flown at ``turn_rate`` by the fastest speed reached on the leg."""
    return max(v_in, speed) / turn_rate


def dubins_shortest(start: Pose2D, goal: Pose2D, radius: float) -> DubinsPath:
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    word, t, p, q = K.dubins_best(start.x, start.y, start.psi, goal.x, goal.y, goal.psi, radius)
    return DubinsPath(start, float(radius), K.WORD_NAMES[word], (t, p, q))


def dubins_sample(path: DubinsPath, s: float) -> Pose2D:
    L = path.length
    if s < -1e-9 or s > L + 1e-9:
        raise ValueError(f"arc length {s} outside [0, {L}]")
    k0, k1, k2 = path.kinds
    l0, l1, l2 = path.segments
    st = path.start
    x, y, psi = K.dubins_sample(st.x, st.y, st.psi, k0, k1, k2, l0, l1, l2, path.radius, min(max(s, 0.0), L))
    return Pose2D(x, y, psi)


def leg_headings(start_x: float, start_y: float, start_psi: float, waypoints: Sequence) -> list[float]:
    """Heading with which each waypoint is crossed.

    Explicit ``heading`` wins; otherwise the bearing to the next distinct
    waypoint, and for the last one the bearing of the inbound segment.
    Coincident points inherit the previous heading.
    """
    n = len(waypoints)
    out = [0.0] * n
    prev_x, prev_y, prev_psi = start_x, start_y, start_psi
    for i, wp in enumerate(waypoints):
        h = getattr(wp, "heading", None)
        if h is None:
            for nxt in waypoints[i + 1:]:
                if math.hypot(nxt.x - wp.x, nxt.y - wp.y) > 1e-9:
                    h = bearing(wp.x, wp.y, nxt.x, nxt.y)
                    break
            if h is None:
                if math.hypot(wp.x - prev_x, wp.y - prev_y) > 1e-9:
                    h = bearing(prev_x, prev_y, wp.x, wp.y)
                else:
                    h = prev_psi
        out[i] = _norm(h)
        prev_x, prev_y, prev_psi = wp.x, wp.y, out[i]
    return out


def plan_legs(
    start: Pose2D,
    waypoints: Sequence,
    radius: float | None = None,
    *,
    z0: float = 0.0,
    v0: float | None = None,
    accel: float = 0.0,
    turn_rate: float = STANDARD_TURN_RATE,
) -> list[LegPlan]:
    """Chain Dubins legs through ``waypoints``.

    With ``radius=None`` each leg uses the standard-rate radius of the
    fastest speed reached on it. ``accel > 0`` slews the speed linearly
    between legs; ``accel = 0`` flies every leg at its commanded speed.
    """
    legs: list[LegPlan] = []
    if not waypoints:
        return legs
    heads = leg_headings(start.x, start.y, start.psi, waypoints)
    pose = start
    v = waypoints[0].speed if v0 is None else float(v0)
    z = z0
    for wp, h in zip(waypoints, heads):
        if not wp.speed > 0.0:
            raise ValueError("leg speeds must be positive")
        r = turn_radius(v, wp.speed, turn_rate) if radius is None else radius
        goal = Pose2D(wp.x, wp.y, h)
        path = dubins_shortest(pose, goal, r)
        dt, v_out = K.ramp_time(path.length, v, wp.speed, accel)
        z_end = getattr(wp, "z", z)
        legs.append(LegPlan(path, wp.speed, z, z_end, v, v_out, dt))
        pose, v, z = goal, v_out, z_end
    return legs


def sequence_eta(
    start: Pose2D,
    waypoints: Sequence,
    radius: float | None = None,
    *,
    v0: float | None = None,
    accel: float = 0.0,
    turn_rate: float = STANDARD_TURN_RATE,
) -> float:
    """Seconds to fly ``waypoints`` in order from ``start``."""
    if not waypoints:
        raise ValueError("waypoint list must be nonempty")
    legs = plan_legs(start, waypoints, radius, v0=v0, accel=accel, turn_rate=turn_rate)
    return math.fsum(leg.duration for leg in legs)


@dataclass
class ReferenceTrajectory:
    """Time-parameterised nominal flight through a waypoint chain.

    Used both to predict where an aircraft with a given time-to-go sits and
    to seed aircraft part-way along the chain.
    """

    start: Pose2D
    waypoints: Sequence
    z0: float
    v0: float
    accel: float = 0.0
    turn_rate: float = STANDARD_TURN_RATE
    legs: list[LegPlan] = field(init=False)
    starts: list[float] = field(init=False)
    total: float = field(init=False)

    def __post_init__(self):
        self.legs = plan_legs(
            self.start, self.waypoints, z0=self.z0, v0=self.v0, accel=self.accel, turn_rate=self.turn_rate
        )
        self.starts = []
        t = 0.0
        for leg in self.legs:
            self.starts.append(t)
            t += leg.duration
        self.total = t

    def locate(self, time_to_go: float):
        """``(leg_index, arc_length, speed, pose, z)`` at the given time-to-go."""
        if time_to_go < -1e-9 or time_to_go > self.total + 1e-9:
            raise ValueError(f"time-to-go {time_to_go} outside [0, {self.total}]")
        elapsed = min(max(self.total - time_to_go, 0.0), self.total)
        k = max(bisect.bisect_right(self.starts, elapsed) - 1, 0)
        leg = self.legs[k]
        s, v = K.ramp_distance(elapsed - self.starts[k], leg.v_in, leg.speed, self.accel)
        s = min(s, leg.length)
        return k, s, v, dubins_sample(leg.path, s), leg.altitude_at(s)
