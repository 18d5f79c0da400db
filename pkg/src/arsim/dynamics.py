"""Per-aircraft guidance and point-mass kinematics.

Each leg toward the target waypoint is flown along its Dubins reference:
the aircraft advances by its mean horizontal speed over the tick and takes
the pose and heading of the reference at that arc length. Leg radii are
sized for the fastest speed reached on the leg at the configured turn rate,
so heading never changes faster than the turn-rate limit.

Vertical guidance climbs at the maximum rate toward a higher target and
descends on a constant path that reaches the target altitude together with
the waypoint, clipped to the descent-rate limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from arsim import kernels as K
from arsim.chart import ApproachChart, ApproachSequence
from arsim.geometry import (
    STANDARD_TURN_RATE,
    LegPlan,
    Pose2D,
    ReferenceTrajectory,
    bearing,
    dubins_sample,
    dubins_shortest,
    leg_headings,
    sequence_eta,
    turn_radius,
)
from arsim.performance import FlightSample, FuelLedger

ROLES = ("normal", "missed", "ghost")


class GuidanceError(RuntimeError):
    pass


@dataclass(frozen=True)
class GuidanceLimits:
    turn_rate: float = STANDARD_TURN_RATE  # rad/s
    accel: float = 0.6  # m/s^2
    climb: float = 12.0  # m/s
    descent: float = 8.0  # m/s
    capture_radius: float = 300.0  # m

    def __post_init__(self):
        for name in ("turn_rate", "accel", "climb", "descent", "capture_radius"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"guidance limit {name} must be positive")


@dataclass
class AircraftState:
    id: int
    role: str
    x: float
    y: float
    z: float
    psi: float
    V: float  # horizontal speed, m/s
    sequence: ApproachSequence
    target: int = 0
    leg: LegPlan | None = None
    s: float = 0.0  # progress along leg.path
    ledger: FuelLedger = field(default_factory=FuelLedger)
    spawn_time: float = 0.0
    completed: bool = False
    V_prev: float | None = None  # total airspeed on the previous tick
    _tail: float | None = field(default=None, repr=False)

    @property
    def pose(self) -> Pose2D:
        return Pose2D(self.x, self.y, self.psi)

    @property
    def target_waypoint(self):
        return self.sequence[self.target]

    def set_sequence(self, sequence: ApproachSequence, target: int = 0) -> None:
        """Replace the active route; the next leg starts from the current pose."""
        self.sequence = sequence
        self.target = target
        self.leg = None
        self.s = 0.0
        self._tail = None
        self.completed = False


def _leg_to_target(state: AircraftState, limits: GuidanceLimits) -> None:
    wps = state.sequence.waypoints[state.target:]
    heads = leg_headings(state.x, state.y, state.psi, wps)
    wp = wps[0]
    r = turn_radius(state.V, wp.speed, limits.turn_rate)
    path = dubins_shortest(state.pose, Pose2D(wp.x, wp.y, heads[0]), r)
    dt, v_out = K.ramp_time(path.length, state.V, wp.speed, limits.accel)
    state.leg = LegPlan(path, wp.speed, state.z, wp.z, state.V, v_out, dt)
    state.s = 0.0
    state._tail = None


def _capture(state: AircraftState, events: list) -> None:
    events.append(("captured", state.target_waypoint.name))
    state.target += 1
    state.leg = None
    state._tail = None
    if state.target >= len(state.sequence):
        state.target = len(state.sequence) - 1
        state.completed = True
        events.append(("completed", state.sequence[-1].name))


def ensure_leg(state: AircraftState, limits: GuidanceLimits, events: list) -> None:
    """Build the leg toward the target, capturing fixes already within range."""
    while state.leg is None and not state.completed:
        wp = state.target_waypoint
        if math.hypot(wp.x - state.x, wp.y - state.y) < limits.capture_radius:
            _capture(state, events)
            continue
        _leg_to_target(state, limits)


def step(state: AircraftState, limits: GuidanceLimits, dt: float = 1.0):
    """Advance one tick. Returns ``(state, FlightSample, events)``; mutates ``state``."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if state.completed or len(state.sequence) == 0:
        raise GuidanceError(f"aircraft {state.id} has no active waypoint to fly")
    events: list = []
    ensure_leg(state, limits, events)
    if state.completed:
        # every remaining fix was already within capture range: hold course this tick
        state.x += state.V * dt * math.cos(state.psi)
        state.y += state.V * dt * math.sin(state.psi)
        return state, _sample(state, state.V, 0.0, dt), events
    leg = state.leg
    wp = state.target_waypoint

    v0 = state.V
    dv = leg.speed - v0
    lim = limits.accel * dt
    v1 = v0 + min(max(dv, -lim), lim)

    dz = wp.z - state.z
    if dz > 0.0:
        hdot = min(limits.climb, dz / dt)
    elif dz < 0.0:
        t_rem = K.ramp_time(leg.length - state.s, v0, leg.speed, limits.accel)[0]
        hdot = max(-limits.descent, dz / max(t_rem, dt))
    else:
        hdot = 0.0
    state.z += hdot * dt

    dist = 0.5 * (v0 + v1) * dt
    state.V = v1
    while True:
        leg = state.leg
        remaining = leg.length - state.s
        if dist < remaining:
            state.s += dist
            break
        dist -= remaining
        end = leg.path.end
        state.x, state.y, state.psi = end.x, end.y, end.psi
        state.s = leg.length
        _capture(state, events)
        if state.completed:
            break
        ensure_leg(state, limits, events)
        if state.completed:
            break
    if not state.completed:
        p = dubins_sample(state.leg.path, state.s)
        state.x, state.y, state.psi = p.x, p.y, p.psi

    return state, _sample(state, v1, hdot, dt), events


def _sample(state: AircraftState, v_h: float, hdot: float, dt: float) -> FlightSample:
    vt = math.sqrt(v_h * v_h + hdot * hdot)
    vdot = 0.0 if state.V_prev is None else (vt - state.V_prev) / dt
    state.V_prev = vt
    return FlightSample(vt, vdot, math.asin(hdot / vt), state.z, hdot)


def eta(state: AircraftState, limits: GuidanceLimits) -> float:
    """Predicted seconds until the last waypoint of the active sequence."""
    if state.completed:
        return 0.0
    if state.leg is None:
        wps = state.sequence.waypoints[state.target:]
        return sequence_eta(state.pose, wps, v0=state.V, accel=limits.accel, turn_rate=limits.turn_rate)
    leg = state.leg
    if state._tail is None:
        rest = state.sequence.waypoints[state.target + 1:]
        state._tail = (
            sequence_eta(leg.path.end, rest, v0=leg.v_out, accel=limits.accel, turn_rate=limits.turn_rate)
            if rest
            else 0.0
        )
    here = K.ramp_time(leg.length - state.s, state.V, leg.speed, limits.accel)[0]
    return here + state._tail


def entry_pose(chart: ApproachChart) -> Pose2D:
    e = chart.entry
    nxt = chart.approach[0]
    return Pose2D(e.x, e.y, bearing(e.x, e.y, nxt.x, nxt.y))


def nominal_reference(chart: ApproachChart, limits: GuidanceLimits) -> ReferenceTrajectory:
    """Reference flight of a freshly spawned aircraft from entry to the runway."""
    e = chart.entry
    return ReferenceTrajectory(
        entry_pose(chart), chart.approach.waypoints, e.z, e.speed, limits.accel, limits.turn_rate
    )


def spawn(
    chart: ApproachChart,
    t: float,
    role: str = "normal",
    id: int = 0,
    *,
    time_to_go: float | None = None,
    reference: ReferenceTrajectory | None = None,
    limits: GuidanceLimits | None = None,
) -> AircraftState:
    """New aircraft at the chart entry, or part-way along the nominal reference.

    With ``time_to_go`` the aircraft is placed where the nominal reference is
    that many seconds before the runway (used for ghost aircraft).
    """
    if role not in ROLES:
        raise ValueError(f"unknown role {role!r}")
    seq = chart.approach
    if time_to_go is None:
        p = entry_pose(chart)
        e = chart.entry
        return AircraftState(id, role, p.x, p.y, e.z, p.psi, e.speed, seq, spawn_time=t)
    if reference is None:
        reference = nominal_reference(chart, limits or GuidanceLimits())
    k, s, v, pose, z = reference.locate(time_to_go)
    st = AircraftState(id, role, pose.x, pose.y, z, pose.psi, v, seq, target=k, spawn_time=t)
    st.leg = reference.legs[k]
    st.s = s
    return st


__all__ = [
    "GuidanceLimits",
    "AircraftState",
    "GuidanceError",
    "step",
    "eta",
    "spawn",
    "ensure_leg",
    "entry_pose",
    "nominal_reference",
]
