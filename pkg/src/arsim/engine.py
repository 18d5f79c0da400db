"""Discrete-time simulation of the arrival flow with one forced go-around.

Aircraft enter at the chart entry fix spaced by ``T_s``; the designated gap
(and every ``gap_period``-th slot after it) is a double spacing. The
designated aircraft goes around at its first MAPt crossing and then flies
either the published missed approach or an ARS reinjection. All aircraft
are stepped at 1 s with full fuel accounting.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from arsim import ars
from arsim import dynamics as D
from arsim.chart import ApproachChart, builtin_malaga_rwy13, load_chart
from arsim.performance import (
    PerformanceModel,
    aggregate_step,
    instant_fuel,
    instant_thrust,
    load_performance,
)

DT = 1.0
GAP_SLACK = 2.0  # s, tolerance on the double-spacing gap test
BUILTIN_CHART = "builtin:malaga_rwy13"
BUILTIN_PERFORMANCE = "builtin:a320_synthetic"
PROCEDURES = ("conventional", "ars")
OUTCOMES = ("landed", "fallback_conventional", "timeout")

TRACE_COLUMNS = (
    "t_s", "aircraft_id", "x_m", "y_m", "z_m", "V_ms", "Vdot_ms2",
    "gamma_rad", "hdot_ms", "thrust_N", "F_kgmin", "Fa_kg",
)
SWEEP_COLUMNS = (
    "T_s_s", "distance_to_gap", "t_conv_s", "t_ars_s", "f_conv_kg", "f_ars_kg", "time_saving", "fuel_saving",
)


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ScenarioConfig:
    chart: str = BUILTIN_CHART
    performance: str = BUILTIN_PERFORMANCE
    T_s: float = 90.0
    T_1: float = ars.T_1_DEFAULT
    gap_period: int = 5
    distance_to_gap: int = 4
    procedure: str = "ars"
    limits: D.GuidanceLimits = field(default_factory=D.GuidanceLimits)
    go_around_altitude: float = 2133.6
    seed: int | None = None
    spawn_jitter: float = 0.0  # s, extra spacing drawn uniformly per spawn
    duration_cap: float = 20000.0
    flow_ahead: int | None = None  # default distance_to_gap + 4
    flow_behind: int | None = None
    gap_slack: float = GAP_SLACK
    trace: bool = False

    def __post_init__(self):
        if not self.T_s > 0.0:
            raise ConfigError("engine.T_s", "must be positive")
        if not self.T_1 > 0.0:
            raise ConfigError("engine.T_1", "must be positive")
        if self.gap_period < 1:
            raise ConfigError("engine.gap_period", "must be >= 1")
        if self.distance_to_gap < 0:
            raise ConfigError("engine.distance_to_gap", "must be >= 0")
        if self.procedure not in PROCEDURES:
            raise ConfigError("engine.procedure", f"expected one of {list(PROCEDURES)}")
        if not self.duration_cap > 0.0:
            raise ConfigError("engine.duration_cap", "must be positive")
        if self.spawn_jitter < 0.0:
            raise ConfigError("engine.spawn_jitter", "must be >= 0")
        if self.spawn_jitter > 0.0 and self.seed is None:
            raise ConfigError("engine.seed", "required when spawn_jitter > 0")

    @property
    def n_ahead(self) -> int:
        return self.distance_to_gap + 4 if self.flow_ahead is None else self.flow_ahead

    @property
    def n_behind(self) -> int:
        return self.distance_to_gap + 4 if self.flow_behind is None else self.flow_behind


@dataclass
class RunReport:
    config: ScenarioConfig
    outcome: str
    maneuver_time: float | None
    maneuver_fuel: float | None
    t_mapt: tuple[float | None, float | None]
    fuel_at_mapt: tuple[float | None, float | None]
    separation_min: float | None
    missed_id: int
    plan: dict | None = None
    traffic: dict = field(default_factory=dict)  # spawned / landed / airborne counts
    trace: np.ndarray | None = field(default=None, repr=False)  # rows of TRACE_COLUMNS

    def summary(self) -> dict:
        return {
            "procedure": self.config.procedure,
            "T_s": self.config.T_s,
            "distance_to_gap": self.config.distance_to_gap,
            "outcome": self.outcome,
            "maneuver_time": self.maneuver_time,
            "maneuver_fuel": self.maneuver_fuel,
            "t_mapt": list(self.t_mapt),
            "fuel_at_mapt": list(self.fuel_at_mapt),
            "separation_min": self.separation_min,
            "missed_id": self.missed_id,
            "plan": self.plan,
            "traffic": self.traffic,
        }


def resolve_chart(ref: str | ApproachChart) -> ApproachChart:
    if isinstance(ref, ApproachChart):
        return ref
    if ref == BUILTIN_CHART:
        return builtin_malaga_rwy13()
    return load_chart(ref)


def spawn_schedule(config: ScenarioConfig) -> tuple[list[float], int]:
    """Spawn times and the index of the aircraft that goes around.

    The designated gap follows the ``distance_to_gap``-th aircraft behind
    the missed one; further gaps repeat every ``gap_period`` aircraft.
    """
    m = config.n_ahead
    n = m + 1 + config.n_behind
    first_gap = m + config.distance_to_gap  # gap between this index and the next
    rng = np.random.default_rng(config.seed) if config.spawn_jitter > 0.0 else None
    times = [0.0]
    for i in range(1, n):
        prev = i - 1
        double = prev >= first_gap and (prev - first_gap) % config.gap_period == 0
        dt = config.T_s * (2.0 if double else 1.0)
        if rng is not None:
            dt += float(rng.uniform(0.0, config.spawn_jitter))
        times.append(times[-1] + dt)
    return times, m


def separation_monitor(etas: Iterable[float]) -> float | None:
    """Smallest ETA difference between consecutive aircraft, None for < 2."""
    e = sorted(etas)
    if len(e) < 2:
        return None
    return min(b - a for a, b in zip(e, e[1:]))


def _flow_snapshot(aircraft, pending, t, e_entry, limits, exclude) -> list[ars.FlowEntry]:
    flow = [ars.FlowEntry(a.id, D.eta(a, limits)) for a in aircraft if a.id != exclude]
    flow += [ars.FlowEntry(i, e_entry + (ts - t)) for i, ts in pending]
    flow.sort(key=lambda f: (f.eta, f.id))
    return flow


def run(config: ScenarioConfig, chart: ApproachChart | None = None, model: PerformanceModel | None = None) -> RunReport:
    chart = chart or resolve_chart(config.chart)
    model = model or load_performance(config.performance)
    limits = config.limits
    reference = D.nominal_reference(chart, limits)
    e_entry = reference.total

    times, missed_id = spawn_schedule(config)
    pending = list(enumerate(times))  # (id, spawn time), in time order
    airborne: list[D.AircraftState] = []
    rows: list[tuple] = []

    t_mapt = [None, None]
    fuel_mapt = [None, None]
    sep_min = None
    plan_doc = None
    fallback = False
    missed = None
    monitoring = False
    n_spawned = n_landed = 0

    t = 0.0
    while t <= config.duration_cap:
        while pending and pending[0][1] <= t:
            i, ts = pending.pop(0)
            role = "missed" if i == missed_id else "normal"
            airborne.append(D.spawn(chart, ts, role, i))
            n_spawned += 1
            if i == missed_id:
                missed = airborne[-1]
        landed = []
        for a in airborne:
            _, smp, events = D.step(a, limits, DT)
            thrust = instant_thrust(model, smp)
            F = instant_fuel(model, smp, thrust)
            aggregate_step(a.ledger, F, DT)
            if plan_doc is not None and a is missed and ("captured", "REINJ") in events:
                plan_doc["reinjection_reached_at"] = t + DT
            if config.trace:
                rows.append((t + DT, a.id, a.x, a.y, a.z, smp.V, smp.Vdot, smp.gamma, smp.hdot, thrust, F, a.ledger.F_a))
            if a.completed:
                landed.append(a)
        t += DT
        for a in landed:
            if a is not missed:
                airborne.remove(a)
                n_landed += 1
                continue
            k = 0 if t_mapt[0] is None else 1
            t_mapt[k] = t
            fuel_mapt[k] = a.ledger.F_a
            if k == 1:
                airborne.remove(a)
                n_landed += 1
                continue
            # go-around
            if config.procedure == "ars":
                flow = _flow_snapshot(airborne, pending, t, e_entry, limits, a.id)
                gap = ars.find_gap(flow, config.T_s, config.T_1, 0.0, e_entry, config.gap_slack)
                plan = None
                if gap is not None:
                    try:
                        plan = ars.solve_reinjection(a, gap, reference, limits, config.go_around_altitude)
                    except ars.UnreachableGap:
                        plan = None
                if plan is None:
                    fallback = True
                    ars.activate_conventional(a, chart)
                else:
                    plan_doc = plan.to_document()
                    plan_doc["activated_at"] = t
                    a.set_sequence(plan.sequence)
            else:
                ars.activate_conventional(a, chart)
            monitoring = True
        if t_mapt[1] is not None:
            break
        if monitoring:
            s = separation_monitor(D.eta(a, limits) for a in airborne)
            if s is not None and (sep_min is None or s < sep_min):
                sep_min = s

    if t_mapt[1] is None:
        outcome = "timeout"
        m_time = m_fuel = None
    else:
        outcome = "fallback_conventional" if fallback else "landed"
        m_time = t_mapt[1] - t_mapt[0]
        m_fuel = fuel_mapt[1] - fuel_mapt[0]
    trace = np.array(rows, dtype=float).reshape(-1, len(TRACE_COLUMNS)) if config.trace else None
    traffic = {"spawned": n_spawned, "landed": n_landed, "airborne": len(airborne), "scheduled": len(times)}
    return RunReport(
        config, outcome, m_time, m_fuel, tuple(t_mapt), tuple(fuel_mapt), sep_min, missed_id, plan_doc, traffic, trace
    )


@dataclass(frozen=True)
class SweepCell:
    T_s: float
    distance_to_gap: int
    conv: RunReport
    ars: RunReport

    @property
    def failed(self) -> bool:
        return self.conv.maneuver_time is None or self.ars.maneuver_time is None

    @property
    def time_saving(self) -> float:
        return math.nan if self.failed else 1.0 - self.ars.maneuver_time / self.conv.maneuver_time

    @property
    def fuel_saving(self) -> float:
        return math.nan if self.failed else 1.0 - self.ars.maneuver_fuel / self.conv.maneuver_fuel

    def row(self) -> tuple:
        return (
            self.T_s, self.distance_to_gap, self.conv.maneuver_time, self.ars.maneuver_time,
            self.conv.maneuver_fuel, self.ars.maneuver_fuel, self.time_saving, self.fuel_saving,
        )


def _pair(base: ScenarioConfig, T_s: float, d: int) -> tuple[RunReport, RunReport]:
    chart = resolve_chart(base.chart)
    model = load_performance(base.performance)
    cfg = replace(base, T_s=float(T_s), distance_to_gap=int(d), trace=False)
    return (
        run(replace(cfg, procedure="conventional"), chart, model),
        run(replace(cfg, procedure="ars"), chart, model),
    )


def sweep(base: ScenarioConfig, T_s_list: Sequence[float], distances: Sequence[int], jobs: int = 1) -> list[SweepCell]:
    """Paired conventional/ARS runs over the grid; identical traffic within each pair."""
    if not T_s_list or not distances:
        raise ValueError("sweep lists must be nonempty")
    grid = [(float(ts), int(d)) for ts in T_s_list for d in distances]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            pairs = list(pool.map(_pair, [base] * len(grid), *zip(*grid)))
    else:
        pairs = [_pair(base, ts, d) for ts, d in grid]
    return [SweepCell(ts, d, c, a) for (ts, d), (c, a) in zip(grid, pairs)]


# ---- configuration documents ----

_ENGINE_KEYS = {
    "T_s": float, "T_1": float, "gap_period": int, "distance_to_gap": int, "procedure": str,
    "go_around_altitude": float, "seed": int, "spawn_jitter": float, "duration_cap": float,
    "flow_ahead": int, "flow_behind": int, "gap_slack": float,
}
_GUIDANCE_KEYS = {"turn_rate_deg_s": "turn_rate", "accel": "accel", "climb": "climb", "descent": "descent",
                  "capture_radius": "capture_radius"}

DEFAULT_SWEEP = {"T_s": [60, 90, 120, 150, 180], "distance_to_gap": [1, 2, 3, 4, 5, 6, 7, 8]}


def default_document() -> dict:
    return {
        "chart": BUILTIN_CHART,
        "performance": BUILTIN_PERFORMANCE,
        "engine": {
            "T_s": 90.0, "T_1": ars.T_1_DEFAULT, "gap_period": 5, "distance_to_gap": 4, "procedure": "ars",
            "go_around_altitude": 2133.6, "seed": None, "spawn_jitter": 0.0, "duration_cap": 20000.0,
            "flow_ahead": None, "flow_behind": None, "gap_slack": GAP_SLACK,
        },
        "guidance": {"turn_rate_deg_s": 3.0, "accel": 0.6, "climb": 12.0, "descent": 8.0, "capture_radius": 300.0},
        "sweep": copy.deepcopy(DEFAULT_SWEEP),
    }


def _typed(val, kind, path):
    if val is None:
        return None
    if kind is str:
        if not isinstance(val, str):
            raise ConfigError(path, f"expected a string, got {val!r}")
        return val
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(path, f"expected a number, got {val!r}")
    if kind is int:
        if float(val) != int(val):
            raise ConfigError(path, f"expected an integer, got {val!r}")
        return int(val)
    if not math.isfinite(val):
        raise ConfigError(path, "must be finite")
    return float(val)


def _resolve_ref(ref, base_dir: str | None, path: str) -> str:
    if not isinstance(ref, str):
        raise ConfigError(path, "expected a string reference")
    if ref.startswith("builtin:"):
        if ref not in (BUILTIN_CHART, BUILTIN_PERFORMANCE):
            raise ConfigError(path, f"unknown builtin {ref!r}")
        return ref
    if base_dir and not os.path.isabs(ref):
        ref = os.path.join(base_dir, ref)
    return ref


def config_from_document(doc: Mapping, base_dir: str | None = None) -> ScenarioConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("$", "scenario must be an object")
    unknown = set(doc) - {"chart", "performance", "engine", "guidance", "sweep"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    eng = doc.get("engine", {})
    if not isinstance(eng, Mapping):
        raise ConfigError("engine", "expected an object")
    kw = {}
    for k, v in eng.items():
        if k not in _ENGINE_KEYS:
            raise ConfigError(f"engine.{k}", "unknown field")
        val = _typed(v, _ENGINE_KEYS[k], f"engine.{k}")
        if val is not None:
            kw[k] = val
    gd = doc.get("guidance", {})
    if not isinstance(gd, Mapping):
        raise ConfigError("guidance", "expected an object")
    gkw = {}
    for k, v in gd.items():
        if k not in _GUIDANCE_KEYS:
            raise ConfigError(f"guidance.{k}", "unknown field")
        val = _typed(v, float, f"guidance.{k}")
        if val is not None:
            gkw[_GUIDANCE_KEYS[k]] = math.radians(val) if k == "turn_rate_deg_s" else val
    try:
        limits = D.GuidanceLimits(**gkw)
    except ValueError as exc:
        raise ConfigError("guidance", str(exc)) from None
    chart = _resolve_ref(doc.get("chart", BUILTIN_CHART), base_dir, "chart")
    perf = _resolve_ref(doc.get("performance", BUILTIN_PERFORMANCE), base_dir, "performance")
    return ScenarioConfig(chart=chart, performance=perf, limits=limits, **kw)


def sweep_lists(doc: Mapping) -> tuple[list[float], list[int]]:
    sw = doc.get("sweep", DEFAULT_SWEEP)
    if not isinstance(sw, Mapping):
        raise ConfigError("sweep", "expected an object")
    out = []
    for key, kind in (("T_s", float), ("distance_to_gap", int)):
        vals = sw.get(key, DEFAULT_SWEEP[key])
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"sweep.{key}", "expected a nonempty list")
        out.append([_typed(v, kind, f"sweep.{key}[{i}]") for i, v in enumerate(vals)])
    return out[0], out[1]


def apply_override(doc: dict, assignment: str) -> dict:
    """Apply a dotted ``key.path=value`` override; the value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key.path=value")
    key, raw = assignment.split("=", 1)
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw
    node = doc
    parts = key.strip().split(".")
    for p in parts[:-1]:
        nxt = node.get(p)
        if nxt is None:
            nxt = node[p] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(key, f"{p} is not an object")
        node = nxt
    node[parts[-1]] = val
    return doc


# ---- output ----

def fmt(v) -> str:
    """Fixed 9-significant-digit formatting for reproducible files."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.9g}"


def _round_json(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) else float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: _round_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_json(v) for v in obj]
    return obj


def atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(_round_json(obj), indent=2, sort_keys=True) + "\n"


def trace_rows(trace: np.ndarray):
    for r in trace:
        yield (r[0], int(r[1]), *r[2:])


def write_trace(path: str, report: RunReport) -> None:
    if report.trace is None:
        raise ValueError("run was executed without a trace")
    atomic_write(path, csv_text(TRACE_COLUMNS, trace_rows(report.trace)))


def write_summary(path: str, report: RunReport) -> None:
    atomic_write(path, json_text(report.summary()))


def write_sweep(path: str, cells: Sequence[SweepCell]) -> None:
    atomic_write(path, csv_text(SWEEP_COLUMNS, (c.row() for c in cells)))


def missed_trace(report: RunReport) -> np.ndarray:
    """Trace rows of the missed aircraft."""
    tr = report.trace
    return tr[tr[:, 1] == report.missed_id]


__all__ = [
    "ScenarioConfig", "RunReport", "SweepCell", "ConfigError", "run", "sweep", "separation_monitor",
    "spawn_schedule", "config_from_document", "default_document", "apply_override", "sweep_lists",
    "write_trace", "write_summary", "write_sweep", "atomic_write", "csv_text", "json_text", "fmt",
    "missed_trace", "resolve_chart", "TRACE_COLUMNS", "SWEEP_COLUMNS", "GAP_SLACK", "DT",
]
