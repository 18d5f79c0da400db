"""Approach charts: waypoints, the nominal sequence, MAPt and missed-approach route."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

FRAME = "runway-touchdown-meters"
NM = 1852.0
MISSED_LEG_NM = 20.0


class ChartError(ValueError):
    """Invalid chart document; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Waypoint:
    name: str
    x: float
    y: float
    z: float
    speed: float  # horizontal speed commanded toward this fix, m/s
    heading: float | None = None  # crossing heading, rad; None = toward the next fix

    def __post_init__(self):
        if not self.speed > 0.0:
            raise ValueError(f"waypoint {self.name}: speed must be positive, got {self.speed}")
        if not self.z >= 0.0:
            raise ValueError(f"waypoint {self.name}: z must be >= 0, got {self.z}")

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class ApproachSequence:
    waypoints: tuple[Waypoint, ...]

    def __post_init__(self):
        wps = tuple(self.waypoints)
        object.__setattr__(self, "waypoints", wps)
        if not wps:
            raise ValueError("approach sequence must be nonempty")
        for a, b in zip(wps, wps[1:]):
            if a.position == b.position:
                raise ValueError(f"consecutive waypoints {a.name} and {b.name} share a position")

    def __len__(self):
        return len(self.waypoints)

    def __iter__(self):
        return iter(self.waypoints)

    def __getitem__(self, i):
        return self.waypoints[i]

    @property
    def names(self) -> list[str]:
        return [w.name for w in self.waypoints]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def starting_at(self, name: str) -> "ApproachSequence":
        return ApproachSequence(self.waypoints[self.index(name):])


@dataclass(frozen=True)
class ApproachChart:
    name: str
    nominal: ApproachSequence
    mapt: Waypoint
    missed_route: ApproachSequence
    entry: Waypoint
    extra: tuple[Waypoint, ...] = field(default=())  # charted but not flown (runway end, ...)

    def __post_init__(self):
        names = self.nominal.names
        if self.mapt.name not in names:
            raise ChartError("mapt", f"{self.mapt.name!r} is not on the nominal sequence")
        if self.entry.name not in names:
            raise ChartError("entry", f"{self.entry.name!r} is not on the nominal sequence")
        if self.missed_route[-1].name not in names:
            raise ChartError("missed_route", "route does not rejoin the nominal sequence")

    @property
    def waypoints(self) -> dict[str, Waypoint]:
        out: dict[str, Waypoint] = {}
        for w in (*self.nominal, *self.missed_route, *self.extra):
            out.setdefault(w.name, w)
        return out

    @property
    def approach(self) -> ApproachSequence:
        """Fixes flown after entry, i.e. the entry fix itself excluded."""
        return ApproachSequence(self.nominal.waypoints[self.nominal.index(self.entry.name) + 1:])

    @property
    def runway_heading(self) -> float:
        """Bearing of the final segment into the MAPt (rad, CCW from east)."""
        i = self.nominal.index(self.mapt.name)
        prev = self.nominal[i - 1] if i > 0 else self.entry
        return math.atan2(self.mapt.y - prev.y, self.mapt.x - prev.x)

    def missed_sequence(self) -> ApproachSequence:
        rejoin = self.missed_route[-1].name
        tail = self.nominal.starting_at(rejoin).waypoints[1:]
        return ApproachSequence(self.missed_route.waypoints + tail)


# Table values, metres and m/s
MALAGA_RWY13 = {
    "LOJAS": (32115.94, 7950.47, 2133.60, 123.47),
    "TOLSU": (3788.66, 49848.85, 2133.60, 123.47),
    "MARTIN": (-38123.21, 41103.20, 2133.60, 123.47),
    "MG403": (-29788.86, 28279.77, 1524.0, 123.47),
    "MG402": (-26759.25, 23616.67, 1524.0, 82.31),
    "MG401": (-16175.05, 14299.41, 1280.16, 82.31),
    "LTP": (55.74, -53.08, 15.85, 72.02),
    "RWY13": (2179.44, -2035.92, 15.85, 25.72),
    "XILVI": (36907.56, -7831.11, 670.56, 113.18),
}
MALAGA_NOMINAL = ("LOJAS", "TOLSU", "MARTIN", "MG403", "MG402", "MG401", "LTP")


def _wp(name: str, row) -> Waypoint:
    return Waypoint(name, *row)


def builtin_malaga_rwy13() -> ApproachChart:
    """The Malaga RWY 13 procedure with its conventional missed approach.

    The runway-heading climb is synthesised as a fix 20 NM from the MAPt along
    the LTP->runway-end bearing, at XILVI's altitude and speed.
    """
    t = {k: _wp(k, v) for k, v in MALAGA_RWY13.items()}
    ltp, end, xilvi = t["LTP"], t["RWY13"], t["XILVI"]
    hdg = math.atan2(end.y - ltp.y, end.x - ltp.x)
    dist = MISSED_LEG_NM * NM
    ma = Waypoint(
        "MA20NM",
        ltp.x + dist * math.cos(hdg),
        ltp.y + dist * math.sin(hdg),
        xilvi.z,
        xilvi.speed,
    )
    return ApproachChart(
        name="LEMG RWY13",
        nominal=ApproachSequence(tuple(t[n] for n in MALAGA_NOMINAL)),
        mapt=ltp,
        missed_route=ApproachSequence((ma, xilvi, t["TOLSU"])),
        entry=t["LOJAS"],
        extra=(end,),
    )


def chart_to_document(chart: ApproachChart) -> dict:
    wps = chart.waypoints
    return {
        "name": chart.name,
        "frame": FRAME,
        "waypoints": [
            {"name": w.name, "x": w.x, "y": w.y, "z": w.z, "speed": w.speed} for w in wps.values()
        ],
        "nominal": chart.nominal.names,
        "mapt": chart.mapt.name,
        "missed_route": chart.missed_route.names,
        "entry": chart.entry.name,
    }


def _require(doc: Mapping, key: str, kind, path: str = ""):
    where = f"{path}.{key}" if path else key
    if key not in doc:
        raise ChartError(where, "missing required field")
    val = doc[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            raise ChartError(where, f"expected a finite number, got {val!r}")
        return float(val)
    if not isinstance(val, kind):
        raise ChartError(where, f"expected {kind.__name__}, got {type(val).__name__}")
    return val


def _names(doc: Mapping, key: str, table: Mapping[str, Waypoint]) -> ApproachSequence:
    names = _require(doc, key, list)
    if not names:
        raise ChartError(key, "must list at least one waypoint")
    seq = []
    for i, n in enumerate(names):
        if n not in table:
            raise ChartError(f"{key}[{i}]", f"unknown waypoint {n!r}")
        seq.append(table[n])
    try:
        return ApproachSequence(tuple(seq))
    except ValueError as exc:
        raise ChartError(key, str(exc)) from None


def load_chart(document) -> ApproachChart:
    """Parse and validate a chart document (dict, JSON text or file path)."""
    if isinstance(document, (str, os.PathLike)):
        text = str(document)
        if not text.lstrip().startswith("{"):
            with open(document, encoding="utf-8") as fh:
                text = fh.read()
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ChartError("$", f"invalid JSON: {exc.msg}") from None
    if not isinstance(document, Mapping):
        raise ChartError("$", "chart document must be an object")
    name = _require(document, "name", str)
    frame = _require(document, "frame", str)
    if frame != FRAME:
        raise ChartError("frame", f"unsupported frame {frame!r}")
    rows = _require(document, "waypoints", list)
    table: dict[str, Waypoint] = {}
    for i, row in enumerate(rows):
        where = f"waypoints[{i}]"
        if not isinstance(row, Mapping):
            raise ChartError(where, "expected an object")
        wname = _require(row, "name", str, where)
        if wname in table:
            raise ChartError(f"{where}.name", f"duplicate waypoint name {wname!r}")
        vals = [_require(row, k, float, where) for k in ("x", "y", "z", "speed")]
        if not vals[3] > 0.0:
            raise ChartError(f"{where}.speed", "speed must be positive")
        if not vals[2] >= 0.0:
            raise ChartError(f"{where}.z", "altitude must be non-negative")
        table[wname] = Waypoint(wname, *vals)
    nominal = _names(document, "nominal", table)
    missed = _names(document, "missed_route", table)
    mapt = _require(document, "mapt", str)
    entry = _require(document, "entry", str)
    for key, val in (("mapt", mapt), ("entry", entry)):
        if val not in table:
            raise ChartError(key, f"unknown waypoint {val!r}")
    if missed[-1].name not in nominal.names:
        raise ChartError("missed_route", "route does not rejoin the nominal sequence")
    used = set(nominal.names) | set(missed.names)
    extra = tuple(w for n, w in table.items() if n not in used)
    return ApproachChart(name, nominal, table[mapt], missed, table[entry], extra)


def dump_chart(chart: ApproachChart) -> str:
    return json.dumps(chart_to_document(chart), indent=2)


def charts_equal(a: ApproachChart, b: ApproachChart, tol: float = 1e-9) -> bool:
    """Structural equality with numeric tolerance."""

    def same(wa: Iterable[Waypoint], wb: Iterable[Waypoint]) -> bool:
        wa, wb = list(wa), list(wb)
        if [w.name for w in wa] != [w.name for w in wb]:
            return False
        return all(
            abs(p - q) <= tol
            for u, v in zip(wa, wb)
            for p, q in zip((u.x, u.y, u.z, u.speed), (v.x, v.y, v.z, v.speed))
        )

    return (
        a.name == b.name
        and same(a.nominal, b.nominal)
        and same(a.missed_route, b.missed_route)
        and same([a.mapt, a.entry], [b.mapt, b.entry])
        and same(sorted(a.waypoints.values(), key=lambda w: w.name), sorted(b.waypoints.values(), key=lambda w: w.name))
    )
