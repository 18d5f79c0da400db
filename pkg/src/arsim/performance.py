"""BADA3-style point-mass performance: lift, drag, total-energy thrust and fuel flow.

Coefficients are supplied by a JSON config. The shipped default
(``a320_synthetic``) is a plausible stand-in, *not* licensed BADA data;
licensed users should substitute the real A320 OPF values.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from typing import Mapping

from arsim import kernels as K
from arsim.kernels import FT, G0, KT

CONFIGS = ("CR", "IC", "AP")
# kernel polar index -> configuration name
_POLAR_NAMES = ("IC", "AP", "CR")


class PerformanceConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class DragPolar:
    cd0: float
    cd2: float

    def __post_init__(self):
        if not (self.cd0 > 0.0 and self.cd2 > 0.0):
            raise ValueError("drag polar coefficients must be positive")


@dataclass(frozen=True)
class FuelCoefficients:
    cf1: float  # kg/(min*kN)
    cf2: float  # kt
    cf3: float  # kg/min
    cf4: float  # ft
    cfcr: float = 1.0  # cruise correction; stored only

    def __post_init__(self):
        if min(self.cf1, self.cf2, self.cf3, self.cf4, self.cfcr) <= 0.0:
            raise ValueError("fuel coefficients must be positive")


@dataclass(frozen=True)
class PerformanceModel:
    type: str
    mass: float  # kg, held constant
    wing_area: float  # m^2
    polars: Mapping[str, DragPolar]
    fuel: FuelCoefficients
    idle_altitude_ft: float = 2000.0

    def __post_init__(self):
        if not (self.mass > 0.0 and self.wing_area > 0.0):
            raise ValueError("mass and wing area must be positive")
        missing = set(CONFIGS) - set(self.polars)
        if missing:
            raise ValueError(f"missing drag polars for {sorted(missing)}")

    @property
    def weight(self) -> float:
        return self.mass * G0


@dataclass(frozen=True)
class FlightSample:
    V: float  # true airspeed, m/s
    Vdot: float  # m/s^2
    gamma: float  # rad
    h: float  # m
    hdot: float  # m/s

    def __post_init__(self):
        if not self.V > 0.0:
            raise ValueError("airspeed must be positive")


@dataclass
class FuelLedger:
    F: float = 0.0  # kg/min
    F_a: float = 0.0  # kg


A320_SYNTHETIC = {
    "type": "A320",
    "label": "synthetic-plausible coefficients, not licensed BADA data",
    "mass_kg": 64000.0,
    "wing_area_m2": 122.6,
    "polar": {
        "CR": {"cd0": 0.0240, "cd2": 0.0375},
        "IC": {"cd0": 0.0320, "cd2": 0.0410},
        "AP": {"cd0": 0.0460, "cd2": 0.0430},
    },
    "fuel": {"cf1": 0.94, "cf2": 1000.0, "cf3": 9.2, "cf4": 40000.0, "cfcr": 1.0},
    "idle_altitude_ft": 2000.0,
}


def _num(doc: Mapping, key: str, path: str) -> float:
    where = f"{path}.{key}" if path else key
    if key not in doc:
        raise PerformanceConfigError(where, "missing required field")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise PerformanceConfigError(where, f"expected a finite number, got {v!r}")
    if v <= 0:
        raise PerformanceConfigError(where, "must be positive")
    return float(v)


def model_from_document(doc: Mapping) -> PerformanceModel:
    if not isinstance(doc, Mapping):
        raise PerformanceConfigError("$", "performance config must be an object")
    for key in ("type", "polar", "fuel"):
        if key not in doc:
            raise PerformanceConfigError(key, "missing required field")
    polar = doc["polar"]
    if not isinstance(polar, Mapping):
        raise PerformanceConfigError("polar", "expected an object")
    polars = {}
    for cfg in CONFIGS:
        if cfg not in polar:
            raise PerformanceConfigError(f"polar.{cfg}", "missing required field")
        polars[cfg] = DragPolar(_num(polar[cfg], "cd0", f"polar.{cfg}"), _num(polar[cfg], "cd2", f"polar.{cfg}"))
    fuel = doc["fuel"]
    if not isinstance(fuel, Mapping):
        raise PerformanceConfigError("fuel", "expected an object")
    coeffs = FuelCoefficients(*(_num(fuel, k, "fuel") for k in ("cf1", "cf2", "cf3", "cf4", "cfcr")))
    return PerformanceModel(
        type=str(doc["type"]),
        mass=_num(doc, "mass_kg", ""),
        wing_area=_num(doc, "wing_area_m2", ""),
        polars=polars,
        fuel=coeffs,
        idle_altitude_ft=_num(doc, "idle_altitude_ft", ""),
    )


def model_to_document(model: PerformanceModel) -> dict:
    f = model.fuel
    return {
        "type": model.type,
        "mass_kg": model.mass,
        "wing_area_m2": model.wing_area,
        "polar": {c: {"cd0": model.polars[c].cd0, "cd2": model.polars[c].cd2} for c in CONFIGS},
        "fuel": {"cf1": f.cf1, "cf2": f.cf2, "cf3": f.cf3, "cf4": f.cf4, "cfcr": f.cfcr},
        "idle_altitude_ft": model.idle_altitude_ft,
    }


def load_performance(source) -> PerformanceModel:
    """Load from a mapping, a JSON file path, or ``"builtin:a320_synthetic"``."""
    if isinstance(source, Mapping):
        return model_from_document(source)
    if str(source) == "builtin:a320_synthetic":
        return model_from_document(A320_SYNTHETIC)
    if not os.path.exists(source):
        raise PerformanceConfigError("$", f"no such file {source}")
    with open(source, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PerformanceConfigError("$", f"invalid JSON: {exc.msg}") from None
    return model_from_document(doc)


def default_model(**overrides) -> PerformanceModel:
    model = model_from_document(A320_SYNTHETIC)
    return replace(model, **overrides) if overrides else model


def select_config(hdot: float) -> str:
    """IC when climbing at >= 1 m/s, AP when descending at <= -1 m/s, else CR."""
    return _POLAR_NAMES[K.polar_index(float(hdot))]


def lift_coefficient(model: PerformanceModel, rho: float, sample: FlightSample) -> float:
    if not (rho > 0.0 and sample.V > 0.0):
        raise ValueError("density and airspeed must be positive")
    return 2.0 * model.mass * G0 / (rho * sample.V ** 2 * model.wing_area) * math.cos(sample.gamma)


def drag_force(model: PerformanceModel, rho: float, sample: FlightSample, config: str) -> float:
    polar = model.polars[config]
    cl = lift_coefficient(model, rho, sample)
    cd = polar.cd0 + polar.cd2 * cl * cl
    return cd * 0.5 * rho * sample.V ** 2 * model.wing_area


def instant_thrust(model: PerformanceModel, sample: FlightSample, rho: float | None = None) -> float:
    """Thrust (N) balancing drag, climb and acceleration. May be negative."""
    if rho is None:
        rho = K.isa_troposphere(sample.h)[2]
    polar = model.polars[select_config(sample.hdot)]
    return K.thrust_kernel(
        model.mass, model.wing_area, polar.cd0, polar.cd2, rho, sample.V, sample.Vdot, sample.gamma, sample.hdot
    )


def instant_fuel(model: PerformanceModel, sample: FlightSample, thrust: float) -> float:
    """Fuel flow in kg/min.

    Nominal (thrust-proportional) when climbing/level or below the idle
    threshold altitude, idle otherwise. Negative thrust burns nothing.
    """
    f = model.fuel
    return K.fuel_kernel(f.cf1, f.cf2, f.cf3, f.cf4, model.idle_altitude_ft, sample.V, sample.h, sample.hdot, thrust)


def aggregate_step(ledger: FuelLedger, F: float, dt: float = 1.0) -> FuelLedger:
    if F < 0.0:
        raise ValueError("fuel flow must be non-negative")
    ledger.F = F
    ledger.F_a = ledger.F_a + F * dt / 60.0
    return ledger


__all__ = [
    "CONFIGS",
    "DragPolar",
    "FuelCoefficients",
    "PerformanceModel",
    "FlightSample",
    "FuelLedger",
    "PerformanceConfigError",
    "A320_SYNTHETIC",
    "load_performance",
    "model_from_document",
    "model_to_document",
    "default_model",
    "select_config",
    "lift_coefficient",
    "drag_force",
    "instant_thrust",
    "instant_fuel",
    "aggregate_step",
    "KT",
    "FT",
]
