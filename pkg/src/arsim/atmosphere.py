"""International Standard Atmosphere, troposphere only.

Geometric altitude is used in place of geopotential altitude; the difference
is negligible below a few kilometres.
"""
from dataclasses import dataclass

from arsim.kernels import G0, ISA_LAPSE, ISA_P0, ISA_T0, R_AIR, isa_troposphere

H_MIN = -500.0
H_MAX = 20000.0

__all__ = ["AirSample", "isa_sample", "R_AIR", "G0", "ISA_T0", "ISA_P0", "ISA_LAPSE"]


@dataclass(frozen=True)
class AirSample:
    T_air: float  # K
    p: float  # Pa
    rho: float  # kg/m^3

    @classmethod
    def from_state(cls, T_air: float, p: float) -> "AirSample":
        return cls(T_air, p, p / (R_AIR * T_air))


def isa_sample(h: float) -> AirSample:
    """Temperature, pressure and density at geometric altitude ``h`` (m).

    Raises ValueError outside [-500, 20000] m; the simulator never leaves the
    low troposphere, so an out-of-range call means guidance went wrong.
    """
    if not (H_MIN <= h <= H_MAX):
        raise ValueError(f"altitude {h!r} m outside ISA range [{H_MIN}, {H_MAX}]")
    t_air, p, rho = isa_troposphere(float(h))
    return AirSample(t_air, p, rho)
