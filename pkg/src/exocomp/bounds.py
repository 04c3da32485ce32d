"""Closed-form relativistic and information-theoretic limit calculators.

Time dilation and its energy price, the Planck scale, the Bekenstein bound
on the information content of a bounded region, and the holographic bound
per unit area. All pure arithmetic; the interest is in the scaling
behavior (reaching a dilation ratio r costs a Lorentz factor of exactly r,
and 1 - v shrinks as r^-2, so buying computation with relativity is
exponentially expensive in the clock speedup you are after).

Constants are CODATA 2018 values. Rounding them to three significant
figures drags the derived Planck length 0.58% away from the two-decimal
reference 1.62e-35 m, which is outside the 0.5% check applied in the
tests; the full-precision constants land 0.23% from that same reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HOLOGRAPHIC_BITS_PER_M2 = 1.4e69


class UnitError(ValueError):
    """Arithmetic attempted between quantities with different units."""


@dataclass(frozen=True)
class Quantity:
    """A value tagged with its unit; mixing units is a construction error."""

    value: float
    unit: str

    def __add__(self, other: "Quantity") -> "Quantity":
        if not isinstance(other, Quantity):
            return NotImplemented
        if self.unit != other.unit:
            raise UnitError(f"cannot add {self.unit!r} to {other.unit!r}")
        return Quantity(self.value + other.value, self.unit)

    def __sub__(self, other: "Quantity") -> "Quantity":
        if not isinstance(other, Quantity):
            return NotImplemented
        if self.unit != other.unit:
            raise UnitError(f"cannot subtract {other.unit!r} from {self.unit!r}")
        return Quantity(self.value - other.value, self.unit)

    def __mul__(self, scalar: float) -> "Quantity":
        if isinstance(scalar, Quantity):
            raise UnitError("multiply by a bare scalar; unit algebra is out of scope")
        return Quantity(self.value * scalar, self.unit)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34  # J s
    G: float = 6.67430e-11  # m^3 / (kg s^2)
    c: float = 299792458.0  # m / s


CONSTANTS = PhysicalConstants()


def _check_speed(v: float) -> None:
    if not 0.0 <= v < 1.0:
        raise ValueError(f"speed must satisfy 0 <= v < 1, got {v}")


def time_dilation(t: float, v: float) -> float:
    """Coordinate time t' = t / sqrt(1 - v^2) for proper time t at speed v (units of c)."""
    _check_speed(v)
    if t < 0:
        raise ValueError(f"proper time must be nonnegative, got {t}")
    return t / math.sqrt(1.0 - v * v)


def speed_for_dilation(ratio: float) -> float:
    """The speed (fraction of c) at which t'/t equals the given ratio >= 1."""
    if ratio < 1.0:
        raise ValueError(f"dilation ratio must be >= 1, got {ratio}")
    return math.sqrt(1.0 - 1.0 / (ratio * ratio))


def kinetic_energy_factor(v: float) -> float:
    """gamma - 1: kinetic energy per unit rest mass (in units of mc^2)."""
    _check_speed(v)
    return 1.0 / math.sqrt(1.0 - v * v) - 1.0


def planck_length(constants: PhysicalConstants = CONSTANTS) -> float:
    """sqrt(hbar G / c^3) in meters."""
    return math.sqrt(constants.hbar * constants.G / constants.c**3)


def planck_time(constants: PhysicalConstants = CONSTANTS) -> float:
    """Planck length over c, in seconds."""
    return planck_length(constants) / constants.c


def bekenstein_bits(energy: float, radius: float) -> float:
    """Maximum bits storable in a sphere: S <= 2 pi E R, converted to bits.

    Energy and radius are given in Planck units, so the bound is the
    dimensionless 2 pi E R / ln 2.
    """
    if energy < 0 or radius < 0:
        raise ValueError("energy and radius must be nonnegative")
    return 2.0 * math.pi * energy * radius / math.log(2.0)


def holographic_bits(area_m2: float) -> float:
    """Maximum bits on a bounding surface, 1.4e69 bits per square meter."""
    if area_m2 < 0:
        raise ValueError("area must be nonnegative")
    return HOLOGRAPHIC_BITS_PER_M2 * area_m2


def bounds_summary(dilation_ratio: float = 2.0**10) -> dict[str, Quantity]:
    """Unit-tagged bundle of the headline numbers, for reporting."""
    v = speed_for_dilation(dilation_ratio)
    return {
        "planck_length": Quantity(planck_length(), "m"),
        "planck_time": Quantity(planck_time(), "s"),
        "holographic_bits_per_m2": Quantity(HOLOGRAPHIC_BITS_PER_M2, "bit/m^2"),
        "bekenstein_bits_unit_sphere": Quantity(bekenstein_bits(1.0, 1.0), "bit"),
        "dilation_ratio": Quantity(dilation_ratio, "1"),
        "required_speed": Quantity(v, "c"),
        "kinetic_energy_factor": Quantity(kinetic_energy_factor(v), "mc^2"),
    }
