"""Electromagnetic material models for the package stack.

A material is either a dielectric with a loss tangent (referenced to a
frequency), a dielectric with a fixed bulk conductivity, or a perfect
conductor.  Loss tangent and conductivity are interchangeable through

    tan(delta) = sigma / (2 pi f eps0 eps_r)

Bulk silicon is kept in conductivity form (10 ohm*cm resistivity -> 10 S/m)
so that its loss tangent scales correctly with frequency; the low-loss
dielectrics keep a constant loss tangent and are converted to an equivalent
conductivity at the band center when a time-domain run is assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import EPS0


@dataclass(frozen=True)
class LossTangent:
    tan_delta: float
    f_ref: float  # Hz

    def __post_init__(self):
        if self.tan_delta < 0:
            raise ValueError(f"tan_delta must be >= 0, got {self.tan_delta}")
        if self.f_ref <= 0:
            raise ValueError(f"f_ref must be > 0, got {self.f_ref}")


@dataclass(frozen=True)
class Conductivity:
    sigma: float  # S/m

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class PerfectConductor:
    pass


LossModel = LossTangent | Conductivity | PerfectConductor


def tan_delta_to_sigma(tan_delta: float, f: float, eps_r: float) -> float:
    """Equivalent conductivity of a loss tangent at frequency f."""
    return tan_delta * 2.0 * math.pi * f * EPS0 * eps_r


def sigma_to_tan_delta(sigma: float, f: float, eps_r: float) -> float:
    """Loss tangent of a bulk conductivity at frequency f."""
    return sigma / (2.0 * math.pi * f * EPS0 * eps_r)


@dataclass(frozen=True)
class Material:
    name: str
    rel_permittivity: float = 1.0
    loss: LossModel = Conductivity(0.0)

    def __post_init__(self):
        if not self.is_pec and self.rel_permittivity < 1.0:
            raise ValueError(
                f"{self.name}: rel_permittivity must be >= 1, got {self.rel_permittivity}"
            )

    @property
    def is_pec(self) -> bool:
        return isinstance(self.loss, PerfectConductor)

    def conductivity_at(self, f: float) -> float:
        """Equivalent bulk conductivity at frequency f (S/m).

        Conductivity materials are frequency independent; loss-tangent
        materials are converted at the requested frequency.
        """
        if isinstance(self.loss, PerfectConductor):
            raise ValueError(f"{self.name} is a perfect conductor")
        if isinstance(self.loss, Conductivity):
            return self.loss.sigma
        return tan_delta_to_sigma(self.loss.tan_delta, f, self.rel_permittivity)

    def tan_delta_at(self, f: float) -> float:
        """Loss tangent at frequency f."""
        if isinstance(self.loss, PerfectConductor):
            raise ValueError(f"{self.name} is a perfect conductor")
        if isinstance(self.loss, LossTangent):
            return self.loss.tan_delta
        return sigma_to_tan_delta(self.loss.sigma, f, self.rel_permittivity)


# Reference frequency for tabulated loss tangents: the default band center.
F_REF = 60e9

VACUUM = Material("vacuum", 1.0, Conductivity(0.0))
ALUMINUM = Material("aluminum", 1.0, PerfectConductor())
PEC = Material("pec", 1.0, PerfectConductor())
BUMP_METAL = Material("bump_metal", 1.0, PerfectConductor())  # Cu/Sn, solid-sheet approximation
AIN = Material("ain", 8.6, LossTangent(3e-4, F_REF))
SILICON_BULK = Material("silicon_bulk", 11.9, Conductivity(10.0))  # 10 ohm*cm resistivity
SIO2 = Material("sio2", 3.9, LossTangent(0.03, F_REF))
ALUMINA = Material("alumina", 9.4, LossTangent(4e-4, F_REF))

REGISTRY: dict[str, Material] = {
    m.name: m
    for m in (VACUUM, ALUMINUM, PEC, BUMP_METAL, AIN, SILICON_BULK, SIO2, ALUMINA)
}


def get_material(name: str) -> Material:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; known: {sorted(REGISTRY)}") from None
