"""Physical inputs, dimensionless groups and thermal-regime classification.

The viscosities are called ``mu_*`` throughout; the source material also uses
``nu_*`` for the same quantities.  Only their ratio to ``kappa_x`` ever enters
the dimensionless system.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

__all__ = [
    "PhysicalParams",
    "DimensionlessParams",
    "Regime",
    "ThermalRegime",
    "nondimensionalize",
    "deltaT_from_rayleigh",
    "rayleigh_from_deltaT",
    "classify_regime",
    "temperature_scale",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Physical inputs in SI units.

    T0 is the bottom temperature, T1 the top one (K).  H is the layer depth
    and L the horizontal period (m).
    """

    T0: float
    T1: float
    H: float
    L: float
    mu_x: float
    mu_z: float
    kappa_x: float
    kappa_z: float
    rho0: float
    beta: float
    g: float

    def __post_init__(self):
        for name in ("H", "L", "mu_x", "mu_z", "kappa_x", "kappa_z", "rho0", "beta", "g"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"physical parameter {name} must be positive, got {value!r}")
        for name in ("T0", "T1"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def delta_T(self) -> float:
        return self.T0 - self.T1

    @property
    def buoyancy_scale(self) -> float:
        """H^3 rho0 g beta, the denominator of the R^2 <-> Delta T conversion."""
        return self.H**3 * self.rho0 * self.g * self.beta

    def with_delta_T(self, delta_T: float) -> "PhysicalParams":
        """Same medium, bottom temperature kept, top set so that T0 - T1 = delta_T."""
        return replace(self, T1=self.T0 - delta_T)


@dataclass(frozen=True)
class DimensionlessParams:
    pr_x: float
    pr_z: float
    kappa_a: float
    alpha: float
    rayleigh: float = 0.0
    sign: int = 1

    def __post_init__(self):
        for name in ("pr_x", "pr_z", "kappa_a", "alpha"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if not (math.isfinite(self.rayleigh) and self.rayleigh >= 0.0):
            raise ValueError(f"rayleigh must be >= 0, got {self.rayleigh!r}")
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")

    @property
    def pr_a(self) -> float:
        return self.pr_z / self.pr_x

    @property
    def coupling_v(self) -> float:
        """Coefficient of -d_x int_0^z Theta in the velocity equation."""
        return self.rayleigh if self.sign != 0 else 1.0

    @property
    def coupling_theta(self) -> float:
        """Coefficient of +int_0^z d_x v in the temperature equation."""
        return -self.sign * self.rayleigh

    def with_rayleigh(self, rayleigh: float) -> "DimensionlessParams":
        return replace(self, rayleigh=float(rayleigh))

    def with_sign(self, sign: int) -> "DimensionlessParams":
        return replace(self, sign=int(sign))


def nondimensionalize(p: PhysicalParams) -> DimensionlessParams:
    dT = p.delta_T
    sign = (dT > 0) - (dT < 0)
    return DimensionlessParams(
        pr_x=p.mu_x / p.kappa_x,
        pr_z=p.mu_z / p.kappa_x,
        kappa_a=p.kappa_z / p.kappa_x,
        alpha=p.L / p.H,
        rayleigh=rayleigh_from_deltaT(abs(dT), p),
        sign=sign,
    )


def rayleigh_from_deltaT(delta_T: float, p: PhysicalParams) -> float:
    if delta_T < 0:
        raise ValueError("temperature difference must be >= 0 (pass |T0 - T1|)")
    return p.H * math.sqrt(p.H * p.rho0 * p.g * p.beta * delta_T) / p.kappa_x


def deltaT_from_rayleigh(rayleigh: float, p: PhysicalParams) -> float:
    if rayleigh < 0:
        raise ValueError("Rayleigh number must be >= 0")
    return rayleigh**2 * p.kappa_x**2 / p.buoyancy_scale


def temperature_scale(p: PhysicalParams) -> float:
    """Kelvin per unit of the rescaled dimensionless temperature.

    With T = |T0| Theta' and Theta' = sqrt|dT| Theta / (R0 sqrt|T0|) this
    collapses to |dT| / R.  The isothermal case uses Theta' = Theta / R0^2.
    """
    dT = abs(p.delta_T)
    if dT == 0.0:
        r0 = rayleigh_from_deltaT(abs(p.T0), p)
        return abs(p.T0) / r0**2
    return dT / rayleigh_from_deltaT(dT, p)


class Regime(enum.IntEnum):
    """Ordered so that increasing T0 - T1 never moves a tag down."""

    HeatedFromAbove = 0
    Isothermal = 1
    SubcriticalBelow = 2
    CriticalBelow = 3
    SupercriticalBelow = 4


@dataclass(frozen=True)
class ThermalRegime:
    tag: Regime
    margin: float  # T0 - T1 - t_c, kelvin


def classify_regime(p: PhysicalParams, t_c: float, tol: float = 1e-9) -> ThermalRegime:
    if not t_c > 0:
        raise ValueError("critical temperature difference must be positive")
    dT = p.delta_T
    if dT < 0:
        tag = Regime.HeatedFromAbove
    elif dT == 0:
        tag = Regime.Isothermal
    elif dT < t_c * (1.0 - tol):
        tag = Regime.SubcriticalBelow
    elif dT <= t_c * (1.0 + tol):
        tag = Regime.CriticalBelow
    else:
        tag = Regime.SupercriticalBelow
    return ThermalRegime(tag=tag, margin=dT - t_c)
