"""Coefficient series for the parametric pendulum and the modulated Winkler beam.

Both systems are handled in nondimensional form; the ``Physical*`` types and
``nondim_*`` helpers exist only to convert user-facing physical quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .floquet import FourierMatrixSeries

__all__ = [
    "FLAT_CRITICAL_LOAD",
    "WINKLER_STIFFNESS",
    "PendulumParams",
    "PhysicalPendulum",
    "WinklerParams",
    "PhysicalWinkler",
    "pendulum_system",
    "winkler_system",
    "nondim_pendulum",
    "nondim_winkler",
]

#: ``16 pi^4``, the normalised foundation stiffness.
WINKLER_STIFFNESS = 16 * math.pi**4
#: ``8 pi^2``, critical normalised load of the unmodulated foundation.
FLAT_CRITICAL_LOAD = 8 * math.pi**2


@dataclass(frozen=True)
class PendulumParams:
    """Normalised amplitude, driving frequency and damping of the pendulum."""

    A_bar: float
    Omega_bar: float
    C_bar: float = 0.0

    def __post_init__(self):
        if not self.Omega_bar > 0:
            raise ParameterError(f"Omega_bar must be > 0, got {self.Omega_bar}")
        if not self.A_bar >= 0:
            raise ParameterError(f"A_bar must be >= 0, got {self.A_bar}")
        if not self.C_bar >= 0:
            raise ParameterError(f"C_bar must be >= 0, got {self.C_bar}")

    @classmethod
    def from_period(cls, T_over_2pi: float, A_bar: float, C_bar: float = 0.0) -> "PendulumParams":
        """Build from the normalised period expressed as ``T_bar / (2 pi)``."""
        if not T_over_2pi > 0:
            raise ParameterError(f"T_bar/(2 pi) must be > 0, got {T_over_2pi}")
        return cls(A_bar, 1.0 / T_over_2pi, C_bar)

    @property
    def T_bar(self) -> float:
        return 2 * math.pi / self.Omega_bar


@dataclass(frozen=True)
class PhysicalPendulum:
    """Inverted pendulum on a vertically shaken base, SI units."""

    mass: float
    length: float
    spring: float
    damper: float
    amplitude: float
    frequency: float
    gravity: float = 9.81

    @property
    def omega0_squared(self) -> float:
        return self.spring / (self.mass * self.length**2) - self.gravity / self.length


@dataclass(frozen=True)
class WinklerParams:
    """Normalised load, modulation ratio and modulation wavelength."""

    P_bar: float
    K_bar: float
    lambda_bar: float

    def __post_init__(self):
        if not self.P_bar >= 0:
            raise ParameterError(f"P_bar must be >= 0, got {self.P_bar}")
        if not 0 <= self.K_bar < 1:
            raise ParameterError(f"K_bar must satisfy 0 <= K_bar < 1, got {self.K_bar}")
        if not self.lambda_bar > 0:
            raise ParameterError(f"lambda_bar must be > 0, got {self.lambda_bar}")

    @property
    def Omega_bar(self) -> float:
        return 2 * math.pi / self.lambda_bar


@dataclass(frozen=True)
class PhysicalWinkler:
    """Beam on a cosine-modulated Winkler foundation, SI units."""

    EI: float
    K0: float
    K1: float
    wavelength: float
    load: float

    def __post_init__(self):
        if not self.EI > 0:
            raise ParameterError(f"EI must be > 0, got {self.EI}")
        if not self.K0 > 0:
            raise ParameterError(f"K0 must be > 0, got {self.K0}")
        if not 0 <= self.K1 < self.K0:
            raise ParameterError(f"K1 must satisfy 0 <= K1 < K0, got {self.K1}")
        if not self.wavelength > 0:
            raise ParameterError(f"wavelength must be > 0, got {self.wavelength}")


def pendulum_system(p: PendulumParams) -> FourierMatrixSeries:
    """First-order form of ``theta'' + C theta' + (1 + A cos(Omega tau)) theta = 0``."""
    J0 = np.array([[0.0, 1.0], [-1.0, -p.C_bar]])
    harmonics = {0: J0}
    if p.A_bar != 0:
        J1 = np.array([[0.0, 0.0], [-0.5 * p.A_bar, 0.0]])
        harmonics[1] = J1
        harmonics[-1] = J1
    return FourierMatrixSeries(harmonics, p.Omega_bar)


def winkler_system(w: WinklerParams) -> FourierMatrixSeries:
    """Companion form of ``y'''' + P y'' + 16 pi^4 (1 + K cos(Omega x)) y = 0``.

    The first harmonics carry ``-16 pi^4 K / 2 = -8 pi^4 K`` in the bottom-left
    corner, half of the cosine coefficient of the governing equation.
    """
    J0 = np.zeros((4, 4))
    J0[0, 1] = J0[1, 2] = J0[2, 3] = 1.0
    J0[3, 0] = -WINKLER_STIFFNESS
    J0[3, 2] = -w.P_bar
    harmonics = {0: J0}
    if w.K_bar != 0:
        J1 = np.zeros((4, 4))
        J1[3, 0] = -0.5 * WINKLER_STIFFNESS * w.K_bar
        harmonics[1] = J1
        harmonics[-1] = J1
    return FourierMatrixSeries(harmonics, w.Omega_bar)


def nondim_pendulum(phys: PhysicalPendulum) -> PendulumParams:
    """Normalised groups ``(A_bar, Omega_bar, C_bar)`` of a physical pendulum.

    Raises
    ------
    ParameterError
        When ``k / (M L^2) - g / L <= 0``: the upright equilibrium is statically
        unstable and no real natural frequency exists.
    """
    w2 = phys.omega0_squared
    if not w2 > 0:
        raise ParameterError(
            f"statically unstable upright equilibrium: omega0^2 = {w2:.6g} <= 0"
        )
    w0 = math.sqrt(w2)
    return PendulumParams(
        A_bar=phys.amplitude * phys.frequency**2 / (phys.length * w2),
        Omega_bar=phys.frequency / w0,
        C_bar=phys.damper / (w0 * phys.mass * phys.length**2),
    )


def nondim_winkler(phys: PhysicalWinkler) -> tuple[WinklerParams, float]:
    """Normalised ``(P_bar, K_bar, lambda_bar)`` and the flat buckling wavelength ``lambda0``."""
    lambda0 = 2 * math.pi * (phys.EI / phys.K0) ** 0.25
    params = WinklerParams(
        P_bar=4 * math.pi**2 * phys.load / math.sqrt(phys.K0 * phys.EI),
        K_bar=phys.K1 / phys.K0,
        lambda_bar=phys.wavelength / lambda0,
    )
    return params, lambda0
