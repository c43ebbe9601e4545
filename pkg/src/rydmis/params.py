"""Physical parameters and unit conventions.

All internal frequencies are angular (rad/µs) with hbar = 1; distances are
in µm and times in µs.  User-facing I/O reports plain frequencies in MHz
(value / 2π), converted explicitly via :func:`mhz` / :func:`rad_per_us`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidNoise

TWO_PI = 2.0 * math.pi

# van der Waals coefficient for the 60S Rydberg state: C6/h = 138 GHz.µm^6
C6_OVER_H_MHZ_UM6 = 138_000.0


def rad_per_us(freq_mhz: float) -> float:
    """Plain frequency in MHz -> angular frequency in rad/µs."""
    return TWO_PI * freq_mhz


def mhz(omega_rad_us: float) -> float:
    """Angular frequency in rad/µs -> plain frequency in MHz."""
    return omega_rad_us / TWO_PI


@dataclass(frozen=True)
class RydbergParams:
    """Device constants: interaction coefficient and hardware field bounds."""

    c6: float = TWO_PI * C6_OVER_H_MHZ_UM6          # rad/µs · µm^6
    omega_max: float = TWO_PI * 2.0                  # rad/µs
    delta_max_abs: float = TWO_PI * 10.0             # rad/µs

    def __post_init__(self):
        if self.c6 <= 0 or self.omega_max <= 0 or self.delta_max_abs <= 0:
            raise ValueError("all Rydberg parameters must be positive")

    def interaction(self, r_um: float) -> float:
        """Van der Waals interaction C6 / r^6 in rad/µs."""
        return self.c6 / r_um**6


@dataclass(frozen=True)
class NoiseParams:
    """Effective decoherence and detection-error model.

    t1: relaxation time (µs); t2: dephasing time (µs, t2 <= 2 t1);
    eps / eps_prime: detection bit-flip probabilities p(0->1) / p(1->0).
    """

    t1: float = 100.0
    t2: float = 4.5
    eps: float = 0.03
    eps_prime: float = 0.08

    def __post_init__(self):
        if self.t2 > 2.0 * self.t1:
            raise InvalidNoise(f"t2 = {self.t2} exceeds 2*t1 = {2 * self.t1}")
        if not (0.0 <= self.eps < 1.0 and 0.0 <= self.eps_prime < 1.0):
            raise InvalidNoise("detection error probabilities must be in [0, 1)")

    @property
    def decay_rate(self) -> float:
        """Relaxation rate 1/T1 (1/µs)."""
        return 1.0 / self.t1

    @property
    def dephasing_rate(self) -> float:
        """Pure dephasing rate 1/T2 - 1/(2 T1) (1/µs)."""
        rate = 1.0 / self.t2 - 0.5 / self.t1
        return max(rate, 0.0)
