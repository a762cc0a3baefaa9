"""Unit-convention bookkeeping.

All model formulas are written with SI parameter values (kg, m, s, K) while
the dimensionless exponents require explicit hbar and k_B: per-oscillator
exponents are (physical action)/hbar and thermal arguments hbar*omega/(2 k_B T).
A dimensionless study can override both constants with 1.
"""

from __future__ import annotations

from dataclasses import dataclass

HBAR_SI = 1.054571817e-34  # J s
KB_SI = 1.380649e-23       # J / K


@dataclass(frozen=True)
class UnitContext:
    hbar: float = HBAR_SI
    k_boltzmann: float = KB_SI

    def __post_init__(self):
        if self.hbar <= 0 or self.k_boltzmann <= 0:
            raise ValueError("hbar and k_boltzmann must be strictly positive")

    def thermal_argument(self, omega: float, temperature: float) -> float:
        """Dimensionless argument hbar*omega/(2 k_B T) of th/cth factors."""
        if temperature <= 0:
            raise ValueError("temperature must be strictly positive")
        return self.hbar * omega / (2.0 * self.k_boltzmann * temperature)


SI_UNITS = UnitContext()
DIMENSIONLESS_UNITS = UnitContext(hbar=1.0, k_boltzmann=1.0)
