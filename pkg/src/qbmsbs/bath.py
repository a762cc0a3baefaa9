"""Bath, system, partition and initial-state definitions plus random sampling.

The bath is a finite, discrete set of oscillators with random frequencies;
no continuous spectral density is assumed. Couplings are mass-proportional,
C_k = prefactor * sqrt(M m_k gamma0 / pi), so C_k^2/m_k is mass-independent
and the (unphysical) default m_k = 1 kg placeholder cancels everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class BathSpec:
    """N environmental oscillators: frequencies [1/s], masses [kg],
    coupling constants [kg/s^2]."""

    omegas: tuple[float, ...]
    masses: tuple[float, ...]
    couplings: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        n = len(self.omegas)
        if len(self.masses) != n or len(self.couplings) != n:
            raise ValueError("omegas, masses and couplings must have equal length")
        for name, values in (("omegas", self.omegas),
                             ("masses", self.masses),
                             ("couplings", self.couplings)):
            if any(v <= 0 for v in values):
                raise ValueError(f"all {name} must be strictly positive")

    @property
    def n(self) -> int:
        return len(self.omegas)

    def arrays(self, idx: Sequence[int] | None = None):
        """(omega, m, C) as float arrays, optionally restricted to idx."""
        w = np.asarray(self.omegas)
        m = np.asarray(self.masses)
        c = np.asarray(self.couplings)
        if idx is None:
            return w, m, c
        ii = np.asarray(list(idx), dtype=int)
        return w[ii], m[ii], c[ii]


@dataclass(frozen=True)
class SystemSpec:
    """Central oscillator: mass M [kg], frequency Omega [1/s] and the pair
    of positions (x1, x2) [m] whose superposition is decohered.

    omega_big = 0 selects the partial-measurement-limit dynamics exactly.
    """

    mass_M: float
    omega_big: float
    x1: float
    x2: float

    def __post_init__(self):
        if self.mass_M <= 0:
            raise ValueError("mass_M must be strictly positive")
        if self.omega_big < 0:
            raise ValueError("omega_big must be non-negative")

    @property
    def dx(self) -> float:
        """Separation |x1 - x2|; all factors depend on positions only
        through its square."""
        return abs(self.x1 - self.x2)


@dataclass(frozen=True)
class EnvInitState:
    """Initial environment state: temperature T [K] (same for every
    oscillator) and squeezing parameter r (r = 0 is a plain thermal state)."""

    temperature: float
    squeezing_r: float = 0.0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be strictly positive")

    @classmethod
    def from_beta(cls, beta: float, k_boltzmann: float, squeezing_r: float = 0.0):
        """Construct from inverse temperature beta = 1/(k_B T)."""
        if beta <= 0:
            raise ValueError("beta must be strictly positive")
        return cls(temperature=1.0 / (k_boltzmann * beta), squeezing_r=squeezing_r)


@dataclass(frozen=True)
class Partition:
    """Index sets: the unobserved (traced-out) fraction and the observed
    macrofractions. All sets are pairwise disjoint; their union need not
    cover the whole bath."""

    unobserved: tuple[int, ...]
    macrofractions: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "unobserved", tuple(int(i) for i in self.unobserved))
        object.__setattr__(
            self, "macrofractions",
            tuple(tuple(int(i) for i in mac) for mac in self.macrofractions))
        seen: set[int] = set()
        for group in (self.unobserved, *self.macrofractions):
            gs = set(group)
            if len(gs) != len(group):
                raise ValueError("repeated index inside a partition group")
            if seen & gs:
                raise ValueError("partition groups must be pairwise disjoint")
            seen |= gs
        if any(i < 0 for i in seen):
            raise ValueError("indices must be non-negative")
        if any(len(mac) == 0 for mac in self.macrofractions):
            raise ValueError("macrofractions must be non-empty")

    def validate_against(self, n: int) -> None:
        for group in (self.unobserved, *self.macrofractions):
            if any(i >= n for i in group):
                raise ValueError(f"partition index out of range for bath of size {n}")


def sample_frequencies(n: int, omega_bar: float, delta: float, seed: int) -> tuple[float, ...]:
    """n i.i.d. frequencies, uniform on [omega_bar - delta/2, omega_bar + delta/2].

    Deterministic for a fixed seed. delta = 0 yields n copies of omega_bar.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    low = omega_bar - delta / 2.0
    if low <= 0:
        raise ValueError("lower band edge omega_bar - delta/2 must be positive")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(low, omega_bar + delta / 2.0, size=n)
    return tuple(float(w) for w in draws)


def couplings_from_masses(masses: Sequence[float], mass_M: float, gamma0: float,
                          prefactor: int = 1) -> tuple[float, ...]:
    """Mass-proportional couplings C_k = prefactor * sqrt(M m_k gamma0 / pi).

    prefactor is exposed because both 1 and 2 are in legitimate use for
    different parameter conventions.
    """
    if prefactor not in (1, 2):
        raise ValueError("prefactor must be 1 or 2")
    if mass_M <= 0 or gamma0 <= 0:
        raise ValueError("mass_M and gamma0 must be strictly positive")
    if any(m <= 0 for m in masses):
        raise ValueError("all masses must be strictly positive")
    return tuple(prefactor * math.sqrt(mass_M * m * gamma0 / math.pi) for m in masses)


def sample_bath(n: int, omega_bar: float, delta: float, seed: int, mass_M: float,
                gamma0: float, prefactor: int = 1,
                masses: Sequence[float] | None = None) -> BathSpec:
    """Random bath with uniform frequencies and mass-proportional couplings."""
    omegas = sample_frequencies(n, omega_bar, delta, seed)
    if masses is None:
        masses = (1.0,) * n
    couplings = couplings_from_masses(masses, mass_M, gamma0, prefactor)
    return BathSpec(omegas=omegas, masses=tuple(masses), couplings=couplings)


def make_partition(n: int, unobserved_size: int, mac_sizes: Sequence[int]) -> Partition:
    """Deterministic contiguous assignment: first indices unobserved, then the
    macrofractions in order. Order is physically irrelevant (the factors depend
    only on the multiset of oscillators inside each group)."""
    if unobserved_size < 0 or any(s < 0 for s in mac_sizes):
        raise ValueError("sizes must be non-negative")
    total = unobserved_size + sum(mac_sizes)
    if total > n:
        raise ValueError(f"partition oversubscribes the bath: {total} > {n}")
    cursor = unobserved_size
    macs = []
    for s in mac_sizes:
        macs.append(tuple(range(cursor, cursor + s)))
        cursor += s
    return Partition(unobserved=tuple(range(unobserved_size)),
                     macrofractions=tuple(macs))


def validate_offresonance(omegas: Sequence[float], omega_big: float,
                          margin: float) -> bool:
    """True iff every bath frequency is off-resonant with the system:
    omega_k >= margin * Omega or omega_k <= Omega / margin."""
    if margin <= 1:
        raise ValueError("margin must exceed 1")
    if omega_big == 0:
        return True
    return all(w >= margin * omega_big or w <= omega_big / margin for w in omegas)
