"""Partial quantum measurement limit: environment self-Hamiltonians included.

Each oscillator contributes an exactly periodic displacement amplitude, so
the factors are almost periodic in time and never decay monotonically; the
meaningful objects are the infinite-time averages, which reduce per
oscillator to exp(-a) I0(a). The phase coefficient zeta_k never enters
|Gamma| or B (it cancels in moduli and in overlaps of the conditional
states) and is carried for completeness only.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bath import BathSpec, EnvInitState, SystemSpec
from .specfun import bessel_i0
from .units import SI_UNITS, UnitContext

LARGE_SEPARATION_MIN_RATIO = 10.0
_LOW_TEMPERATURE_MIN_ARG = 10.0  # cth(10) - 1 ~ 4e-9


@dataclass(frozen=True)
class PqmlPropagator:
    """Displacement amplitude alpha(t) [1/m] and phase coefficient zeta(t) [1/m^2]."""

    alpha: complex
    zeta: float


@dataclass(frozen=True)
class AvgResult:
    """Analytic infinite-time averages in log space.

    per_oscillator_terms[k] = (baseline exponent, I0 argument) of the k-th
    factor exp(-a) I0(a); the two entries coincide by construction.
    """

    log_avg_gamma: float | None
    log_avg_b: float | None
    per_oscillator_terms: tuple[tuple[float, float], ...]

    @property
    def avg_gamma(self) -> float:
        return math.exp(self.log_avg_gamma) if self.log_avg_gamma is not None else None

    @property
    def avg_b(self) -> float:
        return math.exp(self.log_avg_b) if self.log_avg_b is not None else None


@dataclass(frozen=True)
class ScalingPrediction:
    """Monte Carlo frequency-averaged decay vs the closed-form prediction,
    both as logs."""

    log_empirical: float
    log_predicted: float


def thermal_weight(omega, env_state: EnvInitState, units: UnitContext, which: str):
    """cth or th of hbar*omega/(2 k_B T); accepts scalars or arrays."""
    arg = units.hbar * np.asarray(omega) / (2.0 * units.k_boltzmann * env_state.temperature)
    th = np.tanh(arg)
    if which == "decoherence":
        return 1.0 / th
    if which == "distinguishability":
        return th
    raise ValueError("which must be 'decoherence' or 'distinguishability'")


def pqml_propagator(t: float, omega: float, m: float, c: float,
                    units: UnitContext = SI_UNITS) -> PqmlPropagator:
    """alpha(t) = -C/sqrt(2 m w^3 hbar) (e^{iwt} - 1), zeta(t) = C^2 (wt - sin wt)/(m w^3 hbar)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    scale = c / math.sqrt(2.0 * m * omega ** 3 * units.hbar)
    alpha = -scale * (cmath.exp(1j * omega * t) - 1.0)
    zeta = c * c * (omega * t - math.sin(omega * t)) / (m * omega ** 3 * units.hbar)
    return PqmlPropagator(alpha=alpha, zeta=zeta)


def _check_pqml_state(env_state: EnvInitState) -> None:
    if env_state.squeezing_r != 0.0:
        raise ValueError("squeezed initial states are not supported in the "
                         "partial measurement limit")


def log_factor_series(times, bath: BathSpec, system: SystemSpec,
                      env_state: EnvInitState, idx: Sequence[int] | None = None,
                      which: str = "decoherence",
                      units: UnitContext = SI_UNITS) -> np.ndarray:
    """log factor on an array of times; exponent (dx^2/2) sum w_k a_k (cos w t - 1)."""
    _check_pqml_state(env_state)
    w, m, c = bath.arrays(idx)
    tt = np.atleast_1d(np.asarray(times, dtype=float))
    weight = thermal_weight(w, env_state, units, which)
    amp = weight * c * c / (m * w ** 3 * units.hbar)          # (k,)
    osc = np.cos(np.outer(w, tt)) - 1.0                        # (k, n)
    return 0.5 * system.dx ** 2 * (amp @ osc)


def _log_factor_scalar(t, bath, system, env_state, idx, which, units) -> float:
    _check_pqml_state(env_state)
    if t < 0:
        raise ValueError("t must be non-negative")
    w, m, c = bath.arrays(idx)
    weight = thermal_weight(w, env_state, units, which)
    terms = weight * c * c * (np.cos(w * t) - 1.0) / (m * w ** 3 * units.hbar)
    return 0.5 * system.dx ** 2 * math.fsum(terms.tolist())


def gamma_pqml(t: float, bath: BathSpec, system: SystemSpec, env_state: EnvInitState,
               idx: Sequence[int] | None = None, log: bool = False,
               units: UnitContext = SI_UNITS) -> float:
    """Decoherence factor with self-Hamiltonians, thermal state only."""
    lv = _log_factor_scalar(t, bath, system, env_state, idx, "decoherence", units)
    return lv if log else math.exp(lv)


def b_pqml(t: float, bath: BathSpec, system: SystemSpec, env_state: EnvInitState,
           idx: Sequence[int] | None = None, log: bool = False,
           units: UnitContext = SI_UNITS) -> float:
    """Distinguishability factor with self-Hamiltonians, thermal state only."""
    lv = _log_factor_scalar(t, bath, system, env_state, idx, "distinguishability", units)
    return lv if log else math.exp(lv)


def bessel_arguments(bath: BathSpec, system: SystemSpec, env_state: EnvInitState,
                     idx: Sequence[int] | None = None, which: str = "decoherence",
                     units: UnitContext = SI_UNITS) -> np.ndarray:
    """Per-oscillator arguments a_k = dx^2 C_k^2 {cth|th}(.)/(2 m_k w_k^3 hbar)."""
    w, m, c = bath.arrays(idx)
    weight = thermal_weight(w, env_state, units, which)
    return 0.5 * system.dx ** 2 * c * c * weight / (m * w ** 3 * units.hbar)


def avg_analytic(bath: BathSpec, system: SystemSpec, env_state: EnvInitState,
                 idx: Sequence[int] | None = None, which: str = "both",
                 units: UnitContext = SI_UNITS) -> AvgResult:
    """Infinite-time averages: product over k of exp(-a_k) I0(a_k), in log space.

    Rests on the ergodic substitution of the time average by the average over
    phase angles; duplicate frequencies degrade its assumptions and only
    trigger a warning.
    """
    _check_pqml_state(env_state)
    w, _, _ = bath.arrays(idx)
    if len(set(w.tolist())) != len(w):
        warnings.warn("duplicate bath frequencies: ergodic-average assumptions "
                      "are degraded", stacklevel=2)

    def accumulate(kind: str):
        args = bessel_arguments(bath, system, env_state, idx, kind, units)
        logs = [-a + bessel_i0(a).log_value for a in args]
        return math.fsum(logs), args

    log_gamma = log_b = None
    terms: tuple[tuple[float, float], ...] = ()
    if which in ("decoherence", "both"):
        log_gamma, args = accumulate("decoherence")
        terms = tuple((float(a), float(a)) for a in args)
    if which in ("distinguishability", "both"):
        log_b, args = accumulate("distinguishability")
        if not terms:
            terms = tuple((float(a), float(a)) for a in args)
    if which not in ("decoherence", "distinguishability", "both"):
        raise ValueError("which must be 'decoherence', 'distinguishability' or 'both'")
    return AvgResult(log_avg_gamma=log_gamma, log_avg_b=log_b,
                     per_oscillator_terms=terms)


def check_large_separation(system: SystemSpec, omega: float, gamma0: float,
                           units: UnitContext = SI_UNITS) -> float:
    """Large-separation ratio sqrt(M gamma0 / hbar) |x1-x2| / omega^(3/2).

    This is the square root of 2 pi times the I0 argument for prefactor-1
    mass-proportional couplings, so ratio >> 1 is exactly the asymptotic
    regime of the averages.
    """
    if omega <= 0 or gamma0 <= 0:
        raise ValueError("omega and gamma0 must be strictly positive")
    return system.dx * math.sqrt(system.mass_M * gamma0 / units.hbar) / omega ** 1.5


def avg_asymptotic(bath: BathSpec, system: SystemSpec, env_state: EnvInitState,
                   idx: Sequence[int] | None = None,
                   min_ratio: float = LARGE_SEPARATION_MIN_RATIO,
                   units: UnitContext = SI_UNITS) -> float:
    """Low-temperature, large-separation log average: sum_k -ln sqrt(2 pi a_k).

    Valid for both factors since th = cth = 1 in this limit. Rejects inputs
    where the large-separation ratio is below min_ratio or the temperature is
    not deep in the cth = th = 1 regime.
    """
    _check_pqml_state(env_state)
    w, m, c = bath.arrays(idx)
    args = units.hbar * w / (2.0 * units.k_boltzmann * env_state.temperature)
    if np.any(args < _LOW_TEMPERATURE_MIN_ARG):
        raise ValueError("temperature too high for the low-temperature asymptotics")
    a = 0.5 * system.dx ** 2 * c * c / (m * w ** 3 * units.hbar)
    ratios = np.sqrt(2.0 * math.pi * a)
    bad = np.nonzero(ratios < min_ratio)[0]
    if bad.size:
        raise ValueError(f"large-separation condition violated for oscillators "
                         f"{bad.tolist()} (ratio < {min_ratio})")
    return float(math.fsum((-0.5 * np.log(2.0 * math.pi * a)).tolist()))


def freq_averaged_scaling(system: SystemSpec, env_state: EnvInitState,
                          omega_bar: float, delta: float, mN: int, gamma0: float,
                          mc_samples: int, seed: int,
                          min_ratio: float = LARGE_SEPARATION_MIN_RATIO,
                          units: UnitContext = SI_UNITS) -> ScalingPrediction:
    """Monte Carlo frequency average of the asymptotic decay vs the prediction
    exp[-mN ln(sqrt(M gamma0/hbar) dx / omega_bar^(3/2))]."""
    if delta < 0 or delta > omega_bar / 5.0:
        raise ValueError("band width must satisfy 0 <= delta <= omega_bar / 5")
    if mN < 1 or mc_samples < 1:
        raise ValueError("mN and mc_samples must be positive")
    # the worst (highest) frequency in the band must still satisfy (L)
    edge_ratio = check_large_separation(system, omega_bar + delta / 2.0, gamma0, units)
    if edge_ratio < min_ratio:
        raise ValueError(f"band violates the large-separation condition "
                         f"(edge ratio {edge_ratio:.3g} < {min_ratio})")

    scale = math.log(system.dx * math.sqrt(system.mass_M * gamma0 / units.hbar))
    children = np.random.SeedSequence(seed).spawn(mc_samples)
    logs = np.empty(mc_samples)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        w = rng.uniform(omega_bar - delta / 2.0, omega_bar + delta / 2.0, size=mN)
        logs[i] = np.sum(1.5 * np.log(w) - scale)
    peak = logs.max()
    log_empirical = float(peak + math.log(np.mean(np.exp(logs - peak))))
    log_predicted = float(mN * (1.5 * math.log(omega_bar) - scale))
    return ScalingPrediction(log_empirical=log_empirical, log_predicted=log_predicted)
