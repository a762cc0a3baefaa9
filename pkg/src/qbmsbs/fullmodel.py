"""Full model: system and environment self-Hamiltonians both present.

The displacement amplitude mixes the bath frequency w with the system
frequency Omega and diverges at resonance, which is excluded by a guard.
Squeezing the initial thermal state only replaces |alpha|^2 by
ch(2r) [|alpha|^2 - th(2r) Re alpha^2].

Re alpha^2 is evaluated from the complex amplitude

    alpha(t) = -(C/sqrt(2 m w hbar)) [e^{iwt}(w cos Ot - iO sin Ot) - w] / (w^2 - O^2),

whose modulus squared reproduces the standard |alpha(t)|^2 expression
exactly and whose Omega -> 0 limit is the partial-measurement-limit
amplitude. This guarantees |Re alpha^2| <= |alpha|^2, hence a non-negative
squeezed amplitude for every r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bath import BathSpec, EnvInitState, SystemSpec
from .pqml import thermal_weight
from .units import SI_UNITS, UnitContext

RESONANCE_GUARD = 1e-6


class ResonanceError(ValueError):
    """Bath frequency too close to the system frequency; the amplitude
    prefactor 1/(w^2 - Omega^2)^2 diverges there."""


@dataclass(frozen=True)
class FullAmplitude:
    alpha_sq: float
    re_alpha_sq: float
    alpha_sq_squeezed: float


@dataclass(frozen=True)
class FactorSeries:
    """Evaluated (gamma, b) over a time grid, values in (0, 1]."""

    times: tuple[float, ...]
    gamma: tuple[float, ...]
    b: tuple[float, ...]
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TimeAverage:
    """Uniform-grid estimate of the long-time average with a convergence
    indicator (difference between the tau and tau/2 estimates)."""

    value: float
    convergence: float
    tau: float
    n_samples: int


def _check_resonance(omega, omega_big: float) -> None:
    if omega_big == 0.0:
        return
    w = np.asarray(omega)
    if np.any(np.abs(w - omega_big) <= RESONANCE_GUARD * omega_big):
        raise ResonanceError(
            f"bath frequency within {RESONANCE_GUARD:g} relative of Omega={omega_big:g}")


def alpha_sq_full(t, omega, omega_big, m, c, units: UnitContext = SI_UNITS):
    """|alpha(t)|^2 [1/m^2]; broadcasts over t or omega arrays."""
    _check_resonance(omega, omega_big)
    t = np.asarray(t, dtype=float)
    pref = c * c * omega / (2.0 * m * (omega ** 2 - omega_big ** 2) ** 2 * units.hbar)
    bracket = ((np.cos(omega * t) - np.cos(omega_big * t)) ** 2
               + (np.sin(omega * t) - (omega_big / omega) * np.sin(omega_big * t)) ** 2)
    out = pref * bracket
    return float(out) if out.ndim == 0 else out


def re_alpha_sq_full(t, omega, omega_big, m, c, units: UnitContext = SI_UNITS):
    """Re alpha(t)^2 [1/m^2] from the complex amplitude; broadcasts over t."""
    _check_resonance(omega, omega_big)
    t = np.asarray(t, dtype=float)
    pref = c * c / (2.0 * m * omega * (omega ** 2 - omega_big ** 2) ** 2 * units.hbar)
    cw, sw = np.cos(omega * t), np.sin(omega * t)
    co, so = np.cos(omega_big * t), np.sin(omega_big * t)
    re_half = cw * omega * co + sw * omega_big * so - omega
    im_half = sw * omega * co - cw * omega_big * so
    out = pref * (re_half ** 2 - im_half ** 2)
    return float(out) if out.ndim == 0 else out


def alpha_sq_squeezed(t, omega, omega_big, m, c, r, units: UnitContext = SI_UNITS):
    """ch(2r) [|alpha|^2 - th(2r) Re alpha^2]; equals |alpha|^2 at r = 0 and
    is non-negative for every r."""
    a2 = alpha_sq_full(t, omega, omega_big, m, c, units)
    if r == 0.0:
        return a2
    re2 = re_alpha_sq_full(t, omega, omega_big, m, c, units)
    return math.cosh(2.0 * r) * (a2 - math.tanh(2.0 * r) * re2)


def full_amplitude(t, omega, omega_big, m, c, r, units: UnitContext = SI_UNITS) -> FullAmplitude:
    a2 = alpha_sq_full(t, omega, omega_big, m, c, units)
    re2 = re_alpha_sq_full(t, omega, omega_big, m, c, units)
    return FullAmplitude(
        alpha_sq=a2,
        re_alpha_sq=re2,
        alpha_sq_squeezed=math.cosh(2.0 * r) * (a2 - math.tanh(2.0 * r) * re2))


def log_factor_series(times, bath: BathSpec, system: SystemSpec,
                      env_state: EnvInitState, idx: Sequence[int] | None = None,
                      which: str = "decoherence",
                      units: UnitContext = SI_UNITS) -> np.ndarray:
    """log factor on an array of times: -(dx^2/2) sum_k weight_k ampl_k(t)."""
    tt = np.atleast_1d(np.asarray(times, dtype=float))
    w, m, c = bath.arrays(idx)
    weight = thermal_weight(w, env_state, units, which)
    total = np.zeros_like(tt)
    for wk, mk, ck, gk in zip(w, m, c, weight):
        total += gk * alpha_sq_squeezed(tt, wk, system.omega_big, mk, ck,
                                        env_state.squeezing_r, units)
    return -0.5 * system.dx ** 2 * total


def _log_factor_scalar(t, bath, system, env_state, idx, which, units) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    w, m, c = bath.arrays(idx)
    weight = thermal_weight(w, env_state, units, which)
    terms = [gk * alpha_sq_squeezed(float(t), wk, system.omega_big, mk, ck,
                                    env_state.squeezing_r, units)
             for wk, mk, ck, gk in zip(w, m, c, weight)]
    return -0.5 * system.dx ** 2 * math.fsum(terms)


def gamma_full(t: float, bath: BathSpec, system: SystemSpec, env_state: EnvInitState,
               idx: Sequence[int] | None = None, log: bool = False,
               units: UnitContext = SI_UNITS) -> float:
    """Decoherence factor of the full model (squeezed thermal initial state)."""
    lv = _log_factor_scalar(t, bath, system, env_state, idx, "decoherence", units)
    return lv if log else math.exp(lv)


def b_full(t: float, bath: BathSpec, system: SystemSpec, env_state: EnvInitState,
           idx: Sequence[int] | None = None, log: bool = False,
           units: UnitContext = SI_UNITS) -> float:
    """Distinguishability factor of the full model."""
    lv = _log_factor_scalar(t, bath, system, env_state, idx, "distinguishability", units)
    return lv if log else math.exp(lv)


def default_averaging_time(bath: BathSpec, periods: float = 1e4) -> float:
    """Reduced default horizon: `periods` revolutions of the slowest oscillator.

    The average converges within a few thousand periods; integrating a full
    second at GHz frequencies buys nothing but cost.
    """
    return periods * 2.0 * math.pi / min(bath.omegas)


def default_sample_count(bath: BathSpec, system: SystemSpec, tau: float,
                         samples_per_period: float = 20.0) -> int:
    """Enough samples to resolve the fastest harmonic 2(max w_k + Omega)."""
    f_max = 2.0 * (max(bath.omegas) + system.omega_big)
    return max(1000, int(math.ceil(samples_per_period * tau * f_max / (2.0 * math.pi))))


def time_average_numeric(factor: str, bath: BathSpec, system: SystemSpec,
                         env_state: EnvInitState, idx: Sequence[int] | None,
                         tau: float, n_samples: int,
                         units: UnitContext = SI_UNITS,
                         chunk: int = 1 << 18) -> TimeAverage:
    """Uniform midpoint-grid estimate of (1/tau) int_0^tau factor dt.

    factor is 'gamma' or 'b'. Accuracy is governed by tau (ergodic
    convergence), not local smoothness; the integrand is bounded in (0, 1].
    """
    if factor not in ("gamma", "b"):
        raise ValueError("factor must be 'gamma' or 'b'")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    which = "decoherence" if factor == "gamma" else "distinguishability"
    half = n_samples // 2
    total = 0.0
    total_half = 0.0
    dt = tau / n_samples
    for start in range(0, n_samples, chunk):
        stop = min(start + chunk, n_samples)
        tt = (np.arange(start, stop) + 0.5) * dt
        vals = np.exp(log_factor_series(tt, bath, system, env_state, idx, which, units))
        total += float(vals.sum())
        if start < half:
            total_half += float(vals[: max(0, half - start)].sum())
    value = total / n_samples
    half_estimate = total_half / half
    return TimeAverage(value=value, convergence=abs(value - half_estimate),
                       tau=tau, n_samples=n_samples)
