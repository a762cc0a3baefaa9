"""Decision layer: SBS-formation verdicts, formation times, macrofraction
scaling and the (temperature, squeezing) scan engine.

A scan evaluates the time-averaged decoherence factor over the unobserved
set and the time-averaged distinguishability factor over the first observed
macrofraction, with a single bath (one frequency draw) for the whole grid.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import fullmodel, pqml, qml
from .bath import BathSpec, EnvInitState, Partition, SystemSpec
from .specfun import bessel_i0
from .units import SI_UNITS, UnitContext


@dataclass(frozen=True)
class SbsVerdict:
    """Formed iff both factors are at or below the threshold."""

    formed: bool
    gamma_value: float
    b_value: float
    epsilon: float


@dataclass(frozen=True)
class FormationResult:
    """First grid time with both factors <= epsilon, plus (QML only) the
    analytic prediction and, since almost-periodic factors can revive, the
    largest factor value seen after the first crossing."""

    time: float | None
    reached: bool
    analytic_time: float | None
    max_after_crossing: float | None
    epsilon: float


@dataclass(frozen=True)
class ScalingResult:
    points: tuple[tuple[int, float], ...]
    slope: float


@dataclass(frozen=True)
class ScanGrid:
    """Averaged factors on a (temperature, squeezing) grid; matrices are
    indexed [temperature, squeezing]."""

    t_values: tuple[float, ...]
    r_values: tuple[float, ...]
    avg_gamma: tuple[tuple[float, ...], ...]
    avg_b: tuple[tuple[float, ...], ...]
    bath_fingerprint: dict = field(default_factory=dict)
    partition_descriptor: dict = field(default_factory=dict)

    def to_csv_text(self) -> str:
        lines = ["T,r,avg_gamma,avg_b"]
        for i, t in enumerate(self.t_values):
            for j, r in enumerate(self.r_values):
                lines.append(f"{t:.16e},{r:.16e},"
                             f"{self.avg_gamma[i][j]:.16e},{self.avg_b[i][j]:.16e}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "t_values": list(self.t_values),
            "r_values": list(self.r_values),
            "avg_gamma": [list(row) for row in self.avg_gamma],
            "avg_b": [list(row) for row in self.avg_b],
            "bath_fingerprint": dict(self.bath_fingerprint),
            "partition_descriptor": dict(self.partition_descriptor),
        }


def sbs_verdict(gamma: float, b: float, epsilon: float) -> SbsVerdict:
    """Spectrum broadcast structure has formed iff decoherence is complete
    (gamma <= eps) and the macrofraction states are distinguishable (b <= eps).

    Decohered-but-indistinguishable (gamma small, b large) is the noisy
    regime where decoherence happened yet no information accumulated.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    return SbsVerdict(formed=(gamma <= epsilon and b <= epsilon),
                      gamma_value=gamma, b_value=b, epsilon=epsilon)


def evaluate_factors(regime: str, times, *, partition: Partition,
                     bath: BathSpec | None = None,
                     system: SystemSpec | None = None,
                     env_state: EnvInitState | None = None,
                     qml_params: qml.QmlParams | None = None,
                     units: UnitContext = SI_UNITS):
    """(gamma, b) arrays over a time grid for the given regime. gamma uses
    the unobserved set, b the first observed macrofraction (empty set if no
    macrofraction is defined, giving b = 1)."""
    tt = np.atleast_1d(np.asarray(times, dtype=float))
    idx_g = partition.unobserved
    idx_b = partition.macrofractions[0] if partition.macrofractions else ()
    if regime == "qml":
        if qml_params is None:
            raise ValueError("qml regime requires qml_params")
        cs = np.asarray(qml_params.couplings)
        half_dx2 = 0.5 * qml_params.dx ** 2
        coth = 1.0 / math.tanh(qml_params.beta_eff / 2.0)
        th = math.tanh(qml_params.beta_eff / 2.0)
        s_g = float(np.sum(cs[list(idx_g)] ** 2)) if idx_g else 0.0
        s_b = float(np.sum(cs[list(idx_b)] ** 2)) if idx_b else 0.0
        g = np.exp(-half_dx2 * coth * s_g * tt ** 2)
        b = np.exp(-half_dx2 * th * s_b * tt ** 2)
        return g, b
    if regime == "pqml":
        g = np.exp(pqml.log_factor_series(tt, bath, system, env_state, idx_g,
                                          "decoherence", units))
        b = np.exp(pqml.log_factor_series(tt, bath, system, env_state, idx_b,
                                          "distinguishability", units))
        return g, b
    if regime == "full":
        g = np.exp(fullmodel.log_factor_series(tt, bath, system, env_state, idx_g,
                                               "decoherence", units))
        b = np.exp(fullmodel.log_factor_series(tt, bath, system, env_state, idx_b,
                                               "distinguishability", units))
        return g, b
    raise ValueError(f"unknown regime '{regime}'")


def formation_time(regime: str, *, partition: Partition, epsilon: float,
                   t_max: float, t_steps: int,
                   bath: BathSpec | None = None,
                   system: SystemSpec | None = None,
                   env_state: EnvInitState | None = None,
                   qml_params: qml.QmlParams | None = None,
                   units: UnitContext = SI_UNITS) -> FormationResult:
    """First grid time at which both factors cross the threshold.

    First crossing, not "crossing and staying below": revivals are physical
    and reported through max_after_crossing instead of being hidden.
    """
    if t_max <= 0 or t_steps < 2:
        raise ValueError("t_max must be positive and t_steps at least 2")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    tt = np.linspace(0.0, t_max, t_steps)
    g, b = evaluate_factors(regime, tt, partition=partition, bath=bath,
                            system=system, env_state=env_state,
                            qml_params=qml_params, units=units)
    analytic = None
    if regime == "qml":
        analytic = _qml_formation_prediction(qml_params, partition, epsilon)
    hits = np.nonzero((g <= epsilon) & (b <= epsilon))[0]
    if hits.size == 0:
        return FormationResult(time=None, reached=False, analytic_time=analytic,
                               max_after_crossing=None, epsilon=epsilon)
    i = int(hits[0])
    later = max(float(g[i + 1:].max()), float(b[i + 1:].max())) if i + 1 < t_steps else None
    return FormationResult(time=float(tt[i]), reached=True, analytic_time=analytic,
                           max_after_crossing=later, epsilon=epsilon)


def _qml_formation_prediction(params: qml.QmlParams, partition: Partition,
                              epsilon: float) -> float:
    """Analytic crossing time: the later of the gamma and b crossings, with
    exact per-set mean-square couplings (b is the slower one for equal sets)."""
    log_eps = math.log(1.0 / epsilon)
    times = []
    idx_b = partition.macrofractions[0] if partition.macrofractions else ()
    for idx, which in ((partition.unobserved, "decoherence"),
                       (idx_b, "distinguishability")):
        if not idx:
            continue
        c2 = [params.couplings[i] ** 2 for i in idx]
        ts = qml.timescales(params.dx, params.beta_eff, math.fsum(c2) / len(c2))
        tau = ts.tau_d if which == "decoherence" else ts.tau_b
        times.append(tau * math.sqrt(log_eps / len(c2)))
    return max(times) if times else 0.0


def resolve_axis(spec: dict) -> np.ndarray:
    """Grid axis from {'values': [...]} or {'min','max','points','log'}."""
    if "values" in spec:
        vals = np.asarray(spec["values"], dtype=float)
        if vals.size == 0:
            raise ValueError("axis value list must be non-empty")
        return vals
    try:
        lo, hi, points = spec["min"], spec["max"], int(spec["points"])
    except KeyError as exc:
        raise ValueError(f"axis spec missing key {exc}") from exc
    if points < 1 or lo > hi:
        raise ValueError("axis spec requires points >= 1 and min <= max")
    if spec.get("log", False):
        if lo <= 0:
            raise ValueError("log axis requires min > 0")
        return np.logspace(math.log10(lo), math.log10(hi), points)
    return np.linspace(lo, hi, points)


def scan_tr(bath: BathSpec, system: SystemSpec, partition: Partition,
            t_range: dict, r_range: dict, tau: float | None = None,
            n_samples: int | None = None, threads: int = 1,
            units: UnitContext = SI_UNITS,
            bath_fingerprint: dict | None = None,
            chunk: int = 1 << 17) -> ScanGrid:
    """Time-averaged (gamma, b) over a temperature x squeezing grid.

    One bath for the whole grid. The per-oscillator amplitude trajectories
    are computed once per time chunk and reused across every grid point, so
    the cost is dominated by the exp() of the weighted sums. Results do not
    depend on the thread count or evaluation order.
    """
    partition.validate_against(bath.n)
    temps = resolve_axis(t_range)
    rs = resolve_axis(r_range)
    if np.any(temps <= 0):
        raise ValueError("temperatures must be strictly positive")
    if tau is None:
        tau = fullmodel.default_averaging_time(bath)
    if n_samples is None:
        n_samples = fullmodel.default_sample_count(bath, system, tau)

    idx_g = partition.unobserved
    idx_b = partition.macrofractions[0] if partition.macrofractions else ()
    union = sorted(set(idx_g) | set(idx_b))
    pos = {i: j for j, i in enumerate(union)}
    rows_g = [pos[i] for i in idx_g]
    rows_b = [pos[i] for i in idx_b]
    w_u, m_u, c_u = bath.arrays(union)

    # thermal weights per temperature, (nT, k)
    args = units.hbar * np.outer(1.0 / temps, w_u) / (2.0 * units.k_boltzmann)
    th = np.tanh(args)
    weights_g = (1.0 / th)[:, rows_g]
    weights_b = th[:, rows_b]
    half_dx2 = 0.5 * system.dx ** 2

    sums_g = np.zeros((len(temps), len(rs)))
    sums_b = np.zeros((len(temps), len(rs)))
    dt = tau / n_samples

    def column(j: int, amp: np.ndarray, re2: np.ndarray):
        r = rs[j]
        if r == 0.0:
            ampl = amp
        else:
            ampl = math.cosh(2.0 * r) * (amp - math.tanh(2.0 * r) * re2)
        pg = np.exp(-half_dx2 * (weights_g @ ampl[rows_g])).sum(axis=1) if rows_g \
            else np.full(len(temps), float(ampl.shape[1]))
        pb = np.exp(-half_dx2 * (weights_b @ ampl[rows_b])).sum(axis=1) if rows_b \
            else np.full(len(temps), float(ampl.shape[1]))
        return j, pg, pb

    for start in range(0, n_samples, chunk):
        stop = min(start + chunk, n_samples)
        tt = (np.arange(start, stop) + 0.5) * dt
        amp = np.empty((len(union), len(tt)))
        re2 = np.empty((len(union), len(tt)))
        for k, (wk, mk, ck) in enumerate(zip(w_u, m_u, c_u)):
            amp[k] = fullmodel.alpha_sq_full(tt, wk, system.omega_big, mk, ck, units)
            re2[k] = fullmodel.re_alpha_sq_full(tt, wk, system.omega_big, mk, ck, units)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda j: column(j, amp, re2), range(len(rs))))
        else:
            results = [column(j, amp, re2) for j in range(len(rs))]
        for j, pg, pb in results:
            sums_g[:, j] += pg
            sums_b[:, j] += pb

    avg_g = sums_g / n_samples
    avg_b = sums_b / n_samples
    return ScanGrid(
        t_values=tuple(float(t) for t in temps),
        r_values=tuple(float(r) for r in rs),
        avg_gamma=tuple(tuple(float(v) for v in row) for row in avg_g),
        avg_b=tuple(tuple(float(v) for v in row) for row in avg_b),
        bath_fingerprint=dict(bath_fingerprint or {"n": bath.n}),
        partition_descriptor={
            "unobserved_size": len(idx_g),
            "mac_sizes": [len(mac) for mac in partition.macrofractions],
        })


def macrofraction_scaling(regime: str, sizes: Sequence[int], *,
                          which: str = "distinguishability",
                          t: float | None = None,
                          qml_params: qml.QmlParams | None = None,
                          bath: BathSpec | None = None,
                          system: SystemSpec | None = None,
                          env_state: EnvInitState | None = None,
                          c2_mean: float | None = None,
                          units: UnitContext = SI_UNITS) -> ScalingResult:
    """log factor as a function of macrofraction size, with a fitted slope.

    regime 'qml': law-of-large-numbers form at fixed t, exactly linear in
    size. regime 'pqml': analytic infinite-time average over the first
    `size` oscillators of the bath.
    """
    sizes = [int(s) for s in sizes]
    if any(b_ < a_ for a_, b_ in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be non-decreasing")
    if regime == "qml":
        if qml_params is None or t is None:
            raise ValueError("qml scaling requires qml_params and t")
        mean_c2 = c2_mean if c2_mean is not None else \
            math.fsum(c * c for c in qml_params.couplings) / len(qml_params.couplings)
        ts = qml.timescales(qml_params.dx, qml_params.beta_eff, mean_c2)
        tau = ts.tau_d if which == "decoherence" else ts.tau_b
        logs = [-s * (t / tau) ** 2 for s in sizes]
    elif regime == "pqml":
        if bath is None or system is None or env_state is None:
            raise ValueError("pqml scaling requires bath, system and env_state")
        if sizes and sizes[-1] > bath.n:
            raise ValueError("largest size exceeds the bath")
        a = pqml.bessel_arguments(bath, system, env_state, None, which, units)
        per_osc = np.array([-float(ak) + bessel_i0(float(ak)).log_value for ak in a])
        prefix = np.concatenate(([0.0], np.cumsum(per_osc)))
        logs = [float(prefix[s]) for s in sizes]
    else:
        raise ValueError("regime must be 'qml' or 'pqml'")
    slope = float(np.polyfit(np.asarray(sizes, float), np.asarray(logs), 1)[0]) \
        if len(sizes) > 1 else math.nan
    return ScalingResult(points=tuple(zip(sizes, logs)), slope=slope)
