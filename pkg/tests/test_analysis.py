import math

import numpy as np
import pytest

from qbmsbs.analysis import (evaluate_factors, formation_time,
                             macrofraction_scaling, resolve_axis, sbs_verdict,
                             scan_tr)
from qbmsbs.bath import BathSpec, EnvInitState, SystemSpec, make_partition
from qbmsbs.pqml import avg_analytic
from qbmsbs.qml import QmlParams, b_qml, gamma_qml, timescales
from qbmsbs.units import DIMENSIONLESS_UNITS

UNITLESS = DIMENSIONLESS_UNITS


class TestVerdict:
    def test_formed(self):
        v = sbs_verdict(0.005, 0.008, epsilon=0.01)
        assert v.formed

    def test_decohered_but_indistinguishable(self):
        v = sbs_verdict(0.005, 0.5, epsilon=0.01)
        assert not v.formed

    def test_distinguishable_but_coherent(self):
        assert not sbs_verdict(0.5, 0.005, epsilon=0.01).formed

    def test_boundary_counts_as_formed(self):
        assert sbs_verdict(0.01, 0.01, epsilon=0.01).formed

    def test_epsilon_range(self):
        for eps in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                sbs_verdict(0.5, 0.5, eps)


class TestEvaluateFactors:
    def test_qml_matches_scalar_functions(self):
        params = QmlParams(dx=1.0, beta_eff=2.0, couplings=(0.7, 1.1, 0.4, 0.9))
        part = make_partition(4, 2, [2])
        tt = np.linspace(0.0, 2.0, 9)
        g, b = evaluate_factors("qml", tt, partition=part, qml_params=params)
        for t, gv, bv in zip(tt, g, b):
            assert gv == pytest.approx(
                gamma_qml(float(t), params, idx=part.unobserved), rel=1e-12)
            assert bv == pytest.approx(
                b_qml(float(t), params, idx=part.macrofractions[0]), rel=1e-12)

    def test_no_macrofraction_gives_unit_b(self):
        params = QmlParams(dx=1.0, beta_eff=2.0, couplings=(1.0, 1.0))
        part = make_partition(2, 2, [])
        _, b = evaluate_factors("qml", [0.0, 0.5, 1.0], partition=part,
                                qml_params=params)
        assert np.all(b == 1.0)

    def test_unknown_regime(self):
        part = make_partition(2, 1, [1])
        with pytest.raises(ValueError):
            evaluate_factors("markov", [0.0], partition=part)


class TestFormationTime:
    def test_qml_grid_matches_analytic(self):
        params = QmlParams(dx=1.0, beta_eff=2.0, couplings=(1.0,) * 4)
        part = make_partition(4, 2, [2])
        ts = timescales(1.0, 2.0, 1.0)
        predicted = ts.tau_b * math.sqrt(math.log(1.0 / 0.01) / 2.0)
        res = formation_time("qml", partition=part, epsilon=0.01,
                             t_max=4 * predicted, t_steps=4001, qml_params=params)
        assert res.reached
        assert res.analytic_time == pytest.approx(predicted, rel=1e-12)
        step = 4 * predicted / 4000
        assert abs(res.time - predicted) <= step
        # monotone decay: nothing comes back above the threshold
        assert res.max_after_crossing <= 0.01

    def test_trivial_threshold_met_at_origin(self):
        params = QmlParams(dx=1.0, beta_eff=2.0, couplings=(1.0, 1.0))
        part = make_partition(2, 1, [1])
        res = formation_time("qml", partition=part, epsilon=1.0, t_max=1.0,
                             t_steps=11, qml_params=params)
        assert res.reached and res.time == 0.0

    def test_bounded_exponent_never_reaches(self):
        bath = BathSpec(omegas=(2.0, 3.0), masses=(1.0, 1.0),
                        couplings=(0.01, 0.01))
        system = SystemSpec(1.0, 0.0, 0.0, 1.0)
        env = EnvInitState(temperature=0.5)
        part = make_partition(2, 1, [1])
        res = formation_time("pqml", partition=part, epsilon=0.01, t_max=50.0,
                             t_steps=2001, bath=bath, system=system,
                             env_state=env, units=UNITLESS)
        assert not res.reached and res.time is None

    def test_revival_reported(self):
        # equal frequencies: both factors return to 1 after a full period
        bath = BathSpec(omegas=(2.0, 2.0), masses=(1.0, 1.0), couplings=(1.0, 1.0))
        system = SystemSpec(1.0, 0.0, 0.0, 2.5)
        env = EnvInitState(temperature=0.5)
        part = make_partition(2, 1, [1])
        res = formation_time("pqml", partition=part, epsilon=0.5,
                             t_max=2 * math.pi / 2.0, t_steps=801, bath=bath,
                             system=system, env_state=env, units=UNITLESS)
        assert res.reached
        assert res.max_after_crossing > 0.9

    def test_bad_arguments(self):
        part = make_partition(2, 1, [1])
        params = QmlParams(dx=1.0, beta_eff=2.0, couplings=(1.0, 1.0))
        with pytest.raises(ValueError):
            formation_time("qml", partition=part, epsilon=0.01, t_max=0.0,
                           t_steps=10, qml_params=params)
        with pytest.raises(ValueError):
            formation_time("qml", partition=part, epsilon=1.5, t_max=1.0,
                           t_steps=10, qml_params=params)


class TestResolveAxis:
    def test_explicit_values(self):
        assert list(resolve_axis({"values": [0.1, 0.5]})) == [0.1, 0.5]

    def test_linear(self):
        got = resolve_axis({"min": 0.0, "max": 1.0, "points": 5})
        assert np.allclose(got, np.linspace(0.0, 1.0, 5))

    def test_log(self):
        got = resolve_axis({"min": 1e-3, "max": 1.0, "points": 4, "log": True})
        assert np.allclose(got, np.logspace(-3, 0, 4))

    def test_errors(self):
        with pytest.raises(ValueError):
            resolve_axis({"values": []})
        with pytest.raises(ValueError):
            resolve_axis({"min": 1.0, "points": 3})
        with pytest.raises(ValueError):
            resolve_axis({"min": 0.0, "max": 1.0, "points": 3, "log": True})
        with pytest.raises(ValueError):
            resolve_axis({"min": 2.0, "max": 1.0, "points": 3})


@pytest.fixture
def scan_setup():
    bath = BathSpec(omegas=(1.7, 2.3, 2.9, 3.4), masses=(1.0,) * 4,
                    couplings=(0.8, 0.6, 0.7, 0.5))
    system = SystemSpec(mass_M=1.0, omega_big=0.5, x1=0.0, x2=2.0)
    part = make_partition(4, 2, [2])
    t_range = {"values": [0.05, 0.2, 1.0, 5.0]}
    r_range = {"values": [0.0, 0.5, 1.5]}
    tau = 200 * 2 * math.pi / 1.7
    return bath, system, part, t_range, r_range, tau


class TestScan:
    def test_values_in_unit_interval(self, scan_setup):
        bath, system, part, t_range, r_range, tau = scan_setup
        grid = scan_tr(bath, system, part, t_range, r_range, tau=tau,
                       n_samples=20_000, units=UNITLESS)
        for row in grid.avg_gamma + grid.avg_b:
            assert all(0.0 < v <= 1.0 for v in row)

    def test_b_nondecreasing_in_temperature(self, scan_setup):
        bath, system, part, t_range, _, tau = scan_setup
        grid = scan_tr(bath, system, part, t_range, {"values": [0.0]}, tau=tau,
                       n_samples=20_000, units=UNITLESS)
        col = [row[0] for row in grid.avg_b]
        assert all(b2 >= b1 for b1, b2 in zip(col, col[1:]))

    def test_larger_unobserved_set_decoheres_more(self, scan_setup):
        bath, system, _, t_range, _, tau = scan_setup
        small = scan_tr(bath, system, make_partition(4, 2, []), t_range,
                        {"values": [0.0]}, tau=tau, n_samples=20_000,
                        units=UNITLESS)
        big = scan_tr(bath, system, make_partition(4, 4, []), t_range,
                      {"values": [0.0]}, tau=tau, n_samples=20_000, units=UNITLESS)
        for i in range(len(small.t_values)):
            assert big.avg_gamma[i][0] <= small.avg_gamma[i][0]

    def test_thread_count_does_not_change_result(self, scan_setup):
        bath, system, part, t_range, r_range, tau = scan_setup
        one = scan_tr(bath, system, part, t_range, r_range, tau=tau,
                      n_samples=20_000, threads=1, units=UNITLESS)
        four = scan_tr(bath, system, part, t_range, r_range, tau=tau,
                       n_samples=20_000, threads=4, units=UNITLESS)
        assert one.avg_gamma == four.avg_gamma
        assert one.avg_b == four.avg_b

    def test_csv_shape(self, scan_setup):
        bath, system, part, t_range, r_range, tau = scan_setup
        grid = scan_tr(bath, system, part, t_range, r_range, tau=tau,
                       n_samples=20_000, units=UNITLESS)
        lines = grid.to_csv_text().strip().split("\n")
        assert lines[0] == "T,r,avg_gamma,avg_b"
        assert len(lines) == 1 + 4 * 3

    def test_nonpositive_temperature_rejected(self, scan_setup):
        bath, system, part, _, r_range, tau = scan_setup
        with pytest.raises(ValueError):
            scan_tr(bath, system, part, {"values": [0.0, 1.0]}, r_range, tau=tau,
                    n_samples=20_000, units=UNITLESS)


class TestMacrofractionScaling:
    def test_qml_exactly_linear(self):
        params = QmlParams(dx=1.0, beta_eff=2.0, couplings=(1.0,) * 8)
        res = macrofraction_scaling("qml", [0, 2, 4, 8], t=0.7,
                                    qml_params=params, c2_mean=1.0)
        ts = timescales(1.0, 2.0, 1.0)
        slope_exact = -(0.7 / ts.tau_b) ** 2
        assert res.slope == pytest.approx(slope_exact, rel=1e-12)
        for size, lg in res.points:
            assert lg == pytest.approx(size * slope_exact, rel=1e-12, abs=1e-15)

    def test_size_zero_is_log_one(self):
        params = QmlParams(dx=1.0, beta_eff=2.0, couplings=(1.0, 1.0))
        res = macrofraction_scaling("qml", [0], t=0.7, qml_params=params)
        assert res.points == ((0, 0.0),)
        assert math.isnan(res.slope)

    def test_pqml_prefix_sums(self):
        bath = BathSpec(omegas=(1.7, 2.3, 2.9), masses=(1.0,) * 3,
                        couplings=(0.8, 0.6, 0.7))
        system = SystemSpec(1.0, 0.0, 0.0, 2.0)
        env = EnvInitState(temperature=0.5)
        res = macrofraction_scaling("pqml", [0, 1, 2, 3], bath=bath,
                                    system=system, env_state=env, units=UNITLESS)
        logs = dict(res.points)
        for k in range(3):
            per = avg_analytic(bath, system, env, idx=[k],
                               which="distinguishability",
                               units=UNITLESS).log_avg_b
            assert logs[k + 1] - logs[k] == pytest.approx(per, rel=1e-10)

    def test_errors(self):
        params = QmlParams(dx=1.0, beta_eff=2.0, couplings=(1.0,))
        with pytest.raises(ValueError):
            macrofraction_scaling("qml", [2, 1], t=0.5, qml_params=params)
        with pytest.raises(ValueError):
            macrofraction_scaling("qml", [1], qml_params=params)  # t missing
        with pytest.raises(ValueError):
            macrofraction_scaling("pqml", [1])
        with pytest.raises(ValueError):
            macrofraction_scaling("boltzmann", [1])
