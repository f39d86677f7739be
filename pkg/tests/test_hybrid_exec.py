import math

import numpy as np
import pytest

from hybrid_pe import (ExecConfig, HybridSystemDef, HybridTimeDomain,
                       NonFiniteStateError, locate_jump, rk4_step, simulate,
                       simulate_on_domain)

TWO_PI = 2.0 * math.pi


def const_field(c):
    return lambda x, t, j: np.full_like(x, c)


class TestRk4Step:
    def test_zero_field(self):
        x = rk4_step(const_field(0.0), np.array([3.0, 6.0]), 0.0, 0, 0.1)
        np.testing.assert_array_equal(x, [3.0, 6.0])

    def test_exact_on_constant_rate(self):
        x = rk4_step(const_field(1.0), np.array([0.0]), 0.0, 0, 1.0)
        assert x[0] == 1.0

    def test_exponential_decay(self):
        x = rk4_step(lambda x, t, j: -x, np.array([1.0]), 0.0, 0, 0.1)
        assert x[0] == pytest.approx(math.exp(-0.1), abs=1e-7)

    def test_global_order(self):
        # halving the step divides the global error by roughly 2^4
        def integrate(h):
            x = np.array([1.0])
            t = 0.0
            while t < 1.0 - 1e-12:
                x = rk4_step(lambda x, t, j: -x, x, t, 0, min(h, 1.0 - t))
                t += h
            return abs(x[0] - math.exp(-1.0))

        ratio = integrate(0.1) / integrate(0.05)
        assert 14.0 <= ratio <= 18.0

    def test_nonfinite_detection(self):
        with pytest.raises(NonFiniteStateError):
            rk4_step(lambda x, t, j: x * np.inf, np.array([1.0]), 0.0, 0, 0.1)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            rk4_step(const_field(0.0), np.array([1.0]), 0.0, 0, -0.1)


class TestLocateJump:
    def test_linear_time_crossing(self):
        # input u(t) = t crossing 2 pi inside [6.0, 6.4]
        pred = lambda x, t, j: t >= TWO_PI
        t_ev, _ = locate_jump(pred, const_field(1.0), np.array([6.0]), 6.0,
                              6.4, 0, 1e-9)
        assert t_ev == pytest.approx(TWO_PI, abs=1e-9)

    def test_state_crossing(self):
        pred = lambda x, t, j: x[0] >= 1.0
        x0 = np.array([0.9])
        t_ev, x_ev = locate_jump(pred, const_field(1.0), x0, 0.9, 1.1, 0, 1e-9)
        assert t_ev == pytest.approx(1.0, abs=1e-9)
        assert x_ev[0] >= 1.0

    def test_timer_crossing(self):
        pred = lambda x, t, j: x[0] >= 10.0
        t_ev, _ = locate_jump(pred, const_field(1.0), np.array([9.95]), 9.95,
                              10.05, 0, 1e-9)
        assert t_ev == pytest.approx(10.0, abs=1e-9)

    def test_predicate_true_at_start(self):
        with pytest.raises(ValueError):
            locate_jump(lambda x, t, j: True, const_field(1.0),
                        np.array([0.0]), 0.0, 0.1, 0, 1e-9)

    def test_no_crossing(self):
        with pytest.raises(ValueError):
            locate_jump(lambda x, t, j: False, const_field(1.0),
                        np.array([0.0]), 0.0, 0.1, 0, 1e-9)


def sawtooth_system():
    return HybridSystemDef(
        flow_map=const_field(1.0),
        jump_map=lambda x, t, j: np.zeros_like(x),
        flow_predicate=lambda x, t, j: True,
        jump_predicate=lambda x, t, j: x[0] >= 1.0,
        state_dim=1,
    )


class TestSimulate:
    def test_constant_no_jumps(self):
        sysd = HybridSystemDef(const_field(0.0), lambda x, t, j: x,
                               lambda x, t, j: True, lambda x, t, j: False, 1)
        arc = simulate(sysd, np.array([5.0]), ExecConfig(h=0.1, t_end=1.0))
        assert arc.domain.jump_times == (0.0, 1.0)
        assert np.all(arc.values[0] == 5.0)

    def test_sawtooth_domain(self):
        arc = simulate(sawtooth_system(), np.array([0.0]),
                       ExecConfig(h=0.1, t_end=2.5, jump_location_tol=1e-10))
        assert arc.domain.num_jumps == 2
        np.testing.assert_allclose(arc.domain.jump_times, (0.0, 1.0, 2.0, 2.5),
                                   atol=1e-9)

    def test_jump_predicate_holds_at_pre_jump_samples(self):
        arc = simulate(sawtooth_system(), np.array([0.0]),
                       ExecConfig(h=0.1, t_end=2.5))
        for j in range(arc.domain.num_jumps):
            assert arc.values[j][-1][0] >= 1.0

    def test_matches_on_domain_when_no_jumps(self):
        sysd = HybridSystemDef(lambda x, t, j: -x, lambda x, t, j: x,
                               lambda x, t, j: True, lambda x, t, j: False, 1)
        a = simulate(sysd, np.array([1.0]), ExecConfig(h=0.1, t_end=1.0))
        b = simulate_on_domain(sysd, np.array([1.0]),
                               HybridTimeDomain((0.0, 1.0)), 0.1)
        np.testing.assert_array_equal(a.times[0], b.times[0])
        np.testing.assert_array_equal(a.values[0], b.values[0])

    def test_domains_are_valid(self):
        arc = simulate(sawtooth_system(), np.array([0.0]),
                       ExecConfig(h=0.13, t_end=3.3))
        jt = arc.domain.jump_times
        assert all(b >= a for a, b in zip(jt, jt[1:]))

    def test_stuck_state(self):
        sysd = HybridSystemDef(const_field(1.0), lambda x, t, j: x,
                               lambda x, t, j: x[0] < 0.5,
                               lambda x, t, j: False, 1)
        arc = simulate(sysd, np.array([0.0]), ExecConfig(h=0.1, t_end=5.0))
        assert arc.termination == "stuck"
        assert arc.final_point().t < 1.0

    def test_j_max(self):
        sysd = HybridSystemDef(const_field(0.0), lambda x, t, j: x,
                               lambda x, t, j: True, lambda x, t, j: True, 1)
        arc = simulate(sysd, np.array([0.0]), ExecConfig(h=0.1, t_end=1.0, j_max=3))
        assert arc.termination == "j_max"
        assert arc.domain.num_jumps == 3

    def test_flow_priority(self):
        # state sits in C and D; flow priority keeps flowing
        sysd = HybridSystemDef(const_field(1.0), lambda x, t, j: np.zeros(1),
                               lambda x, t, j: True, lambda x, t, j: True, 1)
        arc = simulate(sysd, np.array([0.0]),
                       ExecConfig(h=0.1, t_end=1.0, priority="flow"))
        assert arc.domain.num_jumps == 0

    def test_rejects_initial_state_outside_both_sets(self):
        sysd = HybridSystemDef(const_field(0.0), lambda x, t, j: x,
                               lambda x, t, j: False, lambda x, t, j: False, 1)
        with pytest.raises(ValueError):
            simulate(sysd, np.array([0.0]), ExecConfig(h=0.1, t_end=1.0))


class TestSimulateOnDomain:
    def test_counter_jump(self):
        sysd = HybridSystemDef(const_field(0.0),
                               lambda x, t, j: x + 1.0,
                               lambda x, t, j: True, lambda x, t, j: False, 1)
        arc = simulate_on_domain(sysd, np.array([4.0]),
                                 HybridTimeDomain((0.0, 1.0, 2.0)), 0.1)
        assert arc.final_value()[0] == 5.0

    def test_reset_keeps_pre_jump_value(self):
        sysd = HybridSystemDef(const_field(1.0),
                               lambda x, t, j: np.zeros_like(x),
                               lambda x, t, j: True, lambda x, t, j: False, 1)
        arc = simulate_on_domain(sysd, np.array([0.0]),
                                 HybridTimeDomain((0.0, 1.0, 2.0)), 0.1)
        assert arc.values[0][-1][0] == pytest.approx(1.0, abs=1e-12)
        assert arc.values[1][0][0] == 0.0
        assert arc.values[1][-1][0] == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_intervals(self):
        sysd = HybridSystemDef(const_field(0.0), lambda x, t, j: x + 1.0,
                               lambda x, t, j: True, lambda x, t, j: False, 1)
        arc = simulate_on_domain(sysd, np.array([0.0]),
                                 HybridTimeDomain((0.0, 0.0, 0.0, 0.0)), 0.1)
        assert arc.final_value()[0] == 2.0


class TestExecConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExecConfig(h=0.0, t_end=1.0)
        with pytest.raises(ValueError):
            ExecConfig(h=0.1, t_end=1.0, jump_location_tol=0.2)
        with pytest.raises(ValueError):
            ExecConfig(h=0.1, t_end=1.0, priority="sometimes")
