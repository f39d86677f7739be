import math

import numpy as np
import pytest

from hybrid_pe import (AssumptionViolationError, EstimatorParams,
                       EstimatorState, ExecConfig, HybridTimeDomain,
                       NoiseModel, PlantModel, StateLayout, ct_gradient_run,
                       dt_gradient_run, epsilon, error_class_step_flow,
                       error_class_step_jump, hg_flow, hg_jump, hnu_flow,
                       hnu_jump, make_estimator_system, run_error_class,
                       simulate)
from hybrid_pe.scenarios.motivational import (MotivationalConfig, build_plant,
                                              fast_ct_baseline, fast_system,
                                              initial_state, phibar_c,
                                              phibar_d, xbar_c, xbar_d)

TWO_PI = 2.0 * math.pi


@pytest.fixture()
def motiv_plant():
    return build_plant(MotivationalConfig())


@pytest.fixture()
def params():
    return EstimatorParams(gamma_c=1.0, lambda_c=0.1, gamma_d=1.0, lambda_d=0.5)


def make_state(x, theta_hat, psi, eta, tau=0.0, k=0):
    return EstimatorState(np.asarray(x, float), np.asarray(theta_hat, float),
                          np.asarray(psi, float), np.asarray(eta, float),
                          tau, k)


class TestEpsilon:
    def test_zeroed_by_initialization(self):
        s = make_state([3, 6], [0, 0], np.zeros((2, 2)), [-3, -6])
        np.testing.assert_array_equal(epsilon(s, np.ones(2)), [0.0, 0.0])

    def test_half_initialization(self):
        s = make_state([3, 6], [0, 0], np.zeros((2, 2)), [-1.5, -3])
        np.testing.assert_array_equal(epsilon(s, np.ones(2)), [1.5, 3.0])

    def test_identity_filter(self):
        s = make_state([1, 1], [0, 0], np.eye(2), [0, 0])
        np.testing.assert_array_equal(epsilon(s, np.ones(2)), [0.0, 0.0])

    def test_dimension_mismatch(self):
        s = make_state([1, 1], [0, 0], np.eye(2), [0, 0])
        with pytest.raises(ValueError):
            epsilon(s, np.ones(3))


class TestFlowMap:
    def test_estimate_stationary_on_target_set(self, motiv_plant, params):
        # theta_hat = theta and zero filter error: no estimate drift
        psi = np.array([[0.5, 0.2], [0.1, 0.9]])
        theta = motiv_plant.theta_true
        x = np.array([2.0, -1.0])
        eta = psi @ theta - x  # epsilon = 0
        s = make_state(x, theta, psi, eta, tau=1.2, k=0)
        ds = hg_flow(s, motiv_plant, params)
        np.testing.assert_allclose(ds.theta_hat, 0.0, atol=1e-15)

    def test_zero_filter_freezes_estimate(self, motiv_plant, params):
        s = make_state([3, 6], [0.3, -0.7], np.zeros((2, 2)), [0, 0], tau=0.4)
        ds = hg_flow(s, motiv_plant, params)
        np.testing.assert_array_equal(ds.theta_hat, [0.0, 0.0])
        np.testing.assert_allclose(ds.psi, motiv_plant.phi_c(0.4, 0))

    def test_filter_drive_at_quarter_period(self, motiv_plant, params):
        s = make_state([4.0, 6.0], [0, 0], np.zeros((2, 2)), [-4, -6],
                       tau=math.pi / 2, k=0)
        ds = hg_flow(s, motiv_plant, params)
        np.testing.assert_allclose(ds.psi, [[1.0, 0.0], [0.0, 0.0]], atol=1e-15)


class TestJumpMap:
    def test_filter_reset_from_zero(self, motiv_plant, params):
        s = make_state([3, 6], [0, 0], np.zeros((2, 2)), [-3, -6],
                       tau=TWO_PI, k=0)
        s_plus = hg_jump(s, motiv_plant, params)
        np.testing.assert_allclose(s_plus.psi, [[1, 2], [2, 4]])
        assert s_plus.k == 1 and s_plus.tau == TWO_PI

    def test_target_set_forward_invariant(self, motiv_plant, params):
        psi = np.array([[0.5, 0.2], [0.1, 0.9]])
        theta = motiv_plant.theta_true
        x = np.array([2.0, -1.0])
        eta = psi @ theta - x
        s = make_state(x, theta, psi, eta, tau=TWO_PI, k=0)
        s_plus = hg_jump(s, motiv_plant, params)
        np.testing.assert_allclose(s_plus.theta_hat, theta, atol=1e-14)
        np.testing.assert_allclose(
            epsilon(s_plus, theta),
            (1 - params.lambda_d) * epsilon(s, theta), atol=1e-14)

    def test_scalar_projection_update(self):
        # psi+ = 1, gamma_d = 1, theta_hat = 0, y+ = 1: estimate moves to 0.5
        plant = PlantModel(
            n=1, p=1, theta_true=np.array([1.0]),
            f_c=lambda x, u: np.zeros(1), g_d=lambda x, u: np.zeros(1),
            phi_c=lambda t, j: np.ones((1, 1)),
            phi_d=lambda t, j: np.ones((1, 1)),
            u=lambda t, j: 0.0)
        params = EstimatorParams(1.0, 1.0, 1.0, 0.5)
        # choose x, eta, psi so that psi+ = 1 and y+ = 1 (eps+ = 0)
        psi = np.array([[0.0]])
        x = np.array([0.0])
        eta = np.array([0.0])   # eta+ = 0.5(x+eta) = 0; x+ = phi_d theta = 1
        s = make_state(x, [0.0], psi, eta)
        s_plus = hg_jump(s, plant, params)
        assert s_plus.psi[0, 0] == 1.0
        assert s_plus.theta_hat[0] == pytest.approx(0.5)

    def test_residual_contraction_scalar(self):
        rng = np.random.default_rng(11)
        params = EstimatorParams(1.0, 0.5, 0.7, 0.6)
        for _ in range(50):
            plant = PlantModel(
                n=1, p=1, theta_true=rng.normal(size=1),
                f_c=lambda x, u: np.zeros(1), g_d=lambda x, u: np.zeros(1),
                phi_c=lambda t, j: np.ones((1, 1)),
                phi_d=lambda t, j: rng.normal(size=(1, 1)),
                u=lambda t, j: 0.0)
            s = make_state(rng.normal(size=1), rng.normal(size=1),
                           rng.normal(size=(1, 1)), rng.normal(size=1))
            s_plus = hg_jump(s, plant, params)
            y_plus = s_plus.x + s_plus.eta
            before = abs(y_plus - s_plus.psi @ s.theta_hat)
            after = abs(y_plus - s_plus.psi @ s_plus.theta_hat)
            assert after <= before + 1e-12


class TestNoiseVariant:
    def test_zero_noise_degenerate(self, motiv_plant, params):
        s = make_state([3, 6], [0.2, 0.1], 0.3 * np.ones((2, 2)), [-1, -2],
                       tau=1.0, k=0)
        zero = NoiseModel(nu=lambda t, j: np.zeros(2))
        d1 = hg_flow(s, motiv_plant, params)
        d2 = hnu_flow(s, motiv_plant, params, zero)
        for f in ("x", "theta_hat", "psi", "eta"):
            np.testing.assert_array_equal(getattr(d1, f), getattr(d2, f))
        j1 = hg_jump(make_state([3, 6], [0.2, 0.1], 0.3 * np.ones((2, 2)),
                                [-1, -2], tau=TWO_PI, k=0), motiv_plant, params)
        j2 = hnu_jump(make_state([3, 6], [0.2, 0.1], 0.3 * np.ones((2, 2)),
                                 [-1, -2], tau=TWO_PI, k=0), motiv_plant,
                      params, zero)
        for f in ("x", "theta_hat", "psi", "eta"):
            np.testing.assert_array_equal(getattr(j1, f), getattr(j2, f))

    def test_constant_noise_shifts_eta_rate(self, motiv_plant, params):
        # with f_c = 0, eta_rate differs from the noiseless one by -lambda_c nu
        s = make_state([3, 6], [0, 0], np.zeros((2, 2)), [-3, -6], tau=0.7)
        nu = NoiseModel(nu=lambda t, j: np.ones(2))
        d_noisy = hnu_flow(s, motiv_plant, params, nu)
        d_clean = hg_flow(s, motiv_plant, params)
        np.testing.assert_allclose(d_noisy.eta - d_clean.eta,
                                   -params.lambda_c * np.ones(2), atol=1e-15)

    def test_zero_noise_run_bitwise_equal(self, params):
        cfg = MotivationalConfig(t_end=TWO_PI + 1.0)
        plant = build_plant(cfg)
        zero = NoiseModel(nu=lambda t, j: np.zeros(2))
        vec0 = initial_state(cfg, cfg.eta0_case1)
        ec = ExecConfig(h=cfg.h, t_end=cfg.t_end, jump_location_tol=1e-12)
        a = simulate(make_estimator_system(plant, params), vec0, ec)
        b = simulate(make_estimator_system(plant, params, zero), vec0, ec)
        for v1, v2 in zip(a.values, b.values):
            np.testing.assert_array_equal(v1, v2)


class TestTargetSetInvariance:
    def test_exact_start_stays_on_target_set(self, params):
        cfg = MotivationalConfig(t_end=2 * TWO_PI + 1.0,
                                 theta_hat0=(1.0, 1.0))
        vec0 = initial_state(cfg, cfg.eta0_case1)  # eps(0,0) = 0
        arc = simulate(fast_system(cfg), vec0,
                       ExecConfig(h=cfg.h, t_end=cfg.t_end,
                                  jump_location_tol=1e-12))
        lay = StateLayout(2, 2)
        t, j, v = arc.ordered()
        theta = np.ones(2)
        th_err = np.linalg.norm(v[:, lay.ith] - theta, axis=1)
        psi = v[:, lay.ipsi].reshape(-1, 2, 2)
        eps = np.linalg.norm(v[:, lay.ix] + v[:, lay.ieta] - psi @ theta, axis=1)
        assert (th_err + eps).max() <= 1e-9


class TestEstimatorReadsOnlyMeasurements:
    def test_flow_components_blind_to_hidden_parameter(self, params):
        cfg = MotivationalConfig()
        real = build_plant(cfg)
        garbage = build_plant(cfg)
        garbage.theta_true = np.array([999.0, -999.0])
        rng = np.random.default_rng(5)
        for _ in range(20):
            s = make_state(rng.normal(size=2), rng.normal(size=2),
                           rng.normal(size=(2, 2)), rng.normal(size=2),
                           tau=float(rng.uniform(0, TWO_PI)), k=0)
            d_real = hg_flow(s, real, params)
            d_fake = hg_flow(s, garbage, params)
            for f in ("theta_hat", "psi", "eta"):
                np.testing.assert_array_equal(getattr(d_real, f),
                                              getattr(d_fake, f))
            assert not np.array_equal(d_real.x, d_fake.x)

    def test_jump_update_consumes_only_measured_states(self, params):
        # replaying the recorded pre/post plant states through the update
        # law reproduces the run's estimator jump bit for bit
        cfg = MotivationalConfig(t_end=2 * TWO_PI + 0.5)
        plant = build_plant(cfg)
        arc = simulate(make_estimator_system(plant, params),
                       initial_state(cfg, cfg.eta0_case2),
                       ExecConfig(h=cfg.h, t_end=cfg.t_end,
                                  jump_location_tol=1e-12))
        lay = StateLayout(2, 2)
        from hybrid_pe.estimators import estimator_jump
        for j in range(arc.domain.num_jumps):
            pre = lay.unpack(arc.values[j][-1])
            post = lay.unpack(arc.values[j + 1][0])
            th_plus, psi_plus, eta_plus = estimator_jump(
                pre.x, post.x, pre.eta, pre.psi, pre.theta_hat,
                plant.u(pre.tau, pre.k), plant.phi_d(pre.tau, pre.k),
                plant.g_d, params)
            np.testing.assert_array_equal(th_plus, post.theta_hat)
            np.testing.assert_array_equal(psi_plus, post.psi)
            np.testing.assert_array_equal(eta_plus, post.eta)


class TestFilterErrorClosure:
    def test_flow_and_jump_closed_forms(self, params):
        cfg = MotivationalConfig(t_end=2 * TWO_PI + 0.5)
        arc = simulate(fast_system(cfg), initial_state(cfg, cfg.eta0_case2),
                       ExecConfig(h=cfg.h, t_end=cfg.t_end,
                                  jump_location_tol=1e-12))
        lay = StateLayout(2, 2)
        theta = np.ones(2)
        tol = 10.0 * cfg.h ** 4
        for j, (ts, vs) in enumerate(zip(arc.times, arc.values)):
            psi = vs[:, lay.ipsi].reshape(-1, 2, 2)
            eps = vs[:, lay.ix] + vs[:, lay.ieta] - psi @ theta
            for k in range(len(ts) - 1):
                decay = math.exp(-params.lambda_c * (ts[k + 1] - ts[k]))
                np.testing.assert_allclose(eps[k + 1], eps[k] * decay, atol=tol)
            if j < arc.domain.num_jumps:
                psi_n = arc.values[j + 1][0][lay.ipsi].reshape(2, 2)
                eps_next = (arc.values[j + 1][0][lay.ix]
                            + arc.values[j + 1][0][lay.ieta] - psi_n @ theta)
                np.testing.assert_allclose(
                    eps_next, (1 - params.lambda_d) * eps[-1], atol=tol)


class TestContinuousBaseline:
    def test_zero_regressor_freezes_estimate(self, params):
        run = ct_gradient_run(lambda t: np.zeros((2, 2)),
                              lambda t: np.array([1.0, 2.0]), params,
                              t_end=2.0, h=0.01, theta_hat0=np.array([0.3, 0.4]))
        np.testing.assert_array_equal(run.theta_hat[-1], [0.3, 0.4])

    def test_scalar_closed_form(self):
        # phi = 1, lambda_c = gamma_c = 1, theta = 1, eps(0) = 0:
        # theta_hat(t) = 1 - exp(-int (1 - e^-s)^2 ds), monotone to 1
        params = EstimatorParams(1.0, 1.0, 1.0, 0.5)
        run = ct_gradient_run(lambda t: np.ones((1, 1)),
                              lambda t: np.array([1.0 + t]), params,
                              t_end=6.0, h=0.001,
                              theta_hat0=np.zeros(1), psi0=np.zeros((1, 1)),
                              eta0=np.array([-1.0]))

        def oracle(t):
            integral = t - 2.0 * (1 - math.exp(-t)) + 0.5 * (1 - math.exp(-2 * t))
            return 1.0 - math.exp(-integral)

        for idx in (1000, 3000, 6000):
            t = run.t[idx]
            assert run.theta_hat[idx, 0] == pytest.approx(oracle(t), abs=1e-6)
        diffs = np.diff(run.theta_hat[:, 0])
        assert np.all(diffs >= -1e-15)

    def test_flattened_signals_leave_second_component_untouched(self, params):
        run = ct_gradient_run(phibar_c, xbar_c, params, t_end=4 * TWO_PI,
                              h=0.005, theta_hat0=np.zeros(2),
                              psi0=np.zeros((2, 2)),
                              eta0=np.array([-3.0, -6.0]))
        assert np.all(run.theta_hat[:, 1] == 0.0)
        assert abs(run.theta_hat[-1, 1] - 1.0) == pytest.approx(1.0)


class TestDiscreteBaseline:
    def test_zero_regressor_freezes_estimate(self, params):
        run = dt_gradient_run(lambda j: np.zeros((2, 2)),
                              lambda j: np.array([1.0, 1.0]), params, 10,
                              theta_hat0=np.array([0.3, 0.4]))
        np.testing.assert_array_equal(run.theta_hat[-1], [0.3, 0.4])

    def test_scalar_convergence_brute_force(self):
        params = EstimatorParams(1.0, 1.0, 1.0, 0.5)
        run = dt_gradient_run(lambda j: np.ones((1, 1)),
                              lambda j: np.array([1.0]), params, 60,
                              theta_hat0=np.zeros(1), psi0=np.zeros((1, 1)),
                              eta0=np.array([-1.0]))
        # independent brute-force iteration of the recursion
        th, psi, eta = 0.0, 0.0, -1.0
        for j in range(60):
            psi_n = 0.5 * psi + 1.0
            eta_n = 0.5 * (1.0 + eta)
            y_n = 1.0 + eta_n
            th = th + psi_n * (y_n - psi_n * th) / (1.0 + psi_n ** 2)
            psi, eta = psi_n, eta_n
        assert run.theta_hat[-1, 0] == pytest.approx(th, abs=1e-14)
        assert run.theta_hat[-1, 0] == pytest.approx(1.0, abs=1e-6)

    def test_singular_regressor_stalls(self, params):
        run = dt_gradient_run(phibar_d, xbar_d, params, 20,
                              theta_hat0=np.zeros(2), psi0=np.zeros((2, 2)),
                              eta0=np.array([-3.0, -6.0]))
        final_err = np.linalg.norm(run.theta_hat[-1] - np.ones(2))
        assert final_err > 0.1


class TestErrorClass:
    def test_flow_step(self):
        out = error_class_step_flow(np.array([1.0, 0.0]), np.eye(2), np.zeros(2))
        np.testing.assert_array_equal(out, [-1.0, 0.0])

    def test_jump_step(self):
        out = error_class_step_jump(np.array([2.0, 2.0]), 0.5 * np.eye(2),
                                    np.zeros(2))
        np.testing.assert_array_equal(out, [1.0, 1.0])

    def test_asymmetric_a_rejected(self):
        with pytest.raises(AssumptionViolationError):
            error_class_step_flow(np.zeros(2),
                                  np.array([[1.0, 0.5], [0.0, 1.0]]),
                                  np.zeros(2))

    def test_indefinite_a_rejected(self):
        with pytest.raises(AssumptionViolationError):
            error_class_step_flow(np.zeros(2), -np.eye(2), np.zeros(2))

    def test_expansive_b_rejected(self):
        with pytest.raises(AssumptionViolationError):
            error_class_step_jump(np.zeros(2), 1.5 * np.eye(2), np.zeros(2))

    def test_run_on_constant_signals(self):
        dom = HybridTimeDomain((0.0, 1.0, 2.0))
        arc = run_error_class(
            lambda t, j: np.eye(2), lambda t, j: 0.5 * np.eye(2),
            lambda t, j: np.zeros(2), lambda t, j: np.zeros(2),
            dom, np.array([1.0, 1.0]), 0.01)
        # flow decays by e^-1 per interval, jump halves
        expect = math.exp(-2.0) * 0.5
        np.testing.assert_allclose(arc.final_value(),
                                   [expect, expect], rtol=1e-8)


class TestFastPathsMatchGenericOnes:
    def test_fast_system_matches_generic(self, params):
        cfg = MotivationalConfig(t_end=2 * TWO_PI + 1.0)
        ec = ExecConfig(h=cfg.h, t_end=cfg.t_end, jump_location_tol=1e-12)
        vec0 = initial_state(cfg, cfg.eta0_case2)
        a = simulate(fast_system(cfg), vec0, ec)
        b = simulate(make_estimator_system(build_plant(cfg), params), vec0, ec)
        assert a.domain.jump_times == pytest.approx(b.domain.jump_times,
                                                    abs=1e-12)
        for v1, v2 in zip(a.values, b.values):
            np.testing.assert_allclose(v1, v2, atol=1e-12)

    def test_fast_ct_matches_generic(self, params):
        cfg = MotivationalConfig(t_end=5.0)
        ts, ths = fast_ct_baseline(cfg)
        gen = ct_gradient_run(phibar_c, xbar_c, cfg.params, 5.0, cfg.h,
                              theta_hat0=np.zeros(2), psi0=np.zeros((2, 2)),
                              eta0=np.array([-3.0, -6.0]))
        np.testing.assert_allclose(ths, gen.theta_hat, atol=1e-13)
        np.testing.assert_allclose(ts, gen.t, atol=1e-12)
