"""Gradient parameter estimators for plants with flows and jumps.

Implements the continuous-time and discrete-time baseline gradient
estimators, the hybrid estimator that updates the parameter estimate both
during flows and at jumps, its noise-injected variant, and the generic
error-coordinate class (flow: -A(t,j) theta + d_c, jump: (I-B) theta + d_d)
used as an equivalence oracle.

The estimator update laws consume only measured plant states and the known
regressors; the hidden parameter vector lives in :class:`PlantModel` and is
touched exclusively by the plant dynamics (and by test oracles).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .hybrid_exec import HybridSystemDef
from .hybrid_time import HybridArc, HybridTimeDomain
from .linalg import check_symmetric_psd, lambda_max_sym, spectral_norm


class AssumptionViolationError(ValueError):
    """A structural precondition on the error-class data (A, B) failed."""


@dataclass
class EstimatorParams:
    """Gains of the gradient estimator.

    ``gamma_c`` and ``lambda_c`` drive the flow update and filters (1/s);
    ``gamma_d`` regularizes the jump update and ``lambda_d`` is the jump
    filter rate, constrained to (0, 2).
    """

    gamma_c: float
    lambda_c: float
    gamma_d: float
    lambda_d: float

    def __post_init__(self):
        if self.gamma_c <= 0 or self.lambda_c <= 0 or self.gamma_d <= 0:
            raise ValueError("gamma_c, lambda_c, gamma_d must be positive")
        if not (0.0 < self.lambda_d < 2.0):
            raise ValueError("lambda_d must lie strictly in (0, 2)")


@dataclass
class PlantModel:
    """A plant affine in the unknown parameter, with flow and jump dynamics.

    ``f_c(x, u)`` and ``g_d(x, u)`` are the known drift terms, ``phi_c`` and
    ``phi_d`` the known (t, j)-indexed n-by-p regressors, and ``u`` the known
    input signal.  ``theta_true`` is hidden from the estimator: only the
    simulated plant dynamics and test oracles may read it.
    """

    n: int
    p: int
    theta_true: np.ndarray
    f_c: Callable
    g_d: Callable
    phi_c: Callable
    phi_d: Callable
    u: Callable
    flow_pred: Callable = field(default=lambda x, u: True)
    jump_pred: Callable = field(default=lambda x, u: False)

    def __post_init__(self):
        self.theta_true = np.asarray(self.theta_true, dtype=float).reshape(self.p)


@dataclass
class NoiseModel:
    """Additive measurement noise on the plant state, defined on the domain.

    ``nu(t, j)`` must be evaluable at every sample and at post-jump points
    (t, j+1).
    """

    nu: Callable


@dataclass
class EstimatorState:
    """Full state (x, theta_hat, psi, eta, tau, k) of the hybrid estimator."""

    x: np.ndarray
    theta_hat: np.ndarray
    psi: np.ndarray
    eta: np.ndarray
    tau: float
    k: int


class StateLayout:
    """Packing of the estimator state into a flat vector for the executor.

    Order: x (n), theta_hat (p), psi (n*p, row-major), eta (n), tau, k.
    """

    def __init__(self, n: int, p: int):
        self.n, self.p = n, p
        self.ix = slice(0, n)
        self.ith = slice(n, n + p)
        self.ipsi = slice(n + p, n + p + n * p)
        self.ieta = slice(n + p + n * p, 2 * n + p + n * p)
        self.itau = 2 * n + p + n * p
        self.ik = self.itau + 1
        self.dim = self.ik + 1

    def pack(self, s: EstimatorState) -> np.ndarray:
        out = np.empty(self.dim)
        out[self.ix] = s.x
        out[self.ith] = s.theta_hat
        out[self.ipsi] = np.asarray(s.psi, dtype=float).reshape(-1)
        out[self.ieta] = s.eta
        out[self.itau] = s.tau
        out[self.ik] = s.k
        return out

    def unpack(self, vec: np.ndarray) -> EstimatorState:
        return EstimatorState(
            x=np.array(vec[self.ix]),
            theta_hat=np.array(vec[self.ith]),
            psi=np.array(vec[self.ipsi]).reshape(self.n, self.p),
            eta=np.array(vec[self.ieta]),
            tau=float(vec[self.itau]),
            k=int(round(vec[self.ik])),
        )


def epsilon(state: EstimatorState, theta: np.ndarray) -> np.ndarray:
    """Filter error x + eta - psi @ theta of the estimator state."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (state.psi.shape[1],):
        raise ValueError("theta dimension does not match psi")
    return state.x + state.eta - state.psi @ theta


# -- core update laws (no access to theta_true) ---------------------------


def estimator_flow(x_meas, eta, psi, theta_hat, u, phi_c_val, f_c, params):
    """Flow rates (theta_hat_dot, psi_dot, eta_dot) from measured data only."""
    y = x_meas + eta
    resid = y - psi @ theta_hat
    th_dot = params.gamma_c * (psi.T @ resid)
    psi_dot = -params.lambda_c * psi + phi_c_val
    eta_dot = -params.lambda_c * y - f_c(x_meas, u)
    return th_dot, psi_dot, eta_dot


def estimator_jump(x_meas, x_plus_meas, eta, psi, theta_hat, u, phi_d_val,
                   g_d, params):
    """Jump updates (theta_hat_plus, psi_plus, eta_plus) from measured data only.

    ``x_plus_meas`` is the measured post-jump plant state; the estimate
    update is the regularized projection onto the new regression pair.
    """
    psi_plus = (1.0 - params.lambda_d) * psi + phi_d_val
    eta_plus = (1.0 - params.lambda_d) * (x_meas + eta) - g_d(x_meas, u)
    y_plus = x_plus_meas + eta_plus
    denom = params.gamma_d + spectral_norm(psi_plus) ** 2
    th_plus = theta_hat + (psi_plus.T @ (y_plus - psi_plus @ theta_hat)) / denom
    return th_plus, psi_plus, eta_plus


# -- state-level maps ------------------------------------------------------


def hg_flow(state: EstimatorState, plant: PlantModel,
            params: EstimatorParams) -> EstimatorState:
    """Flow map of the hybrid estimator; returns the state derivative."""
    return hnu_flow(state, plant, params, noise=None)


def hg_jump(state: EstimatorState, plant: PlantModel,
            params: EstimatorParams) -> EstimatorState:
    """Jump map of the hybrid estimator; returns the post-jump state."""
    return hnu_jump(state, plant, params, noise=None)


def hnu_flow(state: EstimatorState, plant: PlantModel, params: EstimatorParams,
             noise: Optional[NoiseModel]) -> EstimatorState:
    """Flow map with additive measurement noise (``noise=None`` disables it)."""
    u = plant.u(state.tau, state.k)
    phi_c_val = plant.phi_c(state.tau, state.k)
    x_meas = state.x if noise is None else state.x + noise.nu(state.tau, state.k)
    th_dot, psi_dot, eta_dot = estimator_flow(
        x_meas, state.eta, state.psi, state.theta_hat, u, phi_c_val,
        plant.f_c, params,
    )
    x_dot = plant.f_c(state.x, u) + phi_c_val @ plant.theta_true
    return EstimatorState(x=x_dot, theta_hat=th_dot, psi=psi_dot, eta=eta_dot,
                          tau=1.0, k=0)


def hnu_jump(state: EstimatorState, plant: PlantModel, params: EstimatorParams,
             noise: Optional[NoiseModel]) -> EstimatorState:
    """Jump map with additive measurement noise (``noise=None`` disables it)."""
    u = plant.u(state.tau, state.k)
    phi_d_val = plant.phi_d(state.tau, state.k)
    x_plus = plant.g_d(state.x, u) + phi_d_val @ plant.theta_true
    if noise is None:
        x_meas, x_plus_meas = state.x, x_plus
    else:
        x_meas = state.x + noise.nu(state.tau, state.k)
        x_plus_meas = x_plus + noise.nu(state.tau, state.k + 1)
    th_plus, psi_plus, eta_plus = estimator_jump(
        x_meas, x_plus_meas, state.eta, state.psi, state.theta_hat, u,
        phi_d_val, plant.g_d, params,
    )
    return EstimatorState(x=x_plus, theta_hat=th_plus, psi=psi_plus,
                          eta=eta_plus, tau=state.tau, k=state.k + 1)


# -- executor wiring -------------------------------------------------------


def make_estimator_system(plant: PlantModel, params: EstimatorParams,
                          noise: Optional[NoiseModel] = None) -> HybridSystemDef:
    """Stacked plant-plus-estimator hybrid system over a flat state vector.

    The jump map applies the plant jump first and then the estimator update
    using the measured post-jump plant state.  Flow and jump predicates are
    the plant's, evaluated at (x, u(tau, k)).
    """
    lay = StateLayout(plant.n, plant.p)
    n, p = plant.n, plant.p

    def flow_map(vec, t, j):
        x = vec[lay.ix]
        th = vec[lay.ith]
        psi = vec[lay.ipsi].reshape(n, p)
        eta = vec[lay.ieta]
        tau = vec[lay.itau]
        k = vec[lay.ik]
        u = plant.u(tau, k)
        phi_c_val = plant.phi_c(tau, k)
        x_meas = x if noise is None else x + noise.nu(tau, k)
        th_dot, psi_dot, eta_dot = estimator_flow(
            x_meas, eta, psi, th, u, phi_c_val, plant.f_c, params)
        out = np.empty(lay.dim)
        out[lay.ix] = plant.f_c(x, u) + phi_c_val @ plant.theta_true
        out[lay.ith] = th_dot
        out[lay.ipsi] = psi_dot.reshape(-1)
        out[lay.ieta] = eta_dot
        out[lay.itau] = 1.0
        out[lay.ik] = 0.0
        return out

    def jump_map(vec, t, j):
        s = lay.unpack(vec)
        return lay.pack(hnu_jump(s, plant, params, noise))

    def flow_predicate(vec, t, j):
        tau, k = vec[lay.itau], vec[lay.ik]
        return plant.flow_pred(vec[lay.ix], plant.u(tau, k))

    def jump_predicate(vec, t, j):
        tau, k = vec[lay.itau], vec[lay.ik]
        return plant.jump_pred(vec[lay.ix], plant.u(tau, k))

    return HybridSystemDef(flow_map, jump_map, flow_predicate, jump_predicate,
                           lay.dim)


def make_psi_filter_system(plant: PlantModel,
                           params: EstimatorParams) -> HybridSystemDef:
    """Standalone regressor filter: psi' = -lambda_c psi + phi_c, reset
    psi+ = (1 - lambda_d) psi + phi_d.  State is psi flattened row-major.

    The filter depends only on the regressors and the lambda gains, which
    makes it the natural signal to certify excitation on.
    """
    n, p = plant.n, plant.p

    def flow_map(vec, t, j):
        psi = vec.reshape(n, p)
        return (-params.lambda_c * psi + plant.phi_c(t, j)).reshape(-1)

    def jump_map(vec, t, j):
        psi = vec.reshape(n, p)
        return ((1.0 - params.lambda_d) * psi + plant.phi_d(t, j)).reshape(-1)

    return HybridSystemDef(flow_map, jump_map,
                           lambda vec, t, j: True, lambda vec, t, j: False,
                           n * p)


# -- classical baselines ---------------------------------------------------


@dataclass
class GradientRun:
    """Trajectory of a baseline gradient estimator."""

    t: np.ndarray
    theta_hat: np.ndarray
    psi: np.ndarray
    eta: np.ndarray


def ct_gradient_run(phi_c: Callable, x_meas: Callable, params: EstimatorParams,
                    t_end: float, h: float, theta_hat0=None, psi0=None,
                    eta0=None, f_c: Optional[Callable] = None,
                    u: Optional[Callable] = None) -> GradientRun:
    """Continuous-time gradient estimator on purely continuous signals.

    ``phi_c(t)`` is the n-by-p regressor and ``x_meas(t)`` the measured
    state.  Integrates the filters and the update law with fixed-step RK4
    and returns the sampled trajectory.
    """
    phi0 = np.asarray(phi_c(0.0), dtype=float)
    n, p = phi0.shape
    f_c = f_c if f_c is not None else (lambda x, u: np.zeros(n))
    u = u if u is not None else (lambda t: None)
    th = np.zeros(p) if theta_hat0 is None else np.asarray(theta_hat0, float).copy()
    psi = np.zeros((n, p)) if psi0 is None else np.asarray(psi0, float).copy()
    eta = (-np.asarray(x_meas(0.0), float) if eta0 is None
           else np.asarray(eta0, float).copy())

    def rates(th, psi, eta, t):
        x = np.asarray(x_meas(t), dtype=float)
        y = x + eta
        resid = y - psi @ th
        return (params.gamma_c * (psi.T @ resid),
                -params.lambda_c * psi + np.asarray(phi_c(t), float),
                -params.lambda_c * y - f_c(x, u(t)))

    steps = int(np.ceil(t_end / h - 1e-12))
    ts = [0.0]
    ths = [th.copy()]
    psis = [psi.copy()]
    etas = [eta.copy()]
    t = 0.0
    for _ in range(steps):
        dt = min(h, t_end - t)
        k1 = rates(th, psi, eta, t)
        k2 = rates(th + 0.5 * dt * k1[0], psi + 0.5 * dt * k1[1],
                   eta + 0.5 * dt * k1[2], t + 0.5 * dt)
        k3 = rates(th + 0.5 * dt * k2[0], psi + 0.5 * dt * k2[1],
                   eta + 0.5 * dt * k2[2], t + 0.5 * dt)
        k4 = rates(th + dt * k3[0], psi + dt * k3[1], eta + dt * k3[2], t + dt)
        th = th + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        psi = psi + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        eta = eta + (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        t = min(t + dt, t_end)
        ts.append(t)
        ths.append(th.copy())
        psis.append(psi.copy())
        etas.append(eta.copy())
    return GradientRun(np.array(ts), np.stack(ths), np.stack(psis), np.stack(etas))


def dt_gradient_run(phi_d: Callable, x_meas: Callable, params: EstimatorParams,
                    j_end: int, theta_hat0=None, psi0=None, eta0=None,
                    g_d: Optional[Callable] = None,
                    u: Optional[Callable] = None) -> GradientRun:
    """Discrete-time gradient estimator on purely discrete signals.

    ``phi_d(j)`` is the n-by-p regressor and ``x_meas(j)`` the measured
    state sequence.  Both computational steps of the recursion (filter
    propagation, then the estimate correction) are performed at each j.
    """
    phi0 = np.asarray(phi_d(0), dtype=float)
    n, p = phi0.shape
    g_d = g_d if g_d is not None else (lambda x, u: np.zeros(n))
    u = u if u is not None else (lambda j: None)
    th = np.zeros(p) if theta_hat0 is None else np.asarray(theta_hat0, float).copy()
    psi = np.zeros((n, p)) if psi0 is None else np.asarray(psi0, float).copy()
    eta = (-np.asarray(x_meas(0), float) if eta0 is None
           else np.asarray(eta0, float).copy())

    js = [0]
    ths = [th.copy()]
    psis = [psi.copy()]
    etas = [eta.copy()]
    for j in range(j_end):
        x_j = np.asarray(x_meas(j), dtype=float)
        x_next = np.asarray(x_meas(j + 1), dtype=float)
        th, psi, eta = estimator_jump(
            x_j, x_next, eta, psi, th, u(j), np.asarray(phi_d(j), float),
            g_d, params,
        )
        js.append(j + 1)
        ths.append(th.copy())
        psis.append(psi.copy())
        etas.append(eta.copy())
    return GradientRun(np.array(js, dtype=float), np.stack(ths), np.stack(psis),
                       np.stack(etas))


# -- generic error-coordinate class ----------------------------------------


def error_class_step_flow(vartheta: np.ndarray, a: np.ndarray,
                          d_c: np.ndarray) -> np.ndarray:
    """Flow rate -A vartheta + d_c of the generic error class.

    ``a`` must be symmetric positive semidefinite; violations raise
    :class:`AssumptionViolationError`.
    """
    try:
        check_symmetric_psd(a, "A")
    except ValueError as exc:
        raise AssumptionViolationError(str(exc)) from exc
    return -(a @ vartheta) + d_c


def error_class_step_jump(vartheta: np.ndarray, b: np.ndarray,
                          d_d: np.ndarray) -> np.ndarray:
    """Jump update vartheta - B vartheta + d_d of the generic error class.

    ``b`` must be symmetric positive semidefinite with induced norm
    strictly below 1.
    """
    try:
        check_symmetric_psd(b, "B")
    except ValueError as exc:
        raise AssumptionViolationError(str(exc)) from exc
    if lambda_max_sym(b) >= 1.0:
        raise AssumptionViolationError("B has induced norm >= 1")
    return vartheta - b @ vartheta + d_d


def run_error_class(a_fn: Callable, b_fn: Callable, dc_fn: Callable,
                    dd_fn: Callable, domain: HybridTimeDomain, vartheta0,
                    h: float) -> HybridArc:
    """Integrate the generic error class along a known hybrid time domain.

    ``a_fn``/``dc_fn`` are evaluated at flow times (t, j); ``b_fn``/``dd_fn``
    at pre-jump instants (t_{j+1}, j), consistent with the jump data being
    indexed by the jump they precede.
    """
    from .hybrid_exec import HybridSystemDef, simulate_on_domain

    def flow_map(vec, t, j):
        return error_class_step_flow(vec, a_fn(t, j), dc_fn(t, j))

    def jump_map(vec, t, j):
        return error_class_step_jump(vec, b_fn(t, j), dd_fn(t, j))

    sys = HybridSystemDef(flow_map, jump_map,
                          lambda vec, t, j: True, lambda vec, t, j: False,
                          np.asarray(vartheta0).size)
    return simulate_on_domain(sys, np.asarray(vartheta0, dtype=float), domain, h)


def noise_disturbance_arcs(arc: HybridArc, plant: PlantModel,
                           params: EstimatorParams, noise: NoiseModel):
    """Disturbance arcs (d, d_eps) recorded along a noisy estimator run.

    At flow samples, d is the update-law perturbation
    -gamma_c psi^T (eps + nu) and d_eps the filter-error forcing
    -lambda_c nu + f_c(x, u) - f_c(x + nu, u).  At pre-jump samples both
    switch to their jump counterparts, which read the post-jump filter
    values and the pre-jump plant state respectively.  Analysis helper:
    reads ``theta_true`` to reconstruct the filter error.
    """
    lay = StateLayout(plant.n, plant.p)
    t, j, v = arc.ordered()
    x = v[:, lay.ix]
    eta = v[:, lay.ieta]
    psi = v[:, lay.ipsi].reshape(-1, plant.n, plant.p)
    eps = x + eta - psi @ plant.theta_true
    nu_vals = np.stack([noise.nu(tt, jj) for tt, jj in zip(t, j)])

    d = -params.gamma_c * np.einsum("kij,ki->kj", psi, eps + nu_vals)
    d_eps = np.empty_like(d)
    for idx in range(len(t)):
        u = plant.u(t[idx], j[idx])
        d_eps[idx] = (-params.lambda_c * nu_vals[idx]
                      + plant.f_c(x[idx], u)
                      - plant.f_c(x[idx] + nu_vals[idx], u))

    offsets = np.cumsum([len(ts) for ts in arc.times])
    for m in range(arc.domain.num_jumps):
        pre = offsets[m] - 1   # sample (t_{m+1}, m)
        post = offsets[m]      # sample (t_{m+1}, m+1)
        psi_p = psi[post]
        nu_post = noise.nu(t[post], j[post])
        denom = params.gamma_d + spectral_norm(psi_p) ** 2
        d[pre] = -(psi_p.T @ (eps[post] + nu_post)) / denom
        u = plant.u(t[pre], j[pre])
        d_eps[pre] = ((1.0 - params.lambda_d) * nu_vals[pre]
                      + plant.g_d(x[pre], u)
                      - plant.g_d(x[pre] + nu_vals[pre], u))

    d_arc = arc.map_stacked(lambda _: d)
    d_eps_arc = arc.map_stacked(lambda _: d_eps)
    return d_arc, d_eps_arc


def make_error_oracle_system(plant: PlantModel, params: EstimatorParams) -> HybridSystemDef:
    """Plant + estimator + co-integrated generic error state, for oracle tests.

    The flat state is the estimator layout extended by p trailing entries
    holding the generic error variable.  At every flow stage and jump, the
    error-class data (A, B, d_c, d_d) are evaluated from the simultaneously
    integrated filter signals, so the generic trajectory and the estimation
    error see identical inputs.  Test machinery: reads ``theta_true``.
    """
    base = make_estimator_system(plant, params)
    lay = StateLayout(plant.n, plant.p)
    n, p = plant.n, plant.p
    theta = plant.theta_true

    def flow_map(vec, t, j):
        core = vec[: lay.dim]
        vth = vec[lay.dim:]
        psi = core[lay.ipsi].reshape(n, p)
        eps = core[lay.ix] + core[lay.ieta] - psi @ theta
        a = params.gamma_c * (psi.T @ psi)
        d_c = -params.gamma_c * (psi.T @ eps)
        out = np.empty(lay.dim + p)
        out[: lay.dim] = base.flow_map(core, t, j)
        out[lay.dim:] = error_class_step_flow(vth, a, d_c)
        return out

    def jump_map(vec, t, j):
        core_plus = base.jump_map(vec[: lay.dim], t, j)
        psi_plus = core_plus[lay.ipsi].reshape(n, p)
        eps_plus = core_plus[lay.ix] + core_plus[lay.ieta] - psi_plus @ theta
        denom = params.gamma_d + spectral_norm(psi_plus) ** 2
        b = (psi_plus.T @ psi_plus) / denom
        d_d = -(psi_plus.T @ eps_plus) / denom
        out = np.empty(lay.dim + p)
        out[: lay.dim] = core_plus
        out[lay.dim:] = error_class_step_jump(vec[lay.dim:], b, d_d)
        return out

    def flow_predicate(vec, t, j):
        return base.flow_predicate(vec[: lay.dim], t, j)

    def jump_predicate(vec, t, j):
        return base.jump_predicate(vec[: lay.dim], t, j)

    return HybridSystemDef(flow_map, jump_map, flow_predicate, jump_predicate,
                           lay.dim + p)
