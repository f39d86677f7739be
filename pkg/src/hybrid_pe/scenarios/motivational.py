"""Two-parameter toy plant whose regressors excite neither classical
estimator: the flow regressor drives only one parameter direction and the
jump regressor is singular, yet the combination is uniformly exciting.

The plant state flows as x' = phi_c(t) theta between resets to
phi_d theta, with resets driven by a sawtooth input crossing 2*pi.  The
scenario runs the hybrid estimator from two initial conditions (with and
without initial filter error), the flattened continuous- and discrete-time
baselines, an optional noise-injected variant, and produces excitation
certificates, the constant ledger, and envelope checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..bounds import BoundInputs, check_envelope, lemma1_b, theorem1_constants
from ..estimators import (EstimatorParams, NoiseModel, PlantModel, StateLayout,
                          dt_gradient_run, make_psi_filter_system,
                          noise_disturbance_arcs)
from ..hybrid_exec import ExecConfig, HybridSystemDef, simulate, simulate_on_domain
from ..hybrid_time import HybridArc, HybridTimeDomain
from ..pe_analysis import certify_hybrid_pe
from .report import RunReport

TWO_PI = 2.0 * math.pi


@dataclass
class MotivationalConfig:
    """Parameters of the sawtooth-reset case study (defaults as published)."""

    theta: tuple = (1.0, 1.0)
    x0: tuple = (3.0, 6.0)
    phi_d: tuple = ((1.0, 2.0), (2.0, 4.0))
    gamma_c: float = 1.0
    lambda_c: float = 0.1
    gamma_d: float = 1.0
    lambda_d: float = 0.5
    theta_hat0: tuple = (0.0, 0.0)
    eta0_case1: tuple | None = None     # None -> -x0, which zeroes the filter error
    eta0_case2: tuple = (-1.5, -3.0)
    t_end: float = 40.0 * math.pi
    h: float = 1e-3
    jump_location_tol: float = 1e-12
    delta: float = TWO_PI + 1.0
    pe_cycle_tail: float = 1.0          # length of the tail after the first jump
    phi_M: float = 5.0
    q_m: float = 1.0
    q_M: float = 1.0
    zeta: float = 0.5
    noise_amplitude: float = 1.0
    noise_frequency: float = 2.0

    def __post_init__(self):
        if self.eta0_case1 is None:
            self.eta0_case1 = tuple(-v for v in self.x0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, overrides: dict) -> "MotivationalConfig":
        known = {f: v for f, v in overrides.items() if f in cls.__dataclass_fields__}
        unknown = set(overrides) - set(known)
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**known)

    @property
    def params(self) -> EstimatorParams:
        return EstimatorParams(self.gamma_c, self.lambda_c, self.gamma_d,
                               self.lambda_d)


def build_plant(cfg: MotivationalConfig) -> PlantModel:
    """Generic plant model (used by oracle runs and consistency tests)."""
    phi_d = np.asarray(cfg.phi_d, dtype=float)
    return PlantModel(
        n=2, p=2, theta_true=np.asarray(cfg.theta, dtype=float),
        f_c=lambda x, u: np.zeros(2),
        g_d=lambda x, u: np.zeros(2),
        phi_c=lambda t, j: np.array([[math.sin(t), 0.0], [0.0, 0.0]]),
        phi_d=lambda t, j: phi_d,
        u=lambda t, j: t - TWO_PI * j,
        flow_pred=lambda x, u: u <= TWO_PI,
        jump_pred=lambda x, u: u >= TWO_PI,
    )


def build_noise(cfg: MotivationalConfig) -> NoiseModel:
    amp, freq = cfg.noise_amplitude, cfg.noise_frequency
    return NoiseModel(nu=lambda t, j: amp * math.sin(freq * t) * np.ones(2))


def fast_system(cfg: MotivationalConfig, noisy: bool = False) -> HybridSystemDef:
    """Hand-inlined scalar flow/jump maps of the stacked plant + estimator.

    Equivalent to ``make_estimator_system(build_plant(cfg), ...)`` (a test
    pins the two against each other); roughly twice as fast, which keeps
    the scenario inside its runtime budget.
    """
    th1, th2 = (float(v) for v in cfg.theta)
    (f11, f12), (f21, f22) = ((float(a), float(b)) for a, b in cfg.phi_d)
    gc, lc, gd, ld = cfg.gamma_c, cfg.lambda_c, cfg.gamma_d, cfg.lambda_d
    amp, freq = cfg.noise_amplitude, cfg.noise_frequency
    xp1 = f11 * th1 + f12 * th2
    xp2 = f21 * th1 + f22 * th2

    def flow_map(vec, t, j):
        x1, x2, h1, h2, p11, p12, p21, p22, e1, e2, tau, k = vec
        s = math.sin(tau)
        nu = amp * math.sin(freq * tau) if noisy else 0.0
        y1 = x1 + nu + e1
        y2 = x2 + nu + e2
        r1 = y1 - (p11 * h1 + p12 * h2)
        r2 = y2 - (p21 * h1 + p22 * h2)
        out = np.empty(12)
        out[0] = s * th1
        out[1] = 0.0
        out[2] = gc * (p11 * r1 + p21 * r2)
        out[3] = gc * (p12 * r1 + p22 * r2)
        out[4] = -lc * p11 + s
        out[5] = -lc * p12
        out[6] = -lc * p21
        out[7] = -lc * p22
        out[8] = -lc * y1
        out[9] = -lc * y2
        out[10] = 1.0
        out[11] = 0.0
        return out

    def jump_map(vec, t, j):
        x1, x2, h1, h2, p11, p12, p21, p22, e1, e2, tau, k = vec
        nu = amp * math.sin(freq * tau) if noisy else 0.0
        q11 = (1 - ld) * p11 + f11
        q12 = (1 - ld) * p12 + f12
        q21 = (1 - ld) * p21 + f21
        q22 = (1 - ld) * p22 + f22
        ep1 = (1 - ld) * (x1 + nu + e1)
        ep2 = (1 - ld) * (x2 + nu + e2)
        yp1 = xp1 + nu + ep1   # the noise signal has no j dependence
        yp2 = xp2 + nu + ep2
        a = q11 * q11 + q21 * q21
        b = q11 * q12 + q21 * q22
        c = q12 * q12 + q22 * q22
        den = gd + 0.5 * (a + c) + math.hypot(0.5 * (a - c), b)
        w1 = yp1 - (q11 * h1 + q12 * h2)
        w2 = yp2 - (q21 * h1 + q22 * h2)
        out = np.empty(12)
        out[0] = xp1
        out[1] = xp2
        out[2] = h1 + (q11 * w1 + q21 * w2) / den
        out[3] = h2 + (q12 * w1 + q22 * w2) / den
        out[4] = q11
        out[5] = q12
        out[6] = q21
        out[7] = q22
        out[8] = ep1
        out[9] = ep2
        out[10] = tau
        out[11] = k + 1
        return out

    return HybridSystemDef(
        flow_map, jump_map,
        lambda v, t, j: v[10] - TWO_PI * v[11] <= TWO_PI,
        lambda v, t, j: v[10] - TWO_PI * v[11] >= TWO_PI,
        12,
    )


def initial_state(cfg: MotivationalConfig, eta0) -> np.ndarray:
    lay = StateLayout(2, 2)
    vec = np.zeros(lay.dim)
    vec[lay.ix] = cfg.x0
    vec[lay.ith] = cfg.theta_hat0
    vec[lay.ieta] = eta0
    return vec


# -- flattened baseline signals ---------------------------------------------


def xbar_c(t: float) -> np.ndarray:
    """Flow-only state obtained by ignoring the resets."""
    return np.array([4.0 - math.cos(t), 6.0])


def phibar_c(t: float) -> np.ndarray:
    return np.array([[math.sin(t), 0.0], [0.0, 0.0]])


def xbar_d(j: int) -> np.ndarray:
    """Jump-only state obtained by ignoring the flow."""
    return np.array([3.0, 6.0])


def phibar_d(j: int) -> np.ndarray:
    return np.array([[1.0, 2.0], [2.0, 4.0]])


def fast_ct_baseline(cfg: MotivationalConfig):
    """Hand-inlined continuous-time gradient baseline on the flattened signals.

    Matches ``ct_gradient_run(phibar_c, xbar_c, ...)`` sample for sample (a
    test pins the two against each other) at a fraction of the cost.
    """
    gc, lc = cfg.gamma_c, cfg.lambda_c
    th1, th2 = (float(v) for v in cfg.theta_hat0)
    p11 = p12 = p21 = p22 = 0.0
    e1, e2 = (float(v) for v in cfg.eta0_case1)
    h, t_end = cfg.h, cfg.t_end

    def rates(th1, th2, p11, p12, p21, p22, e1, e2, t):
        s = math.sin(t)
        x1 = 4.0 - math.cos(t)
        y1 = x1 + e1
        y2 = 6.0 + e2
        r1 = y1 - (p11 * th1 + p12 * th2)
        r2 = y2 - (p21 * th1 + p22 * th2)
        return (gc * (p11 * r1 + p21 * r2), gc * (p12 * r1 + p22 * r2),
                -lc * p11 + s, -lc * p12, -lc * p21, -lc * p22,
                -lc * y1, -lc * y2)

    steps = int(math.ceil(t_end / h - 1e-12))
    ts = np.empty(steps + 1)
    ths = np.empty((steps + 1, 2))
    ts[0] = 0.0
    ths[0] = (th1, th2)
    state = (th1, th2, p11, p12, p21, p22, e1, e2)
    t = 0.0
    for i in range(steps):
        dt = min(h, t_end - t)
        k1 = rates(*state, t)
        s2 = tuple(v + 0.5 * dt * k for v, k in zip(state, k1))
        k2 = rates(*s2, t + 0.5 * dt)
        s3 = tuple(v + 0.5 * dt * k for v, k in zip(state, k2))
        k3 = rates(*s3, t + 0.5 * dt)
        s4 = tuple(v + dt * k for v, k in zip(state, k3))
        k4 = rates(*s4, t + dt)
        state = tuple(
            v + (dt / 6.0) * (a + 2 * b + 2 * c + d)
            for v, a, b, c, d in zip(state, k1, k2, k3, k4)
        )
        t = min(t + dt, t_end)
        ts[i + 1] = t
        ths[i + 1] = state[:2]
    return ts, ths


# -- scenario ----------------------------------------------------------------


def _component_series(arc: HybridArc, theta: np.ndarray, lay: StateLayout):
    """theta-error, filter-error-norm, and set-distance scalar arcs."""
    def stack_fn(v):
        th_err = np.linalg.norm(v[:, lay.ith] - theta, axis=1)
        return th_err

    theta_err = arc.map_stacked(stack_fn)

    def eps_fn(v):
        psi = v[:, lay.ipsi].reshape(-1, lay.n, lay.p)
        eps = v[:, lay.ix] + v[:, lay.ieta] - psi @ theta
        return np.linalg.norm(eps, axis=1)

    eps_norm = arc.map_stacked(eps_fn)

    dist = arc.map_stacked(
        lambda v: np.sqrt(
            np.linalg.norm(v[:, lay.ith] - theta, axis=1) ** 2
            + eps_fn(v) ** 2
        )
    )
    return theta_err, eps_norm, dist


def pe_filter_arc(cfg: MotivationalConfig, domain: HybridTimeDomain) -> HybridArc:
    """Gain-independent filter run (psi only) on the given domain."""
    plant = build_plant(cfg)
    sysd = make_psi_filter_system(plant, cfg.params)
    arc = simulate_on_domain(sysd, np.zeros(4), domain, cfg.h)
    return arc.map_stacked(lambda v: v.reshape(-1, 2, 2))


def first_cycle_domain(cfg: MotivationalConfig) -> HybridTimeDomain:
    """One excitation cycle: the first flow interval, its jump, and a tail."""
    return HybridTimeDomain((0.0, TWO_PI, TWO_PI + cfg.pe_cycle_tail))


def run_motivational(cfg: MotivationalConfig | None = None,
                     with_baselines: bool = True,
                     with_noise: bool = False) -> RunReport:
    """Run the case study end to end and assemble the report."""
    cfg = cfg or MotivationalConfig()
    theta = np.asarray(cfg.theta, dtype=float)
    lay = StateLayout(2, 2)
    report = RunReport(name="motivational", config=cfg.to_dict())
    exec_cfg = ExecConfig(h=cfg.h, t_end=cfg.t_end,
                          jump_location_tol=cfg.jump_location_tol)

    # hybrid estimator from both initial conditions
    for label, eta0 in (("case1", cfg.eta0_case1), ("case2", cfg.eta0_case2)):
        t0 = time.perf_counter()
        arc = simulate(fast_system(cfg), initial_state(cfg, eta0), exec_cfg)
        report.timings[f"hybrid_{label}"] = time.perf_counter() - t0
        report.state_arcs[f"hybrid_{label}"] = arc
        theta_err, eps_norm, dist = _component_series(arc, theta, lay)
        suffix = "" if label == "case1" else "_case2"
        report.csv_arcs[f"arc_theta_err_hybrid{suffix}"] = theta_err
        report.csv_arcs[f"arc_dist_hybrid{suffix}"] = dist
        report.state_arcs[f"eps_norm_{label}"] = eps_norm
        report.scalars[f"theta_err_final_hybrid_{label}"] = float(
            theta_err.final_value())
        report.scalars[f"eps_max_{label}"] = float(eps_norm.norms().max())

    # excitation certificates: first cycle (headline) and the whole arc
    cycle_arc = pe_filter_arc(cfg, first_cycle_domain(cfg))
    t0 = time.perf_counter()
    cert = certify_hybrid_pe(cycle_arc, cfg.delta)
    report.timings["certify"] = time.perf_counter() - t0
    report.certificates["pe_certificate"] = cert
    full_psi = report.state_arcs["hybrid_case1"].map_stacked(
        lambda v: v[:, lay.ipsi].reshape(-1, 2, 2))
    cert_full = certify_hybrid_pe(full_psi, cfg.delta)
    report.certificates["pe_certificate_full"] = cert_full
    report.scalars["mu_first_cycle"] = cert.mu
    report.scalars["mu_full_arc"] = cert_full.mu

    # constant ledger and envelope checks
    inputs = BoundInputs(cfg.gamma_c, cfg.lambda_c, cfg.gamma_d, cfg.lambda_d,
                         phi_M=cfg.phi_M, psi_0=0.0, delta=cfg.delta,
                         mu=cert.mu, q_m=cfg.q_m, q_M=cfg.q_M, zeta=cfg.zeta)
    ledger = theorem1_constants(inputs)
    ledger.validate()
    report.ledger = ledger

    b_filter = lemma1_b(cfg.lambda_c, cfg.lambda_d)
    for label in ("case1", "case2"):
        suffix = "" if label == "case1" else "_case2"
        report.envelopes[f"envelope_filter_error{suffix}"] = check_envelope(
            report.state_arcs[f"eps_norm_{label}"], None, 1.0, b_filter,
            rtol=0.0)
        report.envelopes[f"envelope_theorem1{suffix}"] = check_envelope(
            report.csv_arcs[f"arc_dist_hybrid{suffix}"], None,
            ledger["kappa_g"], ledger["lambda_g"], rtol=0.0)

    # noise-injected variant and its trajectory bound
    if with_noise:
        noise = build_noise(cfg)
        t0 = time.perf_counter()
        arc_n = simulate(fast_system(cfg, noisy=True),
                         initial_state(cfg, cfg.eta0_case1), exec_cfg)
        report.timings["hybrid_noisy"] = time.perf_counter() - t0
        report.state_arcs["hybrid_noisy"] = arc_n
        _, eps_n, dist_n = _component_series(arc_n, theta, lay)
        report.csv_arcs["arc_dist_hybrid_noisy"] = dist_n
        d_arc, d_eps_arc = noise_disturbance_arcs(arc_n, build_plant(cfg),
                                                  cfg.params, noise)
        report.state_arcs["disturbance_d"] = d_arc
        report.state_arcs["disturbance_d_eps"] = d_eps_arc
        d_nu = np.sqrt(d_arc.running_sup() ** 2 + d_eps_arc.running_sup() ** 2)
        report.envelopes["envelope_iss"] = check_envelope(
            dist_n, None, ledger["kappa_nu"], ledger["lambda_nu"],
            offset_fn=ledger["rho_nu"] * d_nu, rtol=0.0)
        report.scalars["dist_final_noisy"] = float(dist_n.final_value())
        report.scalars["dist_max_noisy"] = float(dist_n.norms().max())

    # flattened classical baselines
    if with_baselines:
        t0 = time.perf_counter()
        ct_t, ct_theta = fast_ct_baseline(cfg)
        report.timings["ct_baseline"] = time.perf_counter() - t0
        ct_err = np.linalg.norm(ct_theta - theta, axis=1)
        ct_domain = HybridTimeDomain((0.0, cfg.t_end))
        report.csv_arcs["arc_theta_err_ct"] = HybridArc(
            ct_domain, [ct_t], [ct_err])
        report.scalars["theta_err_final_ct"] = float(ct_err[-1])

        n_jumps = int(math.floor(cfg.t_end / TWO_PI + 1e-9))
        t0 = time.perf_counter()
        dt = dt_gradient_run(phibar_d, xbar_d, cfg.params, n_jumps,
                             theta_hat0=np.asarray(cfg.theta_hat0, float),
                             psi0=np.zeros((2, 2)),
                             eta0=np.asarray(cfg.eta0_case1, float))
        report.timings["dt_baseline"] = time.perf_counter() - t0
        dt_err = np.linalg.norm(dt.theta_hat - theta, axis=1)
        # piecewise-constant hybrid arc placing estimate j on [2 pi j, 2 pi (j+1)]
        bounds_t = [TWO_PI * k for k in range(n_jumps + 1)] + [TWO_PI * n_jumps]
        dt_domain = HybridTimeDomain(tuple(bounds_t))
        times, values = [], []
        for k in range(n_jumps):
            times.append(np.array([TWO_PI * k, TWO_PI * (k + 1)]))
            values.append(np.array([dt_err[k], dt_err[k]]))
        times.append(np.array([TWO_PI * n_jumps]))
        values.append(np.array([dt_err[n_jumps]]))
        report.csv_arcs["arc_theta_err_dt"] = HybridArc(dt_domain, times, values)
        report.scalars["theta_err_final_dt"] = float(dt_err[-1])

    report.timings["total"] = sum(
        v for k, v in report.timings.items() if k != "total")
    return report
