"""Closed-form stability and robustness constants, and trajectory envelopes.

Every constant of the convergence-rate chain (filter decay, filter bound,
the Lyapunov sandwich p_m/p_M, the ISS gain rho and rate omega, and the
final trajectory envelope pair kappa_g/lambda_g) is computed from the
estimator gains, a regressor bound, and an excitation certificate.  The
chain intentionally reproduces two published variants of the filter decay
rate ``b`` (the standalone lemma uses 2*lambda_c where the constant chain
uses lambda_c); both are exposed, tagged, and never harmonized.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .hybrid_time import HybridArc


def _neg_log1m(x: float) -> float:
    """-ln(1 - x), +inf when x >= 1."""
    if x >= 1.0:
        return math.inf
    return -math.log1p(-x)


@dataclass
class BoundInputs:
    """Inputs to the constant chain.

    ``phi_M`` bounds the regressor Frobenius norms, ``psi_0`` the initial
    filter Frobenius norm; (``delta``, ``mu``) is the excitation
    certificate; ``q_m <= q_M`` and ``zeta`` parameterize the Lyapunov
    construction; ``L_c``/``L_d`` are plant Lipschitz constants (used only
    by robustness diagnostics).
    """

    gamma_c: float
    lambda_c: float
    gamma_d: float
    lambda_d: float
    phi_M: float
    psi_0: float
    delta: float
    mu: float
    q_m: float = 1.0
    q_M: float = 1.0
    zeta: float = 0.5
    L_c: float = 0.0
    L_d: float = 0.0

    def __post_init__(self):
        if self.gamma_c <= 0 or self.lambda_c <= 0 or self.gamma_d <= 0:
            raise ValueError("gamma_c, lambda_c, gamma_d must be positive")
        if not (0.0 < self.lambda_d < 2.0):
            raise ValueError("lambda_d must lie strictly in (0, 2)")
        if self.phi_M < 0 or self.psi_0 < 0:
            raise ValueError("phi_M and psi_0 must be nonnegative")
        if self.delta <= 0 or self.mu <= 0:
            raise ValueError("delta and mu must be positive")
        if not (self.q_M >= self.q_m > 0):
            raise ValueError("need q_M >= q_m > 0")
        if not (0.0 < self.zeta < 1.0):
            raise ValueError("zeta must lie strictly in (0, 1)")
        if self.L_c < 0 or self.L_d < 0:
            raise ValueError("Lipschitz constants must be nonnegative")


@dataclass
class BoundConstant:
    name: str
    value: float
    formula: str


@dataclass
class BoundLedger:
    """Named constants of the rate chain, each with its defining formula."""

    entries: dict = field(default_factory=dict)

    def add(self, name: str, value: float, formula: str) -> float:
        self.entries[name] = BoundConstant(name, float(value), formula)
        return float(value)

    def value(self, name: str) -> float:
        return self.entries[name].value

    def __getitem__(self, name: str) -> float:
        return self.entries[name].value

    def validate(self) -> None:
        """Check the structural invariants every consistent ledger satisfies."""
        v = self.value
        checks = [
            (0.0 < v("sigma") < 1.0, "sigma in (0, 1)"),
            (v("kappa_0") >= 1.0, "kappa_0 >= 1"),
            (v("lambda_0") > 0.0, "lambda_0 > 0"),
            (v("p_M") >= v("p_m") > 0.0, "p_M >= p_m > 0"),
            (v("omega") > 0.0, "omega > 0"),
            (v("kappa") >= 1.0, "kappa >= 1"),
            (v("kappa_g") >= 1.0, "kappa_g >= 1"),
            (v("lambda_g") > 0.0, "lambda_g > 0"),
        ]
        if "rho_nu" in self.entries:
            checks.append(
                (v("rho_nu") >= max(v("rho"), v("rho_eps")),
                 "rho_nu >= max(rho, rho_eps)")
            )
        failures = [msg for ok, msg in checks if not ok]
        if failures:
            raise ValueError("ledger invariant(s) violated: " + "; ".join(failures))

    def to_json(self) -> str:
        return json.dumps(
            {
                name: {"value": c.value, "formula": c.formula}
                for name, c in self.entries.items()
            },
            indent=2,
        )


def lemma1_b(lambda_c: float, lambda_d: float) -> float:
    """Decay rate of the filter error: 0.5 * min(2 lambda_c, -ln(1 - lambda_d (2 - lambda_d)))."""
    if lambda_c <= 0:
        raise ValueError("lambda_c must be positive")
    if not (0.0 < lambda_d < 2.0):
        raise ValueError("lambda_d must lie strictly in (0, 2)")
    return 0.5 * min(2.0 * lambda_c, _neg_log1m(lambda_d * (2.0 - lambda_d)))


def lemma2_psi_M(psi_0: float, lambda_c: float, lambda_d: float,
                 phi_M: float) -> float:
    """Uniform filter bound psi_0 + max(1/lambda_c, sqrt(2 lbar + 16)/lbar) * phi_M,
    with lbar = lambda_d (2 - lambda_d)."""
    if psi_0 < 0 or phi_M < 0:
        raise ValueError("psi_0 and phi_M must be nonnegative")
    if lambda_c <= 0:
        raise ValueError("lambda_c must be positive")
    if not (0.0 < lambda_d < 2.0):
        raise ValueError("lambda_d must lie strictly in (0, 2)")
    lbar = lambda_d * (2.0 - lambda_d)
    return psi_0 + max(1.0 / lambda_c, math.sqrt(2.0 * lbar + 16.0) / lbar) * phi_M


@dataclass
class Theorem2Constants:
    """Lyapunov sandwich and ISS data of the generic error class."""

    sigma: float
    kappa_0: float
    lambda_0: float
    p_m: float
    p_M: float
    rho: float
    omega: float

    @property
    def beta_coefficient(self) -> float:
        """Coefficient of the decaying term: beta(s, r) = sqrt(p_M/p_m) e^{-omega r} s."""
        return math.sqrt(self.p_M / self.p_m)

    def beta(self, s: float, r: float) -> float:
        return self.beta_coefficient * math.exp(-self.omega * r) * s


def theorem2_constants(q_m: float, q_M: float, zeta: float, mu_0: float,
                       a_M: float, delta: float) -> Theorem2Constants:
    """Constants of the ISS bound for the generic error class.

    ``mu_0`` is the excitation level of the (A, B) data, ``a_M`` the
    essential bound on |A|, and ``delta`` the excitation window length.
    Raises when the implied contraction sigma leaves (0, 1), which signals
    an inconsistent certificate.
    """
    if not (q_M >= q_m > 0):
        raise ValueError("need q_M >= q_m > 0")
    if not (0.0 < zeta < 1.0):
        raise ValueError("zeta must lie strictly in (0, 1)")
    if mu_0 <= 0 or a_M < 0 or delta <= 0:
        raise ValueError("need mu_0 > 0, a_M >= 0, delta > 0")
    sigma = 2.0 * mu_0 / (
        1.0 + math.sqrt((a_M + 2.0) * (delta + 2.0) ** 3
                        * (a_M * (delta + 2.0) + 0.5))
    ) ** 2
    if not (0.0 < sigma < 1.0):
        raise ValueError(
            f"sigma = {sigma:.6g} outside (0, 1): excitation level mu_0 is "
            "inconsistent with the bound a_M over windows of length delta"
        )
    kappa_0 = math.sqrt(1.0 / (1.0 - sigma))
    lambda_0 = -math.log1p(-sigma) / (2.0 * (delta + 1.0))
    p_m = q_m
    # e^{2 lambda_0} / (e^{2 lambda_0} - 1) via expm1 for tiny rates
    p_M = (q_m + q_M * kappa_0 ** 2 / (2.0 * lambda_0)
           + q_M * kappa_0 ** 2 * math.exp(2.0 * lambda_0)
           / math.expm1(2.0 * lambda_0))
    rho = math.sqrt(2.0 * p_M ** 3 / (q_m * p_m * zeta) * (2.0 * p_M / q_m + 1.0))
    arg = q_m / (2.0 * p_M) * (1.0 - zeta)
    omega = 0.5 * min(arg, _neg_log1m(arg))
    return Theorem2Constants(sigma, kappa_0, lambda_0, p_m, p_M, rho, omega)


def theorem1_constants(inputs: BoundInputs, include_iss: bool = True) -> BoundLedger:
    """Full constant chain down to the trajectory envelope pair.

    Evaluates, in dependency order, the filter bound psi_M, the error-class
    data bounds (a_M, mu_0), the Lyapunov sandwich of
    :func:`theorem2_constants`, the disturbance-decay pair (a, b), the
    intermediate envelope (kappa, lambda), and finally
    kappa_g = sqrt(3) kappa, lambda_g = min(lambda, b).  With
    ``include_iss`` the noise-robustness constants are appended.
    """
    led = BoundLedger()
    lbar = inputs.lambda_d * (2.0 - inputs.lambda_d)
    psi_M = led.add(
        "psi_M",
        lemma2_psi_M(inputs.psi_0, inputs.lambda_c, inputs.lambda_d, inputs.phi_M),
        "psi_0 + max(1/lambda_c, sqrt(2*lbar+16)/lbar) * phi_M",
    )
    a_M = led.add("a_M", inputs.gamma_c * psi_M ** 2, "gamma_c * psi_M^2")
    mu_0 = led.add(
        "mu_0",
        min(inputs.gamma_c, 1.0 / (2.0 * (inputs.gamma_d + psi_M ** 2))) * inputs.mu,
        "min(gamma_c, 1/(2*(gamma_d + psi_M^2))) * mu",
    )
    t2 = theorem2_constants(inputs.q_m, inputs.q_M, inputs.zeta, mu_0, a_M,
                            inputs.delta)
    led.add("sigma", t2.sigma,
            "2*mu_0 / (1 + sqrt((a_M+2)*(delta+2)^3*(a_M*(delta+2)+1/2)))^2")
    led.add("kappa_0", t2.kappa_0, "sqrt(1/(1-sigma))")
    led.add("lambda_0", t2.lambda_0, "-ln(1-sigma)/(2*(delta+1))")
    led.add("p_m", t2.p_m, "q_m")
    led.add("p_M", t2.p_M,
            "q_m + q_M*kappa_0^2/(2*lambda_0) + q_M*kappa_0^2*e^{2 lambda_0}/(e^{2 lambda_0}-1)")
    led.add("rho", t2.rho, "sqrt(2*p_M^3/(q_m*p_m*zeta) * (2*p_M/q_m + 1))")
    led.add("omega", t2.omega,
            "0.5*min(q_m*(1-zeta)/(2*p_M), -ln(1 - q_m*(1-zeta)/(2*p_M)))")
    a = led.add("a",
                max(inputs.gamma_c * psi_M, 1.0 / (2.0 * math.sqrt(inputs.gamma_d))),
                "max(gamma_c*psi_M, 1/(2*sqrt(gamma_d)))")
    b = led.add("b", 0.5 * min(inputs.lambda_c, _neg_log1m(lbar)),
                "0.5*min(lambda_c, -ln(1-lambda_d*(2-lambda_d)))  [constant-chain variant]")
    led.add("b_filter", lemma1_b(inputs.lambda_c, inputs.lambda_d),
            "0.5*min(2*lambda_c, -ln(1-lambda_d*(2-lambda_d)))  [filter-decay lemma]")
    kappa = led.add(
        "kappa",
        2.0 * max(t2.p_M / t2.p_m, a * t2.rho * math.sqrt(t2.p_M / t2.p_m)),
        "2*max(p_M/p_m, a*rho*sqrt(p_M/p_m))",
    )
    lam = led.add("lambda", 0.5 * min(t2.omega, b), "0.5*min(omega, b)")
    led.add("kappa_g", math.sqrt(3.0) * kappa, "sqrt(3)*kappa")
    led.add("lambda_g", min(lam, b), "min(lambda, b)")
    if include_iss:
        iss = theorem4_iss_constants(inputs, _t2=t2)
        led.add("lambda_eps", iss.lambda_eps,
                "0.5*min(lambda_c*(1-zeta), -ln(1-(lambda_d/2)*(2-lambda_d)*(1-zeta)))")
        led.add("rho_eps", iss.rho_eps,
                "max(2/(lambda_c*sqrt(zeta)), sqrt(2*lbar+16)/(lbar*sqrt(zeta)))")
        led.add("kappa_nu", iss.kappa_nu, "sqrt(2*p_M/p_m)")
        led.add("lambda_nu", iss.lambda_nu, "min(omega, lambda_eps)")
        led.add("rho_nu", iss.rho_nu, "sqrt(2)*max(rho, rho_eps)")
    return led


@dataclass
class ISSConstants:
    """Constants of the noise-to-error trajectory bound."""

    kappa_nu: float
    lambda_nu: float
    rho_nu: float
    lambda_eps: float
    rho_eps: float


def theorem4_iss_constants(inputs: BoundInputs,
                           _t2: Theorem2Constants | None = None) -> ISSConstants:
    """Input-to-state-stability constants with respect to measurement noise.

    The envelope reads kappa_nu e^{-lambda_nu (t+j)} |xi(0,0)| +
    rho_nu d_nu(t, j), with d_nu assembled from the running sup norms of
    the recorded disturbance arcs.
    """
    t2 = _t2
    if t2 is None:
        lbar = inputs.lambda_d * (2.0 - inputs.lambda_d)
        psi_M = lemma2_psi_M(inputs.psi_0, inputs.lambda_c, inputs.lambda_d,
                             inputs.phi_M)
        a_M = inputs.gamma_c * psi_M ** 2
        mu_0 = min(inputs.gamma_c,
                   1.0 / (2.0 * (inputs.gamma_d + psi_M ** 2))) * inputs.mu
        t2 = theorem2_constants(inputs.q_m, inputs.q_M, inputs.zeta, mu_0, a_M,
                                inputs.delta)
    lbar = inputs.lambda_d * (2.0 - inputs.lambda_d)
    lambda_eps = 0.5 * min(
        inputs.lambda_c * (1.0 - inputs.zeta),
        _neg_log1m(0.5 * inputs.lambda_d * (2.0 - inputs.lambda_d)
                   * (1.0 - inputs.zeta)),
    )
    sqrt_zeta = math.sqrt(inputs.zeta)
    rho_eps = max(2.0 / (inputs.lambda_c * sqrt_zeta),
                  math.sqrt(2.0 * lbar + 16.0) / (lbar * sqrt_zeta))
    kappa_nu = math.sqrt(2.0 * t2.p_M / t2.p_m)
    lambda_nu = min(t2.omega, lambda_eps)
    rho_nu = math.sqrt(2.0) * max(t2.rho, rho_eps)
    return ISSConstants(kappa_nu, lambda_nu, rho_nu, lambda_eps, rho_eps)


# -- trajectory envelopes ---------------------------------------------------


@dataclass
class EnvelopeReport:
    """Outcome of a pointwise envelope check along an arc."""

    kappa: float
    decay: float
    max_violation: float
    location: tuple
    passed: bool
    atol: float
    rtol: float
    num_samples: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "kappa": self.kappa,
                "decay": self.decay,
                "max_violation": self.max_violation,
                "location": {"t": self.location[0], "j": self.location[1]},
                "passed": self.passed,
                "slack": {"atol": self.atol, "rtol": self.rtol},
                "num_samples": self.num_samples,
            },
            indent=2,
        )


def check_envelope(arc: HybridArc, distance_fn, kappa: float, decay: float,
                   offset_fn=None, atol: float = 1e-9,
                   rtol: float = 1e-6) -> EnvelopeReport:
    """Check distance(t, j) <= kappa e^{-decay (t+j)} distance(0, 0) + offset(t, j).

    ``distance_fn`` maps each sample value to a nonnegative scalar (``None``
    uses the sample norm); ``offset_fn`` may be a callable of (t, j), an
    array aligned with the ordered samples, or ``None`` for zero.  The check
    passes when every violation stays within ``atol`` plus ``rtol`` times
    the local envelope value.
    """
    t, j, v = arc.ordered()
    if distance_fn is None:
        dist = arc.norms()
    else:
        dist = np.array([float(distance_fn(val)) for val in v])
    if offset_fn is None:
        offset = np.zeros(len(t))
    elif callable(offset_fn):
        offset = np.array([float(offset_fn(tt, jj)) for tt, jj in zip(t, j)])
    else:
        offset = np.asarray(offset_fn, dtype=float)
        if offset.shape != t.shape:
            raise ValueError("offset array must align with the ordered samples")
    env = kappa * np.exp(-decay * (t + j)) * dist[0] + offset
    violation = dist - env
    worst = int(np.argmax(violation))
    slack = atol + rtol * np.abs(env)
    return EnvelopeReport(
        kappa=float(kappa),
        decay=float(decay),
        max_violation=float(violation[worst]),
        location=(float(t[worst]), int(j[worst])),
        passed=bool(np.all(violation <= slack)),
        atol=atol,
        rtol=rtol,
        num_samples=len(t),
    )
