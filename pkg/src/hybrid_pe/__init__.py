"""Parameter estimation for hybrid dynamical systems.

A numerical library for systems that both flow and jump: hybrid time
domains and arcs, a fixed-step hybrid-system executor with event location,
gradient estimators that update during flows and at jumps (plus the
classical continuous- and discrete-time baselines), hybrid
persistence-of-excitation certificates, closed-form convergence and
robustness constants, and two fully parameterized case studies.
"""

from .bounds import (BoundInputs, BoundLedger, EnvelopeReport, ISSConstants,
                     check_envelope, lemma1_b, lemma2_psi_M,
                     theorem1_constants, theorem2_constants,
                     theorem4_iss_constants)
from .estimators import (AssumptionViolationError, EstimatorParams,
                         EstimatorState, GradientRun, NoiseModel, PlantModel,
                         StateLayout, ct_gradient_run, dt_gradient_run,
                         epsilon, error_class_step_flow, error_class_step_jump,
                         hg_flow, hg_jump, hnu_flow, hnu_jump,
                         make_error_oracle_system, make_estimator_system,
                         make_psi_filter_system, noise_disturbance_arcs,
                         run_error_class)
from .hybrid_exec import (ExecConfig, HybridSystemDef, NonFiniteStateError,
                          locate_jump, rk4_step, simulate, simulate_on_domain)
from .hybrid_time import (HybridArc, HybridTimeDomain, HybridTimePoint,
                          hybrid_length, read_arc_csv, sup_norm, upsilon,
                          write_arc_csv)
from .pe_analysis import (PECertificate, certify_hybrid_pe, classic_pe_ct,
                          classic_pe_dt, hybrid_pe_gramian)
from .scenarios import (MotivationalConfig, RunReport, SpacecraftConfig,
                        emit_report, run_motivational, run_spacecraft)

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolationError",
    "BoundInputs",
    "BoundLedger",
    "EnvelopeReport",
    "EstimatorParams",
    "EstimatorState",
    "ExecConfig",
    "GradientRun",
    "HybridArc",
    "HybridSystemDef",
    "HybridTimeDomain",
    "HybridTimePoint",
    "ISSConstants",
    "MotivationalConfig",
    "NoiseModel",
    "NonFiniteStateError",
    "PECertificate",
    "PlantModel",
    "RunReport",
    "SpacecraftConfig",
    "StateLayout",
    "certify_hybrid_pe",
    "check_envelope",
    "classic_pe_ct",
    "classic_pe_dt",
    "ct_gradient_run",
    "dt_gradient_run",
    "emit_report",
    "epsilon",
    "error_class_step_flow",
    "error_class_step_jump",
    "hg_flow",
    "hg_jump",
    "hnu_flow",
    "hnu_jump",
    "hybrid_length",
    "hybrid_pe_gramian",
    "lemma1_b",
    "lemma2_psi_M",
    "locate_jump",
    "make_error_oracle_system",
    "make_estimator_system",
    "make_psi_filter_system",
    "noise_disturbance_arcs",
    "read_arc_csv",
    "rk4_step",
    "run_error_class",
    "run_motivational",
    "run_spacecraft",
    "simulate",
    "simulate_on_domain",
    "sup_norm",
    "theorem1_constants",
    "theorem2_constants",
    "theorem4_iss_constants",
    "upsilon",
    "write_arc_csv",
]
