"""End-to-end case studies: plant definitions, estimator wiring, baselines,
and run reports."""

from .motivational import MotivationalConfig, run_motivational
from .report import RunReport, emit_report
from .spacecraft import SpacecraftConfig, run_spacecraft

__all__ = [
    "MotivationalConfig",
    "SpacecraftConfig",
    "RunReport",
    "emit_report",
    "run_motivational",
    "run_spacecraft",
]
