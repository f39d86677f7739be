"""Shared fixtures: the expensive scenario runs happen once per session."""

import numpy as np
import pytest

from hybrid_pe import (ExecConfig, SpacecraftConfig, run_motivational,
                       run_spacecraft, simulate)
from hybrid_pe.scenarios.motivational import (MotivationalConfig, fast_system,
                                              initial_state)
from hybrid_pe.scenarios.spacecraft import feedforward_system


@pytest.fixture(scope="session")
def motivational_report():
    return run_motivational(with_baselines=True, with_noise=True)


@pytest.fixture(scope="session")
def motivational_half_step_final():
    """Final stacked state of the first-condition run at half the step."""
    cfg = MotivationalConfig(h=0.0005)
    arc = simulate(fast_system(cfg), initial_state(cfg, cfg.eta0_case1),
                   ExecConfig(h=cfg.h, t_end=cfg.t_end,
                              jump_location_tol=cfg.jump_location_tol))
    return np.array(arc.final_value())


@pytest.fixture(scope="session")
def spacecraft_report():
    return run_spacecraft(SpacecraftConfig(), controller="pd")


@pytest.fixture(scope="session")
def spacecraft_half_step_final():
    cfg = SpacecraftConfig(h=0.25)
    x0 = np.zeros(15)
    x0[:4] = cfg.x0
    arc = simulate(feedforward_system(cfg), x0,
                   ExecConfig(h=cfg.h, t_end=cfg.t_end,
                              jump_location_tol=min(cfg.jump_location_tol, cfg.h)))
    return np.array(arc.final_value())


@pytest.fixture(scope="session")
def spacecraft_pid_report():
    return run_spacecraft(SpacecraftConfig(), controller="pid")
