"""Shared fixtures: expensive converged simulations are computed once per
session and reused across the acceptance criteria."""

import numpy as np
import pytest

from flockdyn.potentials import ModelParams, QuasiMorse
from flockdyn.simulate import SimConfig, UniformBall, run
from flockdyn.solver import solve_profile

REF3D = ModelParams(3, 1.255, 0.8, 0.2)
REF2D = ModelParams(2, 10.0 / 9.0, 0.75, 0.5)


@pytest.fixture(scope="session")
def ref3d_profile():
    return solve_profile(REF3D)


@pytest.fixture(scope="session")
def ref2d_profile():
    return solve_profile(REF2D)


@pytest.fixture(scope="session")
def ref3d_converged_state(ref3d_profile):
    """First-order N = 1000 run at the 3-D reference parameters, relaxed
    until the per-step displacement is far below the support radius."""
    config = SimConfig(
        potential=QuasiMorse(REF3D),
        dimension=3,
        N=1000,
        dt=1.0,
        steps=600,
        seed=1,
        init=UniformBall(ref3d_profile.R_star),
        record_stride=100,
    )
    state, summary = run(config)
    return state, summary, config


@pytest.fixture(scope="session")
def ref2d_converged_state(ref2d_profile):
    """First-order N = 1000 run at the 2-D reference parameters."""
    config = SimConfig(
        potential=QuasiMorse(REF2D),
        dimension=2,
        N=1000,
        dt=0.5,
        steps=600,
        seed=1,
        init=UniformBall(ref2d_profile.R_star),
        record_stride=100,
    )
    state, summary = run(config)
    return state, summary, config


@pytest.fixture(scope="session")
def ref3d_deep_state(ref3d_profile):
    """Deeply relaxed first-order state for the rigid-translation check.

    The second-order criterion integrates residual accelerations nearly
    ballistically over ten time units, so the initial state must be driven
    to a per-unit-time residual of a few 1e-6.  Step sizes beyond ~2 start
    trading density fidelity for residual (close pairs rattle), so the deep
    relaxation stays at dt = 2 and a moderate particle count keeps it at
    desk scale.
    """
    n_part = 400
    config = SimConfig(
        potential=QuasiMorse(REF3D),
        dimension=3,
        N=n_part,
        dt=1.0,
        steps=600,
        seed=1,
        init=UniformBall(ref3d_profile.R_star),
        record_stride=200,
    )
    state, summary = run(config)
    for _ in range(8):
        stage = SimConfig(
            potential=QuasiMorse(REF3D), dimension=3, N=n_part, dt=2.0,
            steps=500, seed=1, record_stride=500,
        )
        state, summary = run(stage, state)
        if summary.final_max_displacement / 2.0 <= 1.3e-5:
            break
    # a final unit-step stage settles the dt-scale rattle floor
    polish = SimConfig(
        potential=QuasiMorse(REF3D), dimension=3, N=n_part, dt=1.0,
        steps=500, seed=1, record_stride=500,
    )
    state, summary = run(polish, state)
    return state, summary, config
