"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion; a failing criterion fails its test.  The simulation-backed
criteria (9-11) share session fixtures and dominate the runtime (minutes).
"""

import math
import warnings

import numpy as np
import pytest

from flockdyn.convolution import (
    convolution_closed,
    convolution_closed_at,
    convolution_quadrature,
    verify_flock,
)
from flockdyn.potentials import ModelParams, MorseLike, QuasiMorse, Sign, aggregate_param
from flockdyn import specfun as sf
from flockdyn.simulate import (
    ParticleState,
    SimConfig,
    UniformBall,
    compare_profile,
    radial_histogram,
    run,
    step_second_order,
)
from flockdyn.solver import (
    EllLimit,
    LimitMismatchWarning,
    asymptotic_radius,
    density_eval,
    enumerate_roots,
    find_support_radius,
    flock_determinant,
    solve_profile,
)

REF3D = ModelParams(3, 1.255, 0.8, 0.2)
REF2D = ModelParams(2, 10.0 / 9.0, 0.75, 0.5)


def report(criterion: int, message: str) -> None:
    print(f"ACCEPTANCE {criterion:02d} PASS: {message}")


def region_i_draw(rng, n):
    C = float(rng.uniform(1.05, 6.0))
    if n == 3:
        lo, hi = C**-1.0, C ** (-1.0 / 3.0)
    else:
        lo, hi = 0.05, C**-0.5
    ell = float(rng.uniform(lo + 0.03 * (hi - lo), hi - 0.03 * (hi - lo)))
    return ModelParams(n, C, ell, float(rng.uniform(0.05, 2.0)))


# --------------------------------------------------------------- criterion 1


def test_acceptance_01_aggregate_parameter_regression():
    A3, a3 = aggregate_param(REF3D)
    assert A3 == pytest.approx(5.585, abs=1e-3)
    # internal consistency: a is exactly sqrt(A)
    assert a3 == pytest.approx(math.sqrt(A3), rel=1e-15)
    A2, _ = aggregate_param(REF2D)
    assert A2 == pytest.approx(1.500, abs=1e-12)
    report(1, f"A(3d) = {A3:.6f}, a = {a3:.6f}, A(2d) = {A2:.15f}")


@pytest.mark.xfail(
    strict=True,
    reason=(
        "the published reference pair (A = 5.585, a = 2.362) is internally "
        "inconsistent: sqrt(5.585) = 2.36326..., so the literal +/-0.001 band "
        "on a cannot be met while A is reproduced exactly"
    ),
)
def test_acceptance_01_reported_a_value_literal_band():
    _, a3 = aggregate_param(REF3D)
    assert a3 == pytest.approx(2.362, abs=1e-3)


# --------------------------------------------------------------- criterion 2


def test_acceptance_02_flock_verification(ref3d_profile, ref2d_profile):
    for name, profile in (("ref3d", ref3d_profile), ("ref2d", ref2d_profile)):
        rep = verify_flock(profile, grid_size=256)
        scale = abs(profile.D)
        assert rep.sup_dev_closed <= 1e-9 * scale
        assert rep.sup_dev_quad <= 1e-6 * scale
        report(
            2,
            f"{name}: closed dev {rep.sup_dev_closed / scale:.2e}, "
            f"quadrature dev {rep.sup_dev_quad / scale:.2e} (relative to |D|)",
        )


# --------------------------------------------------------------- criterion 3


def test_acceptance_03_nonexistence_sweeps():
    rng = np.random.default_rng(202)
    checked = 0
    for n in (2, 3):
        # 50 biologically relevant parameter sets with A < 0
        for _ in range(50):
            ell = float(rng.uniform(0.3, 0.95))
            params = ModelParams(
                n, float(rng.uniform(1.05, 3.0)) * ell**-n, ell,
                float(rng.uniform(0.05, 2.0)),
            )
            A, a = aggregate_param(params)
            assert A < 0.0
            grid = np.geomspace(1e-3 / a, 1e3 / a, 1000)
            vals = flock_determinant(params, grid)
            assert np.all(vals < 0.0)
            assert np.min(np.abs(vals)) > 0.0
            checked += 1
        # 50 sets exactly on the separatrix (A = 0); det M_0 depends only on
        # (n, k, ell), the scale 1/k replaces the undefined 1/a
        for _ in range(50):
            ell = float(rng.uniform(0.3, 0.95))
            k = float(rng.uniform(0.05, 2.0))
            params = ModelParams(n, ell**-n, ell, k)
            grid = np.geomspace(1e-3 / k, 1e3 / k, 1000)
            vals = flock_determinant(params, grid)
            assert np.all(vals < 0.0)
            assert np.min(np.abs(vals)) > 0.0
            checked += 1
    report(3, f"{checked} parameter sets x 1000 radii: det M < 0 throughout")


# --------------------------------------------------------------- criterion 4


def test_acceptance_04_root_structure_3d():
    rng = np.random.default_rng(404)
    for trial in range(20):
        params = region_i_draw(rng, 3)
        _, a = aggregate_param(params)
        tildes = [(j - 0.5) * math.pi / a for j in range(1, 6)]
        roots = enumerate_roots(params, 4)
        for r, j in roots:
            assert tildes[j - 1] < r < tildes[j]
        grid = np.linspace(1e-9 / a, tildes[0] * 0.9999999, 500)
        assert np.all(flock_determinant(params, grid) > 0.0)
        # higher-root densities change sign between the origin and Rtilde_2
        for j in (2, 3):
            prof_j = solve_profile(params, root_index=j)
            assert density_eval(prof_j, 0.0) * density_eval(prof_j, tildes[1]) < 0.0
    report(4, "20 region-I sets: 4 roots interlace, none below the first pole, "
              "higher-root densities change sign")


# --------------------------------------------------------------- criterion 5


def test_acceptance_05_positivity_and_monotonicity():
    rng = np.random.default_rng(505)
    count = 0
    for n in (2, 3):
        for _ in range(20):
            params = region_i_draw(rng, n)
            prof = solve_profile(params)
            grid = np.linspace(0.0, prof.R_star, 1000)
            rho = density_eval(prof, grid)
            assert np.all(rho > 0.0)
            assert np.all(np.diff(rho) <= 1e-12 * rho[0])
            count += 1
    report(5, f"{count} first-root densities strictly positive and non-increasing")


# --------------------------------------------------------------- criterion 6


def test_acceptance_06_asymptotic_radius_trend():
    C, k = 1.255, 0.2
    results = {}
    for limit, label, ells in (
        (EllLimit.UPPER, "upper",
         [(1.0 - 0.02 * 5.0**-m) * C ** (-1.0 / 3.0) for m in range(5)]),
        (EllLimit.LOWER, "lower",
         [(1.0 + 0.02 * 5.0**-m) / C for m in range(5)]),
    ):
        errs = []
        for ell in ells:
            params = ModelParams(3, C, ell, k)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LimitMismatchWarning)
                r_formula = asymptotic_radius(params, limit)
            r_solver, _ = find_support_radius(params)
            errs.append(abs(r_formula / r_solver - 1.0))
        assert all(b < a for a, b in zip(errs, errs[1:])), errs
        assert errs[-1] <= 0.02, errs
        results[label] = errs[-1]
    report(6, f"monotone convergence; closest deviations: "
              f"upper {results['upper']:.4f}, lower {results['lower']:.4f}")


# --------------------------------------------------------------- criterion 7


def test_acceptance_07_special_function_identities():
    x = np.logspace(-2, 2, 100)
    for nu in (0.0, 0.5, 1.0, 1.5):
        wron = sf.bessel_k(nu + 1.0, x) * sf.bessel_i(nu, x) + sf.bessel_k(
            nu, x
        ) * sf.bessel_i(nu + 1.0, x)
        assert np.max(np.abs(wron - 1.0 / x) * x) <= 1e-12
    for nu in (0.0, 0.5, 1.0):
        for fn in (sf.ratio_k_over_xk, sf.ratio_k, sf.ratio_k_inverse):
            grid = np.logspace(-3, 3, 100)
            assert np.all(np.diff(fn(nu, grid)) < 0.0)
    for xv in (0.3, 1.9, 5.3, 8.1):
        s = math.sqrt(2.0 / (math.pi * xv))
        assert sf.bessel_j(0.5, xv) == pytest.approx(s * math.sin(xv), rel=1e-14)
        assert sf.bessel_i(0.5, xv) == pytest.approx(s * math.sinh(xv), rel=1e-14)
        assert sf.bessel_k(0.5, xv) == pytest.approx(
            math.sqrt(math.pi / (2.0 * xv)) * math.exp(-xv), rel=1e-14
        )
    report(7, "Wronskian <= 1e-12, three ratio families strictly decreasing, "
              "half-integer closed forms to 1e-14")


# --------------------------------------------------------------- criterion 8


def test_acceptance_08_oracle_equivalence():
    rng = np.random.default_rng(808)
    worst = 0.0
    for n in (2, 3):
        for _ in range(10):
            params = region_i_draw(rng, n)
            prof = solve_profile(params)
            rho = lambda s: density_eval(prof, s)
            grid = np.linspace(0.0, prof.R_star, 64)
            closed = convolution_closed(prof, grid)
            quad = convolution_quadrature(
                rho, QuasiMorse(params), prof.R_star, grid
            )
            scale = np.maximum(np.abs(closed), abs(prof.D))
            worst = max(worst, float(np.max(np.abs(closed - quad) / scale)))
    # constant density on a ball (quadratic branch, mu1 = 0)
    for params in (REF3D, REF2D):
        rho_c = lambda s: 0.7 * np.ones_like(np.asarray(s, dtype=np.float64))
        for r in (0.0, 0.6, 1.2):
            closed = convolution_closed_at(params, 1.21, 0.0, 0.7, r, case=Sign.ZERO)
            quad = convolution_quadrature(rho_c, QuasiMorse(params), 1.21, r)
            worst = max(worst, abs(closed - quad) / abs(closed))
    assert worst <= 1e-6
    report(8, f"closed vs quadrature worst relative deviation {worst:.2e}")


# --------------------------------------------------------------- criterion 9


def test_acceptance_09_particle_continuum_agreement(
    ref3d_profile, ref2d_profile, ref3d_converged_state, ref2d_converged_state
):
    for name, profile, (state, summary, config) in (
        ("ref-3d", ref3d_profile, ref3d_converged_state),
        ("ref-2d", ref2d_profile, ref2d_converged_state),
    ):
        # converged: per-step motion far below the support radius
        assert summary.final_max_displacement <= 1e-3 * profile.R_star
        hist = radial_histogram(state, 8)
        l1, support_err = compare_profile(hist, profile)
        assert l1 <= 0.10, (name, l1)
        assert support_err <= 0.05, (name, support_err)
        report(9, f"{name}: l1 = {l1:.3f}, support error = {support_err:.3f}")


# -------------------------------------------------------------- criterion 10


def test_acceptance_10_morse_like_profiles():
    # interior-supported blob at p = 1/2: the equilibrium droplet lives at
    # the r_min ~ 0.014 scale, so the run uses the ell-scaled default-dt
    # regime and a matching initial ball
    cfg_a = SimConfig(
        potential=MorseLike(0.5, 0.6, 0.2), dimension=2, N=1000, dt=0.005,
        steps=1200, seed=2, init=UniformBall(0.1), record_stride=300,
    )
    state_a, _ = run(cfg_a)
    hist_a = radial_histogram(state_a, 12)
    peak_a = int(np.argmax(hist_a.density))
    assert np.all(hist_a.density[:3] > 0.0)  # interior mass present
    assert peak_a < 0.8 * len(hist_a.density)  # max bin not at the boundary

    # boundary-peaked profile at p = 3/2 near ell* = C^{1/p}
    ell_star = 0.6 ** (1.0 / 1.5)
    assert ell_star == pytest.approx(0.7114, abs=5e-5)
    cfg_b = SimConfig(
        potential=MorseLike(1.5, 0.6, 0.95 * ell_star), dimension=2, N=1000,
        dt=0.05, steps=800, seed=2, init=UniformBall(1.0), record_stride=200,
    )
    state_b, _ = run(cfg_b)
    hist_b = radial_histogram(state_b, 12)
    peak_b = int(np.argmax(hist_b.density))
    assert peak_b >= 0.8 * len(hist_b.density)  # max bin in the outer 20%
    report(10, f"p=1/2 peak bin {peak_a}/11 (interior); "
               f"p=3/2 peak bin {peak_b}/11 (boundary)")


# -------------------------------------------------------------- criterion 11


def test_acceptance_11_second_order_flock_stability(
    ref3d_profile, ref3d_deep_state
):
    state, _, _ = ref3d_deep_state
    alpha, beta = 1.0, 0.5
    cruise = math.sqrt(alpha / beta)
    velocities = np.zeros_like(state.positions)
    velocities[:, 0] = cruise
    moving = ParticleState(
        positions=state.positions.copy(), velocities=velocities, time=0.0
    )
    dt = 0.02
    config = SimConfig(
        potential=QuasiMorse(REF3D), dimension=3, N=state.positions.shape[0],
        dt=dt, steps=int(round(10.0 / dt)), model="second", alpha=alpha,
        beta=beta, seed=1, record_stride=250,
    )
    rel0 = state.positions - state.positions.mean(axis=0)
    final, _ = run(config, moving)
    rel = final.positions - final.positions.mean(axis=0)
    drift = float(np.max(np.linalg.norm(rel - rel0, axis=1)))
    assert drift <= 1e-3 * ref3d_profile.R_star
    # the flock actually translated at the cruise speed
    travel = final.positions.mean(axis=0) - state.positions.mean(axis=0)
    assert travel[0] == pytest.approx(10.0 * cruise, rel=1e-2)
    report(11, f"relative drift {drift:.2e} <= 1e-3 R* over 10 time units")
