"""Trajectory generators, error policies, and soundness checking."""

import math

import numpy as np
import pytest

from trackbound import certify, simulate
from trackbound.errors import HorizonMismatch
from trackbound.schedule import Analysis, AnalysisKind, FnClass, ParamTrack
from trackbound.simulate import (AbsoluteWorstCase, DiagonalComposite, Drift,
                                 DriftingQuadratic, FiniteSumQuadratic,
                                 IidGaussian, MonotoneField, NoError,
                                 RelativeWorstCase, Trajectory,
                                 check_soundness, monotone_residuals,
                                 random_spd_matrix, rng_for, run_inexact_ogd,
                                 run_ipogd, run_stoch_finite_sum, run_vi_ogd,
                                 sector_residual, soft_threshold,
                                 trial_mean_errors)


def quad_1d(drift=Drift.ALIGNED_AWAY):
    return DriftingQuadratic(H=np.array([[1.0]]), m=1.0, L=10.0, drift=drift)


def test_soft_threshold_defining_cases():
    assert soft_threshold(1.0, 0.3) == pytest.approx(0.7)
    assert soft_threshold(-0.2, 0.3) == 0.0
    assert soft_threshold(-1.0, 0.3) == pytest.approx(-0.7)


def test_random_spd_matrix_attains_endpoints():
    H = random_spd_matrix(6, 1.0, 10.0, rng_for(3))
    w = np.linalg.eigvalsh(H)
    assert w[0] == pytest.approx(1.0, rel=1e-9)
    assert w[-1] == pytest.approx(10.0, rel=1e-9)


def test_exact_ogd_tightness_sequence():
    # 1-D aligned-away drift: sqrt(e) follows 1, 0.95, 0.905 exactly
    track = ParamTrack(horizon=2, m=1.0, L=10.0, alpha=0.1, sigma=0.05,
                       U0=1.0)
    traj = run_inexact_ogd(quad_1d(), track, NoError())
    assert np.sqrt(traj.e) == pytest.approx([1.0, 0.95, 0.905], rel=1e-12)


def test_zero_drift_zero_error_is_geometric():
    track = ParamTrack(horizon=50, m=1.0, L=10.0, alpha=0.1, U0=1.0)
    traj = run_inexact_ogd(quad_1d(), track, NoError())
    ref = 0.9 ** np.arange(51)
    assert np.sqrt(traj.e) == pytest.approx(ref, rel=1e-12)


def test_iid_gaussian_with_zero_budget_is_noise_free():
    track = ParamTrack(horizon=5, m=1.0, L=10.0, alpha=0.1, sigma=0.05,
                       U0=1.0)
    a = run_inexact_ogd(quad_1d(), track, IidGaussian(), seed=1)
    b = run_inexact_ogd(quad_1d(), track, NoError(), seed=1)
    assert np.array_equal(a.e, b.e)


def test_absolute_worst_case_is_tight_in_1d():
    track = ParamTrack(horizon=20, m=1.0, L=10.0, alpha=0.1, sigma=0.05,
                       c=0.2, U0=1.0)
    traj = run_inexact_ogd(quad_1d(), track, AbsoluteWorstCase())
    bt = certify.run(AnalysisKind(Analysis.INEXACT_OGD_ABS), track)
    assert traj.e == pytest.approx(np.array(bt.U), rel=1e-12)


def test_relative_worst_case_stays_sound():
    rng = rng_for(11)
    H = random_spd_matrix(10, 1.0, 5.0, rng)
    prob = DriftingQuadratic(H=H, m=1.0, L=5.0)
    track = ParamTrack(horizon=100, m=1.0, L=5.0, alpha=0.2, sigma=0.03,
                       delta=0.2, U0=1.0)
    traj = run_inexact_ogd(prob, track, RelativeWorstCase(), seed=4)
    bt = certify.run(AnalysisKind(Analysis.INEXACT_OGD_REL), track)
    assert check_soundness(traj, bt).ok


def test_vi_rotation_field_one_step_value():
    field = MonotoneField(m=1.0, b=math.sqrt(3.0), blocks=1)
    assert field.L == pytest.approx(2.0, rel=1e-12)
    track = ParamTrack(horizon=1, m=1.0, L=2.0, alpha=0.2, U0=1.0)
    traj = run_vi_ogd(field, track)
    assert traj.e[1] == pytest.approx(0.76, rel=1e-12)


def test_vi_symmetric_field_matches_gradient_descent():
    field = MonotoneField(m=1.0, b=0.0, blocks=2)
    prob = DriftingQuadratic(H=np.eye(2 * field.blocks), m=1.0, L=1.0)
    track = ParamTrack(horizon=30, m=1.0, L=1.0, alpha=0.3, sigma=0.05,
                       U0=1.0)
    a = run_vi_ogd(field, track, worst=False, seed=6)
    b = run_inexact_ogd(prob, track, NoError(), seed=6)
    assert np.allclose(a.e, b.e, rtol=1e-12)


def test_finite_sum_single_component_matches_exact_ogd():
    H = np.eye(3)
    anchors = np.tile(np.array([1.0, -1.0, 0.5]), (1, 1))
    prob = FiniteSumQuadratic(H=H, anchors=anchors, m=1.0, L=1.0,
                              drift=Drift.ALIGNED_AWAY)
    track = ParamTrack(horizon=25, m=1.0, L=1.0, alpha=0.3, sigma=0.02,
                       U0=1.0)
    traj = run_stoch_finite_sum(prob, track, seed=8)
    quad = DriftingQuadratic(H=H, m=1.0, L=1.0, drift=Drift.ALIGNED_AWAY)
    ref = run_inexact_ogd(quad, track, NoError(), x_star0=anchors[0], seed=8)
    assert np.allclose(traj.e, ref.e, rtol=1e-12)


def test_finite_sum_dispersion_is_drift_invariant():
    rng = rng_for(21)
    H = random_spd_matrix(4, 1.0, 3.0, rng)
    anchors = rng.normal(size=(5, 4))
    prob = FiniteSumQuadratic(H=H, anchors=anchors, m=1.0, L=3.0)
    d0 = prob.dispersion(prob.anchors)
    d1 = prob.dispersion(prob.anchors + rng.normal(size=4))
    assert d1 == pytest.approx(d0, rel=1e-9)


def test_ipogd_without_penalty_matches_inexact_ogd():
    h = np.array([1.0, 2.0, 10.0])
    comp = DiagonalComposite(h=h, lam1=0.0, m=1.0, L=10.0,
                             drift=Drift.ALIGNED_AWAY)
    quad = DriftingQuadratic(H=np.diag(h), m=1.0, L=10.0,
                             drift=Drift.ALIGNED_AWAY)
    track = ParamTrack(horizon=30, m=1.0, L=10.0, alpha=0.1, sigma=0.04,
                       c=0.1, U0=1.0)
    a = run_ipogd(comp, track, AbsoluteWorstCase(), seed=2)
    b = run_inexact_ogd(quad, track, AbsoluteWorstCase(), seed=2)
    assert np.allclose(a.e, b.e, rtol=1e-12)


def test_diagonal_composite_minimizer_is_soft_threshold():
    comp = DiagonalComposite(h=np.array([1.0]), lam1=0.3, m=1.0, L=1.0)
    assert comp.minimizer(np.array([1.0]))[0] == pytest.approx(0.7)
    assert comp.minimizer(np.array([-0.2]))[0] == 0.0
    assert comp.Lg == pytest.approx(0.3)


def test_generator_spot_checks():
    rng = rng_for(31)
    H = random_spd_matrix(8, 0.5, 4.0, rng)
    prob = DriftingQuadratic(H=H, m=0.5, L=4.0)
    assert sector_residual(prob, rng_for(32), points=100) >= -1e-9
    field = MonotoneField(m=1.0, b=2.0, blocks=3)
    mono, lip = monotone_residuals(field, rng_for(33), pairs=100)
    assert mono >= -1e-9
    assert lip >= -1e-9


def test_reproducibility_bit_identical():
    track = ParamTrack(horizon=40, m=1.0, L=10.0, alpha=0.1, sigma=0.05,
                       c=0.2, U0=1.0, delta=0.0)
    prob = DriftingQuadratic(H=random_spd_matrix(6, 1.0, 10.0, rng_for(1)),
                             m=1.0, L=10.0, drift=Drift.RANDOM_UNIT)
    a = run_inexact_ogd(prob, track, IidGaussian(), seed=77, trial=3)
    b = run_inexact_ogd(prob, track, IidGaussian(), seed=77, trial=3)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.e, b.e)
    c = run_inexact_ogd(prob, track, IidGaussian(), seed=77, trial=4)
    assert not np.array_equal(a.e, c.e)


def test_check_soundness_modes_and_errors():
    U = np.array([1.0, 0.5, 0.25])
    ok = check_soundness(np.array([1.0, 0.5, 0.25]), U)
    assert ok.ok and ok.first_violation is None
    bad = check_soundness(np.array([1.0, 0.6, 0.25]), U)
    assert not bad.ok and bad.first_violation == 1
    mean = check_soundness(np.array([1.0, 0.52, 0.25]), U,
                           mode="mean-square", trials=10000)
    assert mean.ok
    with pytest.raises(HorizonMismatch):
        check_soundness(np.array([1.0, 0.5]), U)
    with pytest.raises(ValueError):
        check_soundness(np.array([1.0, 0.5, 0.2]), U, mode="mean-square")


def test_trial_mean_errors_shapes():
    track = ParamTrack(horizon=10, m=1.0, L=10.0, alpha=0.1, c=0.3, U0=1.0)
    prob = quad_1d()
    mean, peak = trial_mean_errors(
        lambda trial: run_inexact_ogd(prob, track, IidGaussian(), seed=5,
                                      trial=trial), 64)
    assert mean.shape == peak.shape == (11,)
    assert np.all(peak >= mean - 1e-15)


def test_trajectory_requires_matching_lengths():
    with pytest.raises(HorizonMismatch):
        Trajectory(x=np.zeros((3, 1)), x_star=np.zeros((3, 1)),
                   e=np.zeros(2), gaps=np.zeros(3), seed=0)
