"""Closed-form per-step bounds and whole-horizon traces."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trackbound import certify
from trackbound.certify import (rho_hat_rel, run, step, step_biased_sgd,
                                step_exact_ogd, step_finite_sum,
                                step_inexact_abs, step_inexact_rel,
                                step_ipogd, step_stoch_iid, step_vi,
                                stoch_alt_bound, stoch_fixed_point)
from trackbound.errors import (DeltaOutOfRange, NoContraction,
                               StepsizeOutOfRange, ValidateFailed)
from trackbound.schedule import (Analysis, AnalysisKind, FnClass, ParamTrack,
                                 mu)

from conftest import ALL_KIND_VARIANTS, draw_params


def test_exact_ogd_worked_value():
    assert step_exact_ogd(1.0, 1.0, 10.0, 0.1, 0.05) == pytest.approx(
        0.9025, rel=1e-12)


def test_abs_error_degenerates_to_exact():
    assert step_inexact_abs(1.0, 1.0, 10.0, 0.1, 0.05, 0.0) == \
        step_exact_ogd(1.0, 1.0, 10.0, 0.1, 0.05)
    assert step_inexact_abs(1.0, 1.0, 10.0, 0.1, 0.05, 0.2) == pytest.approx(
        (0.9 + 0.05 + 0.02) ** 2, rel=1e-12)


def test_rel_error_degenerates_to_exact():
    assert step_inexact_rel(1.0, 1.0, 10.0, 0.1, 0.05, 0.0) == pytest.approx(
        0.9025, rel=1e-12)


def test_stoch_iid_worked_value():
    assert step_stoch_iid(1.0, 1.0, 10.0, 0.1, 0.05, 0.2) == pytest.approx(
        0.9029, rel=1e-12)


def test_vi_worked_value():
    val = step_vi(1.0, 1.0, 2.0, 0.2, 0.05, 0.1, 0.1)
    expect = (math.sqrt(0.76) + 0.2 * math.sqrt(0.05) + 0.05) ** 2
    assert val == pytest.approx(expect, rel=1e-12)
    assert val == pytest.approx(0.93412, abs=5e-6)


def test_biased_sgd_worked_value():
    val = step_biased_sgd(1.0, 1.0, 2.0, 0.1, 0.1, 0.1, 0.5)
    expect = (0.1 * math.sqrt(0.095) + math.sqrt(0.885)) ** 2
    assert val == pytest.approx(expect, rel=1e-12)
    assert val == pytest.approx(0.94393, rel=1e-4)


def test_ipogd_is_the_sdp_optimum_form():
    # composite step: all four additive penalties enter as
    # mu*sqrt(U) + sigma + alpha*c + 2*alpha*Lg
    val = step_ipogd(1.0, 1.0, 10.0, 0.1, 0.05, 0.1, 0.5)
    assert val == pytest.approx((0.9 + 0.05 + 0.01 + 0.1) ** 2, rel=1e-12)
    assert step_ipogd(1.0, 1.0, 10.0, 0.1, 0.05, 0.0, 0.0) == \
        step_exact_ogd(1.0, 1.0, 10.0, 0.1, 0.05)


def test_finite_sum_contraction_per_class():
    # rho_hat = 1 - 2*alpha*m + m_tilde*alpha^2 with the class-specific
    # quadratic coefficient (2L^2 / 2mL / 2m^2)
    m, L, a = 1.0, 10.0, 0.005
    expect = {FnClass.SMOOTH: 1 - 2 * a * m + 2 * a * a * L * L,
              FnClass.SMOOTH_CONVEX: 1 - 2 * a * m + 2 * a * a * m * L,
              FnClass.STRONGLY_CONVEX_SMOOTH: 1 - 2 * a * m + 2 * a * a * m * m}
    for fc, rho in expect.items():
        assert step_finite_sum(1.0, fc, m, L, a, 0.0, 0.0) == pytest.approx(
            rho, rel=1e-12)


def test_stepsize_and_budget_guards():
    with pytest.raises(StepsizeOutOfRange):
        step_exact_ogd(1.0, 1.0, 10.0, 0.3, 0.0)
    with pytest.raises(DeltaOutOfRange):
        step_inexact_rel(1.0, 1.0, 10.0, 0.1, 0.0, 0.5)
    with pytest.raises(DeltaOutOfRange):
        step_vi(1.0, 1.0, 2.0, 0.1, 0.0, 0.9, 0.0)
    with pytest.raises(StepsizeOutOfRange):
        step_finite_sum(1.0, FnClass.SMOOTH, 1.0, 10.0, 0.05, 0.0, 0.1)


def test_rho_hat_rel_verified_instance():
    a_minus = (2.0 / 4.0 - 0.25) / 0.75
    a_plus = (2.0 / 4.0 + 0.25 / 3.0) / 1.25
    assert a_minus == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert a_plus == pytest.approx(7.0 / 15.0, rel=1e-12)
    assert rho_hat_rel(1.0, 3.0, a_minus, 0.25) == pytest.approx(0.75,
                                                                 rel=1e-12)
    assert rho_hat_rel(1.0, 3.0, a_plus, 0.25) == pytest.approx(0.75,
                                                                rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(1.01, 100.0), st.floats(0.01, 0.95))
def test_rho_hat_rel_branch_continuity(m, ratio, dfrac):
    L = m * ratio
    delta = dfrac * 2.0 * m / (L + m)
    for knot in ((2.0 / (L + m) - delta / m) / (1.0 - delta),
                 (2.0 / (L + m) + delta / L) / (1.0 + delta)):
        lo = rho_hat_rel(m, L, knot * (1.0 - 1e-10), delta)
        hi = rho_hat_rel(m, L, knot * (1.0 + 1e-10), delta)
        assert abs(hi - lo) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1e-4, 1e2), st.floats(1e-4, 1e2))
def test_step_monotone_in_state(seed, U1, U2):
    rng = np.random.default_rng(seed)
    for kind in ALL_KIND_VARIANTS:
        _, p = draw_params(kind, rng)
        lo, hi = sorted((U1, U2))
        assert step(kind, lo, p) <= step(kind, hi, p) * (1 + 1e-12)


def test_stoch_fixed_point_is_a_fixed_point():
    U = stoch_fixed_point(1.0, 10.0, 0.1, 0.05, 0.2)
    assert step_stoch_iid(U, 1.0, 10.0, 0.1, 0.05, 0.2) == pytest.approx(
        U, rel=1e-12)
    with pytest.raises(NoContraction):
        stoch_fixed_point(1.0, 10.0, 0.2, 0.05, 0.2)


def test_stoch_alt_bound_dominates_recursion():
    m, L, a, s, c = 1.0, 10.0, 0.1, 0.05, 0.2
    U = 1.0
    for t in range(200):
        assert U <= stoch_alt_bound(1.0, t, m, L, a, s, c) * (1 + 1e-12)
        U = step_stoch_iid(U, m, L, a, s, c)


def test_run_trace_worked_values():
    kind = AnalysisKind(Analysis.EXACT_OGD)
    track = ParamTrack(horizon=2, m=1.0, L=10.0, alpha=0.1, sigma=0.05,
                       U0=1.0)
    bt = run(kind, track)
    assert bt.U == pytest.approx((1.0, 0.9025, 0.819025), rel=1e-12)
    assert math.sqrt(bt.U[2]) == pytest.approx(0.905, rel=1e-12)
    assert bt.factor == pytest.approx((0.9, 0.9), rel=1e-12)
    # steady state is the fixed point of sqrt(U') = mu*sqrt(U) + sigma
    assert bt.steady_state == pytest.approx(0.05 / 0.1, rel=1e-12)


def test_run_rejects_invalid_schedule():
    kind = AnalysisKind(Analysis.EXACT_OGD)
    track = ParamTrack(horizon=2, m=1.0, L=10.0, alpha=[0.1, 0.5], U0=1.0)
    with pytest.raises(ValidateFailed):
        run(kind, track)


def test_contraction_factor_matches_mu():
    rng = np.random.default_rng(5)
    kind = AnalysisKind(Analysis.INEXACT_OGD_ABS)
    _, p = draw_params(kind, rng)
    assert certify.contraction_factor(kind, p) == mu(p.m, p.L, p.alpha)
