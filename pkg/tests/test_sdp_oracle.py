"""Independent numerical SDP solvers against the closed forms."""

import numpy as np
import pytest

from trackbound import certify
from trackbound.lmi import build, channel_data
from trackbound.schedule import Analysis, AnalysisKind, StepParams
from trackbound.sdp_oracle import (golden_min, solve_step_generic,
                                   solve_step_reduced)
from trackbound.smallmat import max_eig

from conftest import ALL_KIND_VARIANTS, draw_params

REDUCED_TOL = 1e-7
GENERIC_TOL = 1e-4


def test_golden_min_quadratic():
    x, f = golden_min(lambda t: (t - 3.0) ** 2, 1.0, 10.0)
    assert x == pytest.approx(3.0, abs=1e-7)
    assert f == pytest.approx(0.0, abs=1e-12)


def test_reduced_matches_closed_form_on_random_draws():
    rng = np.random.default_rng(42)
    for kind in ALL_KIND_VARIANTS:
        if kind.tag is Analysis.IP_OGD:
            continue
        for _ in range(3):
            U, p = draw_params(kind, rng)
            closed = certify.step(kind, U, p)
            red = solve_step_reduced(kind, U, p)
            assert red is not None
            assert abs(red.U_next - closed) <= REDUCED_TOL * max(1.0, closed), \
                (kind, U, p)


def test_generic_matches_closed_form_on_random_draws():
    rng = np.random.default_rng(43)
    for kind in ALL_KIND_VARIANTS:
        for _ in range(2):
            U, p = draw_params(kind, rng)
            closed = certify.step(kind, U, p)
            gen = solve_step_generic(kind, U, p, seed=0)
            assert abs(gen.U_next - closed) <= GENERIC_TOL * max(1.0, closed), \
                (kind, U, p)


def test_reduced_is_none_for_proximal_analysis():
    kind = AnalysisKind(Analysis.IP_OGD)
    p = StepParams(m=1.0, L=10.0, alpha=0.1, sigma=0.05, c=0.1, Lg=0.5)
    assert solve_step_reduced(kind, 1.0, p) is None


def test_vi_example_value():
    kind = AnalysisKind(Analysis.VI_OGD)
    p = StepParams(m=1.0, L=2.0, alpha=0.2, sigma=0.05, delta=0.1, c=0.1)
    red = solve_step_reduced(kind, 1.0, p)
    gen = solve_step_generic(kind, 1.0, p, seed=0)
    assert red.U_next == pytest.approx(0.93412, abs=1e-4)
    assert gen.U_next == pytest.approx(0.93412, abs=1e-4)


def test_biased_example_value():
    kind = AnalysisKind(Analysis.BIASED_SGD)
    p = StepParams(m=1.0, L=2.0, alpha=0.1, delta=0.1, c=0.1, G=0.5)
    gen = solve_step_generic(kind, 1.0, p, seed=0)
    assert gen.U_next == pytest.approx(0.94393, rel=1e-4)


def test_proximal_generic_matches_closed_form_example():
    kind = AnalysisKind(Analysis.IP_OGD)
    p = StepParams(m=1.0, L=10.0, alpha=0.1, sigma=0.05, c=0.1, Lg=0.5)
    closed = certify.step_ipogd(1.0, 1.0, 10.0, 0.1, 0.05, 0.1, 0.5)
    gen = solve_step_generic(kind, 1.0, p, seed=0)
    assert gen.U_next == pytest.approx(closed, rel=1e-4)


def test_generic_result_carries_feasible_certificate():
    rng = np.random.default_rng(44)
    for kind in ALL_KIND_VARIANTS[:4]:
        U, p = draw_params(kind, rng)
        gen = solve_step_generic(kind, U, p, seed=0)
        assert gen.cert is not None
        B, X, _ = channel_data(kind, p)
        scale = 1.0 + float(np.dot(B, B)) + sum(
            abs(l) * float(np.linalg.norm(Xj))
            for l, Xj in zip(gen.cert.lambdas, X))
        assert max_eig(np.asarray(build(kind, p, gen.cert))) <= 1e-8 * scale
        assert gen.iterations > 0
        assert gen.method == "generic"


def test_generic_is_deterministic_for_a_fixed_seed():
    kind = AnalysisKind(Analysis.STOCH_OGD_IID)
    p = StepParams(m=1.0, L=10.0, alpha=0.1, sigma=0.05, c=0.2)
    a = solve_step_generic(kind, 1.0, p, seed=9)
    b = solve_step_generic(kind, 1.0, p, seed=9)
    assert a.U_next == b.U_next
    assert a.cert.lambdas == b.cert.lambdas


def test_oracles_reject_negative_state():
    kind = AnalysisKind(Analysis.EXACT_OGD)
    p = StepParams(m=1.0, L=10.0, alpha=0.1, sigma=0.05)
    with pytest.raises(ValueError):
        solve_step_reduced(kind, -1.0, p)
    with pytest.raises(ValueError):
        solve_step_generic(kind, -1.0, p)
