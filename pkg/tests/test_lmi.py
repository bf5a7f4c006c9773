"""LMI assembly and closed-form multiplier certificates."""

import numpy as np
import pytest

from trackbound import certify
from trackbound.errors import SignViolation
from trackbound.lmi import (BIG, LAMBDA_COUNT, SIGN_FREE,
                            MultiplierCertificate, build, certificate,
                            channel_data, lambda_weights, objective,
                            rho_hat_rel_branch, x_tilde_matrix)
from trackbound.schedule import (Analysis, AnalysisKind, FnClass, StepParams)
from trackbound.smallmat import is_nsd, max_eig

from conftest import ALL_KIND_VARIANTS, draw_params


def data_scale(kind, p, lams):
    B, X, _ = channel_data(kind, p)
    s = 1.0 + float(np.dot(B, B))
    for lam, Xj in zip(lams, X):
        s += abs(lam) * float(np.linalg.norm(Xj))
    return s


def test_multiplier_counts():
    assert {t.value: n for t, n in LAMBDA_COUNT.items()} == {
        "exact_ogd": 2, "inexact_ogd_abs": 3, "inexact_ogd_rel": 3,
        "vi_ogd": 4, "stoch_ogd_iid": 6, "finite_sum": 3, "ip_ogd": 5,
        "biased_sgd": 3,
    }
    assert SIGN_FREE[Analysis.STOCH_OGD_IID] == frozenset({3, 4, 5})


def test_channel_dimensions_match_counts():
    rng = np.random.default_rng(7)
    for kind in ALL_KIND_VARIANTS:
        _, p = draw_params(kind, rng)
        B, X, W = channel_data(kind, p)
        n = LAMBDA_COUNT[kind.tag]
        assert len(X) == len(W) == n
        dim = len(B) + 1
        assert all(Xj.shape == (dim, dim) for Xj in X)


def test_exact_ogd_worked_certificate():
    kind = AnalysisKind(Analysis.EXACT_OGD)
    p = StepParams(m=1.0, L=10.0, alpha=0.1, sigma=0.09)
    cert = certificate(kind, p, 1.0)
    # nu = sigma/(mu*sqrt(U)) = 0.09/0.9 = 0.1
    assert cert.rho2 == pytest.approx(0.891, rel=1e-12)
    assert cert.lambdas[0] == pytest.approx(0.011, rel=1e-12)
    assert cert.lambdas[1] == pytest.approx(11.0, rel=1e-12)
    M = build(kind, p, cert)
    assert is_nsd(M, scale=data_scale(kind, p, cert.lambdas))
    assert objective(kind, p, cert, 1.0) == pytest.approx(
        (0.9 + 0.09) ** 2, rel=1e-12)


def test_wrong_multiplier_count_rejected():
    kind = AnalysisKind(Analysis.EXACT_OGD)
    with pytest.raises(ValueError):
        MultiplierCertificate(kind, 0.5, (1.0,))
    with pytest.raises(SignViolation):
        MultiplierCertificate(kind, -0.5, (1.0, 1.0))


def test_negative_multiplier_rejected_unless_sign_free():
    kind = AnalysisKind(Analysis.EXACT_OGD)
    p = StepParams(m=1.0, L=10.0, alpha=0.1, sigma=0.09)
    cert = MultiplierCertificate(kind, 0.9, (-0.1, 1.0))
    with pytest.raises(SignViolation):
        build(kind, p, cert)
    # stochastic cross-term multipliers are sign-free by design
    skind = AnalysisKind(Analysis.STOCH_OGD_IID)
    sp = StepParams(m=1.0, L=10.0, alpha=0.1, sigma=0.05, c=0.2)
    scert = certificate(skind, sp, 1.0)
    lams = list(scert.lambdas)
    lams[3] -= 1.0
    build(skind, sp, MultiplierCertificate(skind, scert.rho2, tuple(lams)))


def test_x_tilde_matrices():
    assert np.allclose(x_tilde_matrix(FnClass.SMOOTH, 1.0, 3.0),
                       [[18.0, 0.0], [0.0, -1.0]])
    assert np.allclose(x_tilde_matrix(FnClass.SMOOTH_CONVEX, 1.0, 3.0),
                       [[0.0, 3.0], [3.0, -1.0]])
    assert np.allclose(
        x_tilde_matrix(FnClass.STRONGLY_CONVEX_SMOOTH, 1.0, 3.0),
        [[-6.0, 4.0], [4.0, -1.0]])


def test_certificates_feasible_and_optimal_across_analyses():
    rng = np.random.default_rng(123)
    for kind in ALL_KIND_VARIANTS:
        for _ in range(10):
            U, p = draw_params(kind, rng)
            closed = certify.step(kind, U, p)
            cert = certificate(kind, p, U)
            M = build(kind, p, cert)
            scale = data_scale(kind, p, cert.lambdas)
            assert max_eig(np.asarray(M)) <= 1e-9 * scale, (kind, U, p)
            obj = objective(kind, p, cert, U)
            assert obj == pytest.approx(closed, rel=1e-10), (kind, U, p)


def test_degenerate_gap_caps_curvature_multiplier():
    kind = AnalysisKind(Analysis.EXACT_OGD)
    p = StepParams(m=2.0, L=2.0, alpha=0.3, sigma=0.1)
    cert = certificate(kind, p, 1.0)
    assert cert.lambdas[0] == BIG
    assert is_nsd(build(kind, p, cert),
                  scale=data_scale(kind, p, cert.lambdas))


def test_relative_branch_values_and_weights():
    # verified instance: both branch boundaries give rho_hat = 0.75
    r2, _, _ = rho_hat_rel_branch(1.0, 3.0, 1.0 / 3.0, 0.25)
    assert np.sqrt(r2) == pytest.approx(0.75, rel=1e-12)
    r2, _, _ = rho_hat_rel_branch(1.0, 3.0, 7.0 / 15.0, 0.25)
    assert np.sqrt(r2) == pytest.approx(0.75, rel=1e-12)
    kind = AnalysisKind(Analysis.EXACT_OGD)
    p = StepParams(m=1.0, L=10.0, alpha=0.1, sigma=0.3)
    assert lambda_weights(kind, p)[1] == pytest.approx(0.09)
