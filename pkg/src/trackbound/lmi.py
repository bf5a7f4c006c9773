"""LMI assembly and explicit multiplier certificates for each analysis.

Every analysis certifies a one-step tracking-error inequality through a
matrix inequality of the form

    [[1 - rho^2, B], [B^T, B^T B]] - sum_j lambda_j X_j  <=  0   (NSD),

where the X_j encode quadratic supply-rate conditions on the perturbation
channels and each lambda_j is paired with a constant energy weight
Lambda_j (sigma^2, c^2, 2 G^2, 4 Lg^2 or 0).  The step objective is
rho^2 * U + sum_j lambda_j * Lambda_j.

``build`` substitutes parameters and a candidate multiplier tuple into
the exact matrix; ``certificate`` constructs the optimal multiplier
tuple in closed form (feasibility-searched for the two objective-free
multipliers of the proximal analysis, whose closed form is unknown).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateState, SignViolation
from .schedule import Analysis, AnalysisKind, FnClass, StepParams, mu
from .smallmat import SymMat

# Multipliers whose optimal value diverges while their energy weight is
# zero are capped at this magnitude; the objective is unaffected and the
# scale-relative NSD test absorbs the O(1/BIG) feasibility slack.
BIG = 1e8

# Number of multipliers per analysis.
LAMBDA_COUNT = {
    Analysis.EXACT_OGD: 2,
    Analysis.INEXACT_OGD_ABS: 3,
    Analysis.INEXACT_OGD_REL: 3,
    Analysis.VI_OGD: 4,
    Analysis.STOCH_OGD_IID: 6,
    Analysis.FINITE_SUM: 3,
    Analysis.IP_OGD: 5,
    Analysis.BIASED_SGD: 3,
}

# Zero-based indices of sign-free multipliers (zero-mean cross terms).
SIGN_FREE = {
    Analysis.STOCH_OGD_IID: frozenset({3, 4, 5}),
}


@dataclass(frozen=True)
class MultiplierCertificate:
    """A candidate (rho^2, lambda_1..lambda_J) for one step's LMI."""

    kind: AnalysisKind
    rho2: float
    lambdas: Tuple[float, ...]

    def __post_init__(self):
        expect = LAMBDA_COUNT[self.kind.tag]
        if len(self.lambdas) != expect:
            raise ValueError(
                f"{self.kind} expects {expect} multipliers, got {len(self.lambdas)}"
            )
        if self.rho2 < 0:
            raise SignViolation("rho^2 must be >= 0")


def _Y(m: float, L: float) -> np.ndarray:
    return np.array([[2.0 * L * m, -(L + m)], [-(L + m), 2.0]])


def _M(m: float) -> np.ndarray:
    return np.array([[2.0 * m, -1.0], [-1.0, 0.0]])


def x_tilde_matrix(fn_class: FnClass, m: float, L: float) -> np.ndarray:
    """Gradient-dispersion supply matrix of the finite-sum analysis."""
    if fn_class is FnClass.SMOOTH:
        return np.array([[2.0 * L * L, 0.0], [0.0, -1.0]])
    if fn_class is FnClass.SMOOTH_CONVEX:
        return np.array([[0.0, L], [L, -1.0]])
    return np.array([[-2.0 * L * m, L + m], [L + m, -1.0]])


def _embed(block: np.ndarray, dim: int, at: int = 0) -> np.ndarray:
    out = np.zeros((dim, dim))
    k = block.shape[0]
    out[at:at + k, at:at + k] = block
    return out


def _diag_unit(dim: int, i: int) -> np.ndarray:
    out = np.zeros((dim, dim))
    out[i, i] = 1.0
    return out


def _cross_unit(dim: int, i: int, j: int) -> np.ndarray:
    out = np.zeros((dim, dim))
    out[i, j] = out[j, i] = 1.0
    return out


def channel_data(kind: AnalysisKind, p: StepParams):
    """The (B, [X_j], [Lambda_j]) triple defining one analysis' LMI."""
    m, L, a = p.m, p.L, p.alpha
    tag = kind.tag
    if tag is Analysis.EXACT_OGD:
        B = np.array([-a, 1.0])
        X = [_embed(_Y(m, L), 3), _diag_unit(3, 2)]
        W = [0.0, p.sigma ** 2]
    elif tag is Analysis.INEXACT_OGD_ABS:
        B = np.array([-a, 1.0, -a])
        X = [_embed(_Y(m, L), 4), _diag_unit(4, 2), _diag_unit(4, 3)]
        W = [0.0, p.sigma ** 2, p.c ** 2]
    elif tag is Analysis.INEXACT_OGD_REL:
        X3 = np.diag([0.0, -p.delta ** 2, 0.0, 1.0])
        B = np.array([-a, 1.0, -a])
        X = [_embed(_Y(m, L), 4), _diag_unit(4, 2), X3]
        W = [0.0, p.sigma ** 2, 0.0]
    elif tag is Analysis.VI_OGD:
        B = np.array([-a, 1.0, -a])
        X = [
            _embed(_M(m), 4),
            _diag_unit(4, 2),
            np.diag([0.0, -p.delta ** 2, 0.0, 1.0]),
            np.diag([-L * L, 1.0, 0.0, 0.0]),
        ]
        W = [0.0, p.sigma ** 2, p.c ** 2, 0.0]
    elif tag is Analysis.STOCH_OGD_IID:
        B = np.array([-a, 1.0, -a])
        X = [
            _embed(_Y(m, L), 4),
            _diag_unit(4, 2),
            _diag_unit(4, 3),
            _cross_unit(4, 0, 3),
            _cross_unit(4, 1, 3),
            _cross_unit(4, 2, 3),
        ]
        W = [0.0, p.sigma ** 2, p.c ** 2, 0.0, 0.0, 0.0]
    elif tag is Analysis.FINITE_SUM:
        B = np.array([-a, 1.0])
        X = [
            _embed(_M(m), 3),
            _diag_unit(3, 2),
            -_embed(x_tilde_matrix(kind.fn_class, m, L), 3),
        ]
        W = [0.0, p.sigma ** 2, 2.0 * p.G ** 2]
    elif tag is Analysis.IP_OGD:
        B = np.array([-a, -a, -a, -a, 1.0])
        X5 = np.zeros((6, 6))
        X5[0, 2] = X5[2, 0] = -1.0
        X5[1, 2] = X5[2, 1] = a
        X5[2, 2] = 2.0 * a
        X5[3, 2] = X5[2, 3] = a
        X5[4, 2] = X5[2, 4] = a
        X5[5, 2] = X5[2, 5] = -1.0
        X = [
            _embed(_Y(m, L), 6),
            _diag_unit(6, 5),
            _diag_unit(6, 4),
            _diag_unit(6, 3),
            X5,
        ]
        W = [0.0, p.sigma ** 2, p.c ** 2, 4.0 * p.Lg ** 2, 0.0]
    elif tag is Analysis.BIASED_SGD:
        B = np.array([-a, -a])
        X = [
            _embed(_M(m), 3),
            np.diag([0.0, -p.delta ** 2, 1.0]),
            np.diag([-2.0 * L * L, 1.0, 0.0]),
        ]
        W = [0.0, p.c ** 2, 2.0 * p.G ** 2]
    else:  # pragma: no cover
        raise ValueError(f"unknown analysis {tag}")
    return B, X, W


def lambda_weights(kind: AnalysisKind, p: StepParams) -> Tuple[float, ...]:
    """Energy weights Lambda_j paired with each multiplier."""
    return tuple(channel_data(kind, p)[2])


def build(kind: AnalysisKind, p: StepParams, cert: MultiplierCertificate) -> SymMat:
    """The LMI left-hand side at the given multipliers (NSD iff feasible)."""
    if cert.kind != kind:
        raise ValueError("certificate kind does not match analysis kind")
    sign_free = SIGN_FREE.get(kind.tag, frozenset())
    for j, lam in enumerate(cert.lambdas):
        if j not in sign_free and lam < 0:
            raise SignViolation(f"lambda_{j + 1} = {lam} must be >= 0")
    B, X, _ = channel_data(kind, p)
    dim = len(B) + 1
    M = np.zeros((dim, dim))
    M[0, 0] = 1.0 - cert.rho2
    M[0, 1:] = B
    M[1:, 0] = B
    M[1:, 1:] = np.outer(B, B)
    for lam, Xj in zip(cert.lambdas, X):
        M -= lam * Xj
    return SymMat(M)


def objective(kind: AnalysisKind, p: StepParams, cert: MultiplierCertificate,
              U: float) -> float:
    """The sequential-SDP objective rho^2 U + sum_j lambda_j Lambda_j."""
    W = lambda_weights(kind, p)
    return cert.rho2 * U + sum(lam * w for lam, w in zip(cert.lambdas, W))


def _ratio(num: float, den: float, what: str) -> float:
    """num/den for the optimal auxiliary ratios; 0/0 -> 0, x/0 -> error."""
    if num == 0.0:
        return 0.0
    if den == 0.0:
        raise DegenerateState(f"optimal {what} diverges (zero denominator)")
    return num / den


def _inv(r: float) -> float:
    """1/r with the divergent r -> 0 limit capped at BIG."""
    return 1.0 / r if r > 1.0 / BIG else BIG


def _tau_lam1(m: float, L: float, alpha: float, factor: float,
              stretch: float = 1.0) -> float:
    """The curvature multiplier lambda_1 = (alpha^2*stretch + tau*)/2 * factor.

    tau* = alpha|alpha(L+m)stretch - 2|/(L-m) is the minimizer of the
    scalar curvature objective; it degenerates as L -> m, where the
    multiplier diverges along a positive-semidefinite direction.
    """
    gap = L - m
    if gap <= 1e-12 * L:
        return BIG
    tau = alpha * abs(alpha * (L + m) * stretch - 2.0) / gap
    return 0.5 * (alpha * alpha * stretch + tau) * factor


def rho_hat_rel_branch(m: float, L: float, alpha: float, delta: float):
    """(rho_hat^2, zeta*, q* = delta^2/zeta*) for the relative-error step."""
    if delta == 0.0:
        f = mu(m, L, alpha)
        return f * f, 0.0, 0.0
    a_minus = (2.0 / (L + m) - delta / m) / (1.0 - delta)
    a_plus = (2.0 / (L + m) + delta / L) / (1.0 + delta)
    if alpha <= a_minus:
        zeta = _ratio(alpha * delta * m, 1.0 - m * alpha, "zeta")
        q = delta * (1.0 - m * alpha) / (alpha * m)
        r = 1.0 - alpha * m * (1.0 - delta)
        return r * r, zeta, q
    if alpha <= a_plus:
        s = 2.0 - alpha * (L + m)
        zeta = delta * delta * alpha * (L + m) / s
        q = s / (alpha * (L + m))
        rho2 = (1.0 - 2.0 * alpha * L * m / (L + m)
                + alpha * delta ** 2 * (L + m - 2.0 * alpha * L * m) / s)
        return rho2, zeta, q
    zeta = _ratio(alpha * delta * L, abs(alpha * L - 1.0), "zeta")
    q = delta * abs(alpha * L - 1.0) / (alpha * L)
    r = (1.0 + delta) * alpha * L - 1.0
    return r * r, zeta, q


def certificate(kind: AnalysisKind, p: StepParams, U: float) -> MultiplierCertificate:
    """Optimal multiplier tuple whose objective equals the closed-form step.

    Raises DegenerateState when an optimal auxiliary ratio diverges
    (e.g. U = 0 with sigma > 0); the closed-form recursion remains valid
    as a limit and callers should fall back to it.
    """
    if U < 0:
        raise ValueError("U must be >= 0")
    m, L, a = p.m, p.L, p.alpha
    tag = kind.tag
    rU = math.sqrt(U)

    if tag is Analysis.EXACT_OGD:
        f = mu(m, L, a)
        nu = _ratio(p.sigma, f * rU, "nu")
        rho2 = f * f * (1.0 + nu)
        lam1 = _tau_lam1(m, L, a, 1.0 + nu)
        return MultiplierCertificate(kind, rho2, (lam1, 1.0 + _inv(nu)))

    if tag is Analysis.INEXACT_OGD_ABS:
        f = mu(m, L, a)
        zeta = _ratio(a * p.c, f * rU, "zeta")
        nu = _ratio(p.sigma, f * rU + a * p.c, "nu")
        fac = (1.0 + nu) * (1.0 + zeta)
        rho2 = f * f * fac
        lam1 = _tau_lam1(m, L, a, fac)
        lam2 = 1.0 + _inv(nu)
        lam3 = min(a * a * (1.0 + nu) * (1.0 + _inv(zeta)), BIG)
        return MultiplierCertificate(kind, rho2, (lam1, lam2, lam3))

    if tag is Analysis.INEXACT_OGD_REL:
        rh2, zeta, q = rho_hat_rel_branch(m, L, a, p.delta)
        nu = _ratio(p.sigma, math.sqrt(rh2 * U), "nu")
        psi = (1.0 + zeta) * (1.0 + nu)
        gap = L - m
        if gap <= 1e-12 * L:
            lam1 = BIG
        else:
            tau = a * psi * abs(a * (L + m) * (1.0 + q) - 2.0) / gap
            lam1 = 0.5 * (a * a * psi * (1.0 + q) + tau)
        lam2 = 1.0 + _inv(nu)
        lam3 = min(a * a * (1.0 + nu) * (1.0 + _inv(zeta)), BIG)
        return MultiplierCertificate(kind, rh2 * (1.0 + nu), (lam1, lam2, lam3))

    if tag is Analysis.VI_OGD:
        base = 1.0 - 2.0 * m * a + a * a * L * L
        av = base * U
        bv = a * a * (p.c ** 2 + p.delta ** 2 * L * L * U)
        zeta = _ratio(math.sqrt(bv), math.sqrt(av), "zeta")
        q = _ratio(p.delta ** 2 * math.sqrt(av), math.sqrt(bv), "q") if p.delta else 0.0
        nu = _ratio(p.sigma, math.sqrt(av) + math.sqrt(bv), "nu")
        psi = (1.0 + zeta) * (1.0 + nu)
        rho2 = psi * (1.0 - 2.0 * a * m + a * a * L * L * (1.0 + q))
        lam1 = a * psi
        lam2 = 1.0 + _inv(nu)
        lam3 = min(a * a * (1.0 + nu) * (1.0 + _inv(zeta)), BIG)
        lam4 = a * a * psi * (1.0 + q)
        return MultiplierCertificate(kind, rho2, (lam1, lam2, lam3, lam4))

    if tag is Analysis.STOCH_OGD_IID:
        f = mu(m, L, a)
        nu = _ratio(p.sigma, f * rU, "nu")
        rho2 = f * f * (1.0 + nu)
        lam1 = _tau_lam1(m, L, a, 1.0 + nu)
        lam2 = 1.0 + _inv(nu)
        return MultiplierCertificate(
            kind, rho2, (lam1, lam2, a * a, -a, a * a, -a))

    if tag is Analysis.FINITE_SUM:
        xt = x_tilde_matrix(kind.fn_class, m, L)
        m_tilde = xt[0, 0] + 2.0 * m * xt[1, 0]
        rho_hat = 1.0 - 2.0 * a * m + m_tilde * a * a
        nu = _ratio(p.sigma, math.sqrt(rho_hat * U + 2.0 * a * a * p.G ** 2), "nu")
        lam1 = a * (1.0 + nu) * (1.0 - a * xt[1, 0])
        lam2 = 1.0 + _inv(nu)
        lam3 = a * a * (1.0 + nu)
        return MultiplierCertificate(kind, rho_hat * (1.0 + nu), (lam1, lam2, lam3))

    if tag is Analysis.IP_OGD:
        f = mu(m, L, a)
        X = f * rU
        ups = _ratio(2.0 * a * p.Lg, X, "upsilon")
        Yv = X + 2.0 * a * p.Lg
        zeta = _ratio(a * p.c, Yv, "zeta")
        nu = _ratio(p.sigma, Yv + a * p.c, "nu")
        phi = (1.0 + nu) * (1.0 + zeta) * (1.0 + ups)
        rho2 = phi * f * f
        lam1 = _tau_lam1(m, L, a, phi)
        lam2 = 1.0 + _inv(nu)
        lam3 = min((1.0 + nu) * a * a * (1.0 + _inv(zeta)), BIG)
        lam4 = min((1.0 + nu) * (1.0 + zeta) * a * a * (1.0 + _inv(ups)), BIG)
        return MultiplierCertificate(kind, rho2, (lam1, lam2, lam3, lam4, a))

    if tag is Analysis.BIASED_SGD:
        base = 1.0 - 2.0 * a * m + 2.0 * a * a * L * L
        av = base * U + 2.0 * a * a * p.G ** 2
        bv = a * a * (p.c ** 2 + 2.0 * p.delta ** 2 * p.G ** 2
                      + 2.0 * p.delta ** 2 * L * L * U)
        zeta = _ratio(math.sqrt(bv), math.sqrt(av), "zeta")
        q = _ratio(p.delta ** 2 * math.sqrt(av), math.sqrt(bv), "q") if p.delta else 0.0
        rho2 = (1.0 + zeta) * (1.0 - 2.0 * a * m + 2.0 * a * a * L * L * (1.0 + q))
        lam1 = a * (1.0 + zeta)
        lam3 = min(a * a * (1.0 + _inv(zeta)), BIG)
        lam4 = a * a * (1.0 + zeta) * (1.0 + q)
        return MultiplierCertificate(kind, rho2, (lam1, lam3, lam4))

    raise ValueError(f"unknown analysis {tag}")  # pragma: no cover
