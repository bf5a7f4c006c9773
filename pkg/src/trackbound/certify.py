"""Closed-form one-step bound recursions and horizon propagation.

Each analysis admits a closed-form solution of its per-step SDP; these
step functions implement those solutions directly, and ``run`` chains
them over a horizon into a ``BoundTrace``.  The same values are
reproduced independently by the numerical oracle and by the multiplier
certificates, which is what makes them trustworthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import (DegenerateFixedPoint, DeltaOutOfRange, NoContraction,
                     StepsizeOutOfRange, ValidateFailed)
from .lmi import rho_hat_rel_branch, x_tilde_matrix
from .schedule import (Analysis, AnalysisKind, FnClass, ParamTrack, StepParams,
                       ValidityReport, finite_sum_alpha_bar, mu, validate)
from .schedule import _check_step as _check_step_hypotheses


@dataclass(frozen=True)
class BoundTrace:
    """Certified squared tracking errors U[0..T] with per-step factors.

    ``factor[t]`` is the effective one-step contraction applied between
    U[t] and U[t+1] (mu, rho_hat, or the analysis-specific analog).
    ``steady_state`` is the limiting sqrt(U) under constant parameters,
    when the analysis has one in closed form.
    """

    kind: AnalysisKind
    U: Tuple[float, ...]
    factor: Tuple[float, ...]
    steady_state: Optional[float]
    validity: ValidityReport


def _sqrtU(U: float) -> float:
    return math.sqrt(max(U, 0.0))


def step_exact_ogd(U, m, L, alpha, sigma):
    """One exact-OGD step: U' = (mu*sqrt(U) + sigma)^2."""
    return (mu(m, L, alpha) * _sqrtU(U) + sigma) ** 2


def step_inexact_abs(U, m, L, alpha, sigma, c):
    """Absolute-error step: U' = (mu*sqrt(U) + sigma + alpha*c)^2."""
    return (mu(m, L, alpha) * _sqrtU(U) + sigma + alpha * c) ** 2


def rho_hat_rel(m, L, alpha, delta):
    """Piecewise contraction factor of the relative-error analysis.

    Linear in alpha below alpha_- and above alpha_+, with a square-root
    bridge in between; reduces to mu when delta = 0.
    """
    if not 0.0 <= delta < 2.0 * m / (L + m):
        raise DeltaOutOfRange(f"need 0 <= delta < 2m/(L+m), got {delta}")
    if not 0.0 < alpha <= 2.0 / ((1.0 + delta) * L):
        raise StepsizeOutOfRange(f"need 0 < alpha <= 2/((1+delta)L), got {alpha}")
    rho2, _, _ = rho_hat_rel_branch(m, L, alpha, delta)
    return math.sqrt(max(rho2, 0.0))


def step_inexact_rel(U, m, L, alpha, sigma, delta):
    """Relative-error step: U' = (rho_hat*sqrt(U) + sigma)^2."""
    return (rho_hat_rel(m, L, alpha, delta) * _sqrtU(U) + sigma) ** 2


def step_vi(U, m, L, alpha, sigma, delta, c):
    """Strongly-monotone variational-inequality step."""
    if delta > m / L:
        raise DeltaOutOfRange(f"need delta <= m/L, got {delta}")
    if alpha > 2.0 * (m - delta * L) / (L * L * (1.0 - delta ** 2)):
        raise StepsizeOutOfRange("alpha above the VI stepsize cap")
    U = max(U, 0.0)
    a = (1.0 - 2.0 * m * alpha + alpha * alpha * L * L) * U
    b = c * c + delta * delta * L * L * U
    return (math.sqrt(a) + alpha * math.sqrt(b) + sigma) ** 2


def step_stoch_iid(U, m, L, alpha, sigma, c):
    """IID-noise stochastic step: U' = (mu*sqrt(U) + sigma)^2 + alpha^2 c^2."""
    return (mu(m, L, alpha) * _sqrtU(U) + sigma) ** 2 + alpha * alpha * c * c


def stoch_fixed_point(m, L, alpha, sigma, c):
    """Fixed point U* of the IID-noise recursion under constant parameters."""
    f = mu(m, L, alpha)
    if f >= 1.0:
        raise NoContraction(f"mu = {f} >= 1")
    one = 1.0 - f * f
    root = (f * sigma + math.sqrt(sigma * sigma + alpha * alpha * c * c * one)) / one
    return root * root


def stoch_alt_bound(U0, t, m, L, alpha, sigma, c):
    """Geometric envelope U0*(mu + sigma/sqrt(U*))^t + U* for the IID recursion.

    The decay factor satisfies (mu + sigma/sqrt(U*))^2 = 1 - alpha^2 c^2/U*,
    which is asserted here as a consistency check.
    """
    f = mu(m, L, alpha)
    Ustar = stoch_fixed_point(m, L, alpha, sigma, c)
    if Ustar == 0.0:
        raise DegenerateFixedPoint("fixed point is zero; envelope undefined")
    rate = f + sigma / math.sqrt(Ustar)
    ident = 1.0 - alpha * alpha * c * c / Ustar
    assert abs(rate * rate - ident) <= 1e-10 * max(1.0, abs(ident))
    return rate ** (2 * t) * U0 + Ustar


def x_tilde(fn_class: FnClass, m, L):
    """Gradient-dispersion supply matrix for the finite-sum analysis."""
    if not (0 < m <= L):
        from .errors import BadModuli
        raise BadModuli(f"need 0 < m <= L, got m={m}, L={L}")
    return x_tilde_matrix(fn_class, m, L)


def _finite_sum_rho_hat(fn_class, m, L, alpha):
    xt = x_tilde_matrix(fn_class, m, L)
    m_tilde = xt[0, 0] + 2.0 * m * xt[1, 0]
    return 1.0 - 2.0 * alpha * m + m_tilde * alpha * alpha


def step_finite_sum(U, fn_class, m, L, alpha, sigma, G):
    """Finite-sum stochastic step: U' = (sqrt(rho_hat*U + 2 a^2 G^2) + sigma)^2."""
    if alpha > finite_sum_alpha_bar(fn_class, m, L):
        raise StepsizeOutOfRange("alpha above the finite-sum stepsize cap")
    rho_hat = _finite_sum_rho_hat(fn_class, m, L, alpha)
    return (math.sqrt(rho_hat * max(U, 0.0) + 2.0 * alpha * alpha * G * G)
            + sigma) ** 2


def step_ipogd(U, m, L, alpha, sigma, c, Lg):
    """Proximal step: U' = (mu*sqrt(U) + sigma + alpha*c + 2*alpha*Lg)^2."""
    return (mu(m, L, alpha) * _sqrtU(U) + sigma + alpha * c
            + 2.0 * alpha * Lg) ** 2


def step_biased_sgd(U, m, L, alpha, delta, c, G):
    """Biased stochastic gradient step (relative bias + dispersion)."""
    U = max(U, 0.0)
    base = 1.0 - 2.0 * alpha * m + 2.0 * alpha * alpha * L * L
    if base < 0.0:
        raise StepsizeOutOfRange("1 - 2*alpha*m + 2*alpha^2*L^2 < 0")
    a = base * U + 2.0 * alpha * alpha * G * G
    b = c * c + 2.0 * delta * delta * G * G + 2.0 * delta * delta * L * L * U
    return (alpha * math.sqrt(b) + math.sqrt(a)) ** 2


def step(kind: AnalysisKind, U: float, p: StepParams) -> float:
    """Dispatch one closed-form bound step for the given analysis."""
    if (p.sigma == 0.0 and p.c == 0.0 and p.G == 0.0 and p.delta == 0.0
            and p.Lg == 0.0):
        # every perturbation budget vanishes, so the recursion is exactly
        # linear; skip the sqrt/square round trip to keep it that way
        reason = _check_step_hypotheses(kind, p)
        if reason is not None:
            exc = DeltaOutOfRange if "delta" in reason else StepsizeOutOfRange
            raise exc(reason)
        f = contraction_factor(kind, p)
        return f * f * max(U, 0.0)
    tag = kind.tag
    if tag is Analysis.EXACT_OGD:
        return step_exact_ogd(U, p.m, p.L, p.alpha, p.sigma)
    if tag is Analysis.INEXACT_OGD_ABS:
        return step_inexact_abs(U, p.m, p.L, p.alpha, p.sigma, p.c)
    if tag is Analysis.INEXACT_OGD_REL:
        return step_inexact_rel(U, p.m, p.L, p.alpha, p.sigma, p.delta)
    if tag is Analysis.VI_OGD:
        return step_vi(U, p.m, p.L, p.alpha, p.sigma, p.delta, p.c)
    if tag is Analysis.STOCH_OGD_IID:
        return step_stoch_iid(U, p.m, p.L, p.alpha, p.sigma, p.c)
    if tag is Analysis.FINITE_SUM:
        return step_finite_sum(U, kind.fn_class, p.m, p.L, p.alpha, p.sigma, p.G)
    if tag is Analysis.IP_OGD:
        return step_ipogd(U, p.m, p.L, p.alpha, p.sigma, p.c, p.Lg)
    if tag is Analysis.BIASED_SGD:
        return step_biased_sgd(U, p.m, p.L, p.alpha, p.delta, p.c, p.G)
    raise ValueError(f"unknown analysis {tag}")  # pragma: no cover


def contraction_factor(kind: AnalysisKind, p: StepParams) -> float:
    """Per-step sqrt-contraction applied to sqrt(U) by the analysis."""
    tag = kind.tag
    if tag in (Analysis.EXACT_OGD, Analysis.INEXACT_OGD_ABS,
               Analysis.STOCH_OGD_IID, Analysis.IP_OGD):
        return mu(p.m, p.L, p.alpha)
    if tag is Analysis.INEXACT_OGD_REL:
        return rho_hat_rel(p.m, p.L, p.alpha, p.delta)
    if tag is Analysis.VI_OGD:
        return math.sqrt(1.0 - 2.0 * p.m * p.alpha + p.alpha ** 2 * p.L ** 2)
    if tag is Analysis.FINITE_SUM:
        rh = _finite_sum_rho_hat(kind.fn_class, p.m, p.L, p.alpha)
        return math.sqrt(max(rh, 0.0))
    # biased SGD
    return math.sqrt(max(1.0 - 2.0 * p.alpha * p.m
                         + 2.0 * p.alpha ** 2 * p.L ** 2, 0.0))


def _steady_state(kind: AnalysisKind, p: StepParams) -> Optional[float]:
    """Limiting sqrt(U) under constant parameters, where it exists in
    closed form: the fixed point of sqrt(U') = gamma*sqrt(U) + u."""
    tag = kind.tag
    gamma = contraction_factor(kind, p)
    if gamma >= 1.0:
        return None
    a = p.alpha
    if tag is Analysis.EXACT_OGD:
        u = p.sigma
    elif tag is Analysis.INEXACT_OGD_ABS:
        u = p.sigma + a * p.c
    elif tag is Analysis.INEXACT_OGD_REL:
        u = p.sigma
    elif tag is Analysis.VI_OGD:
        # the one-step map is not of the linear gamma/u form; use the
        # relaxed linearization (valid upper bound on the fixed point)
        gamma = gamma + a * p.L * p.delta
        if gamma >= 1.0:
            return None
        u = a * p.c + p.sigma
    elif tag is Analysis.STOCH_OGD_IID:
        return math.sqrt(stoch_fixed_point(p.m, p.L, a, p.sigma, p.c))
    elif tag is Analysis.FINITE_SUM:
        u = math.sqrt(2.0) * a * p.G + p.sigma
    elif tag is Analysis.IP_OGD:
        u = p.sigma + a * p.c + 2.0 * a * p.Lg
    else:  # biased SGD
        gamma = gamma + math.sqrt(2.0) * a * p.delta * p.L
        if gamma >= 1.0:
            return None
        u = a * math.sqrt(p.c ** 2 + 2.0 * p.delta ** 2 * p.G ** 2) \
            + math.sqrt(2.0) * a * p.G
    return u / (1.0 - gamma)


def run(kind: AnalysisKind, track: ParamTrack) -> BoundTrace:
    """Propagate the certified bound over the whole horizon."""
    report = validate(kind, track)
    if not report:
        bad = next(t for t, r in enumerate(report.reasons) if r is not None)
        raise ValidateFailed(
            f"{kind} hypotheses fail at t={bad}: {report.reasons[bad]}")
    U = [float(track.U0)]
    factors = []
    for t in range(track.horizon):
        p = track.at(t)
        factors.append(contraction_factor(kind, p))
        U.append(step(kind, U[-1], p))
    steady = None
    if track.is_constant():
        steady = _steady_state(kind, track.at(0))
    return BoundTrace(kind=kind, U=tuple(U), factor=tuple(factors),
                      steady_state=steady, validity=report)
