"""Dynamic-regret bounds derived from certified tracking-error traces.

The core inequality converts a geometric tracking bound
sqrt(U_{t+1}) <= gamma*sqrt(U_t) + u_t into a cumulative suboptimality
bound; per-analysis specializations supply gamma and u_t.  Both the
Cauchy-Schwarz split form (separate drift and error sums) and the
unsplit form are computed — the unsplit form is never worse — and the
reported bound is their minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .certify import contraction_factor, rho_hat_rel, _finite_sum_rho_hat
from .errors import NoContraction, NonConstantSchedule
from .schedule import Analysis, AnalysisKind, ParamTrack, mu
from .simulate import Trajectory


@dataclass(frozen=True)
class RegretReport:
    """Dynamic-regret upper bound with its ingredients.

    ``bound`` is min(split, unsplit); ``composite`` marks the proximal
    analysis whose bound carries extra linear terms from the nonsmooth
    part; ``in_expectation`` marks stochastic analyses whose bound only
    dominates trial means.
    """

    horizon: int
    gamma: float
    u: Tuple[float, ...]
    bound: float
    bound_split: float
    bound_unsplit: float
    composite: bool = False
    in_expectation: bool = False
    empirical: Optional[float] = None


def regret_bound(U0: float, L: float, gamma: float,
                 u: Sequence[float]) -> float:
    """Cumulative suboptimality bound L/(1-gamma)^2 * (U0 + (sum u)^2)."""
    if not 0.0 <= gamma < 1.0:
        raise NoContraction(f"need 0 <= gamma < 1, got {gamma}")
    if L <= 0:
        raise ValueError("L must be > 0")
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("u must be >= 0")
    s = float(u.sum())
    den = (1.0 - gamma) ** 2
    return L / den * U0 + L / den * s * s


def _require_constant(track: ParamTrack, names: Iterable[str]):
    for name in names:
        vals = {getattr(track.at(t), name) for t in range(max(track.horizon, 1))}
        if len(vals) > 1:
            raise NonConstantSchedule(
                f"regret specialization requires constant '{name}'")


def regret_bound_for(kind: AnalysisKind, track: ParamTrack) -> RegretReport:
    """Per-analysis dynamic-regret bound from the schedule.

    Supported analyses: exact/absolute/relative-error gradient descent,
    IID-noise stochastic descent, finite-sum stochastic descent, and the
    proximal method (with its extra linear terms).
    """
    tag = kind.tag
    T = track.horizon
    p = track.at(0)
    a, L = p.alpha, p.L
    sigmas = np.array([track.at(t).sigma for t in range(max(T, 1))])[:T]
    cs = np.array([track.at(t).c for t in range(max(T, 1))])[:T]
    Gs = np.array([track.at(t).G for t in range(max(T, 1))])[:T]
    composite = False
    in_expectation = False

    if tag in (Analysis.EXACT_OGD, Analysis.INEXACT_OGD_ABS,
               Analysis.STOCH_OGD_IID):
        _require_constant(track, ("m", "L", "alpha"))
        gamma = mu(p.m, p.L, a)
        if tag is Analysis.EXACT_OGD:
            cs = np.zeros_like(cs)
        in_expectation = tag is Analysis.STOCH_OGD_IID
        u = gamma_u = sigmas + a * cs
        split_tail = (2.0 * L * float(sigmas.sum()) ** 2
                      + 2.0 * L * a * a * float(cs.sum()) ** 2)
    elif tag is Analysis.INEXACT_OGD_REL:
        _require_constant(track, ("m", "L", "alpha", "delta"))
        gamma = rho_hat_rel(p.m, p.L, a, p.delta)
        u = sigmas.copy()
        split_tail = 2.0 * L * float(sigmas.sum()) ** 2
    elif tag is Analysis.FINITE_SUM:
        _require_constant(track, ("m", "L", "alpha"))
        gamma = math.sqrt(max(_finite_sum_rho_hat(kind.fn_class, p.m, p.L, a),
                              0.0))
        u = math.sqrt(2.0) * a * Gs + sigmas
        split_tail = (2.0 * L * float(sigmas.sum()) ** 2
                      + 4.0 * L * a * a * float(Gs.sum()) ** 2)
        in_expectation = True
    elif tag is Analysis.IP_OGD:
        _require_constant(track, ("m", "L", "alpha"))
        gamma = mu(p.m, p.L, a)
        u = sigmas + a * cs + 2.0 * a * p.Lg
        split_tail = None  # no split form for the composite bullet
        composite = True
    else:
        raise ValueError(f"no dynamic-regret specialization for {tag}")

    if gamma >= 1.0:
        raise NoContraction(f"contraction factor {gamma} >= 1")
    den = (1.0 - gamma) ** 2
    head = L / den * track.U0
    total_u = float(np.asarray(u).sum())
    unsplit = head + L / den * total_u ** 2
    split = head + split_tail / den if split_tail is not None else unsplit
    extra = 0.0
    if composite:
        extra = (2.0 * p.Lg * math.sqrt(track.U0) / (1.0 - gamma)
                 + 2.0 * p.Lg / (1.0 - gamma) * total_u)
        unsplit += extra
        split += extra
    return RegretReport(horizon=T, gamma=gamma, u=tuple(float(x) for x in u),
                        bound=min(split, unsplit), bound_split=split,
                        bound_unsplit=unsplit, composite=composite,
                        in_expectation=in_expectation)


def empirical_regret(traj: Union[Trajectory, Sequence[Trajectory]]) -> float:
    """Sum of recorded per-round suboptimality gaps (trial mean if several
    trajectories are given)."""
    if isinstance(traj, Trajectory):
        return float(np.sum(traj.gaps))
    totals = [float(np.sum(t.gaps)) for t in traj]
    if not totals:
        raise ValueError("need at least one trajectory")
    return float(np.mean(totals))
