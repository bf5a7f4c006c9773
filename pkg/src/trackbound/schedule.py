"""Problem/algorithm parameter model and per-analysis hypothesis checking.

A ``ParamTrack`` stores the per-step data (moduli, stepsizes, drift and
error budgets) for a horizon of T steps.  Constant schedules may be given
as scalars and are broadcast.  ``validate`` checks the stepsize/error
hypotheses of the analysis being run and reports the first violation per
step instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

from .errors import BadModuli, StepsizeOutOfRange

ScheduleField = Union[float, Sequence[float]]


class Analysis(Enum):
    EXACT_OGD = "exact_ogd"
    INEXACT_OGD_ABS = "inexact_ogd_abs"
    INEXACT_OGD_REL = "inexact_ogd_rel"
    VI_OGD = "vi_ogd"
    STOCH_OGD_IID = "stoch_ogd_iid"
    FINITE_SUM = "finite_sum"
    IP_OGD = "ip_ogd"
    BIASED_SGD = "biased_sgd"


class FnClass(Enum):
    SMOOTH = "smooth"
    SMOOTH_CONVEX = "smooth_convex"
    STRONGLY_CONVEX_SMOOTH = "strongly_convex_smooth"


@dataclass(frozen=True)
class AnalysisKind:
    """Which certified analysis is being run.

    ``fn_class`` must be present exactly when ``tag`` is FINITE_SUM.
    """

    tag: Analysis
    fn_class: Optional[FnClass] = None

    def __post_init__(self):
        if (self.tag is Analysis.FINITE_SUM) != (self.fn_class is not None):
            raise ValueError("fn_class is required iff tag is FINITE_SUM")

    @classmethod
    def parse(cls, name: str) -> "AnalysisKind":
        """Parse strings like ``"inexact_ogd_abs"`` or ``"finite_sum:smooth"``."""
        if ":" in name:
            tag, fc = name.split(":", 1)
            return cls(Analysis(tag), FnClass(fc))
        return cls(Analysis(name))

    def __str__(self):
        if self.fn_class is not None:
            return f"{self.tag.value}:{self.fn_class.value}"
        return self.tag.value


@dataclass(frozen=True)
class StepParams:
    """Parameters of a single step, after broadcasting."""

    m: float
    L: float
    alpha: float
    sigma: float = 0.0
    c: float = 0.0
    delta: float = 0.0
    G: float = 0.0
    Lg: float = 0.0


def _as_tuple(x: ScheduleField) -> tuple:
    if isinstance(x, (int, float)):
        return (float(x),)
    return tuple(float(v) for v in x)


@dataclass(frozen=True)
class ParamTrack:
    """Per-step problem/algorithm parameters over a horizon of T steps.

    Each schedule field is either a scalar (constant schedule) or a
    sequence of length T.  ``U0`` is the initial squared tracking error.
    """

    horizon: int
    m: ScheduleField
    L: ScheduleField
    alpha: ScheduleField
    sigma: ScheduleField = 0.0
    c: ScheduleField = 0.0
    delta: ScheduleField = 0.0
    G: ScheduleField = 0.0
    Lg: float = 0.0
    U0: float = 0.0
    _seqs: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        seqs = {}
        for name in ("m", "L", "alpha", "sigma", "c", "delta", "G"):
            vals = _as_tuple(getattr(self, name))
            if len(vals) not in (1, max(self.horizon, 1)):
                raise ValueError(
                    f"schedule '{name}' has length {len(vals)}, expected 1 or {self.horizon}"
                )
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"schedule '{name}' has non-finite entries")
            seqs[name] = vals
        if not (math.isfinite(self.Lg) and self.Lg >= 0):
            raise ValueError("Lg must be finite and >= 0")
        if not (math.isfinite(self.U0) and self.U0 >= 0):
            raise ValueError("U0 must be finite and >= 0")
        for name in ("sigma", "c", "delta", "G"):
            if any(v < 0 for v in seqs[name]):
                raise ValueError(f"schedule '{name}' must be >= 0")
        for mv, Lv in zip(self._broadcast(seqs["m"]), self._broadcast(seqs["L"])):
            if not (0 < mv <= Lv):
                raise BadModuli(f"need 0 < m <= L, got m={mv}, L={Lv}")
        if any(a <= 0 for a in seqs["alpha"]):
            raise StepsizeOutOfRange("alpha must be > 0")
        object.__setattr__(self, "_seqs", seqs)

    def _broadcast(self, vals: tuple) -> tuple:
        n = max(self.horizon, 1)
        return vals * n if len(vals) == 1 else vals

    def at(self, t: int) -> StepParams:
        if not 0 <= t < max(self.horizon, 1):
            raise IndexError(f"step {t} outside horizon {self.horizon}")
        pick = lambda name: self._seqs[name][t if len(self._seqs[name]) > 1 else 0]
        return StepParams(
            m=pick("m"), L=pick("L"), alpha=pick("alpha"), sigma=pick("sigma"),
            c=pick("c"), delta=pick("delta"), G=pick("G"), Lg=self.Lg,
        )

    def is_constant(self) -> bool:
        return all(len(set(v)) == 1 for v in self._seqs.values())


def mu(m: float, L: float, alpha: float) -> float:
    """Contraction factor of a gradient step on the sector class.

    Equals 1 - m*alpha on the small-stepsize branch (alpha <= 2/(m+L))
    and alpha*L - 1 above it; both branches meet at (L-m)/(L+m).
    """
    if not (0 < m <= L):
        raise BadModuli(f"need 0 < m <= L, got m={m}, L={L}")
    if not (0 < alpha <= 2.0 / L):
        raise StepsizeOutOfRange(f"need 0 < alpha <= 2/L, got alpha={alpha}")
    if alpha <= 2.0 / (m + L):
        return 1.0 - m * alpha
    return alpha * L - 1.0


def finite_sum_alpha_bar(fn_class: FnClass, m: float, L: float) -> float:
    """Stepsize cap for the finite-sum stochastic analysis, per component class."""
    if not (0 < m <= L):
        raise BadModuli(f"need 0 < m <= L, got m={m}, L={L}")
    if fn_class is FnClass.SMOOTH:
        return m / (L * L)
    if fn_class is FnClass.SMOOTH_CONVEX:
        return 1.0 / L
    return 1.0 / (L + m)


@dataclass(frozen=True)
class ValidityReport:
    """Per-step hypothesis check results; ``reasons[t]`` is None on pass."""

    kind: AnalysisKind
    reasons: tuple
    passed: bool

    def __bool__(self):
        return self.passed


def _check_step(kind: AnalysisKind, p: StepParams) -> Optional[str]:
    """First violated hypothesis of the analysis at this step, or None."""
    tag = kind.tag
    if p.alpha <= 0:
        return "alpha <= 0"
    if tag in (Analysis.EXACT_OGD, Analysis.INEXACT_OGD_ABS,
               Analysis.STOCH_OGD_IID, Analysis.IP_OGD):
        if p.alpha > 2.0 / p.L:
            return "alpha > 2/L"
    elif tag is Analysis.INEXACT_OGD_REL:
        if p.delta >= 2.0 * p.m / (p.L + p.m):
            return "delta >= 2m/(L+m)"
        if p.alpha > 2.0 / ((1.0 + p.delta) * p.L):
            return "alpha > 2/((1+delta)L)"
    elif tag is Analysis.VI_OGD:
        if p.delta > p.m / p.L:
            return "delta > m/L"
        if p.alpha > 2.0 * (p.m - p.delta * p.L) / (p.L * p.L * (1.0 - p.delta ** 2)):
            return "alpha > 2(m-delta L)/(L^2(1-delta^2))"
    elif tag is Analysis.FINITE_SUM:
        if p.alpha > finite_sum_alpha_bar(kind.fn_class, p.m, p.L):
            return "alpha > alpha_bar"
    elif tag is Analysis.BIASED_SGD:
        # 1 - 2am + 2a^2 L^2 >= 0 holds automatically for m <= L; only
        # positivity of alpha is a hypothesis here.
        pass
    return None


def validate(kind: AnalysisKind, track: ParamTrack) -> ValidityReport:
    """Check the chosen analysis's hypotheses at every step; never raises."""
    reasons = tuple(
        _check_step(kind, track.at(t)) for t in range(max(track.horizon, 1))
    )
    return ValidityReport(kind=kind, reasons=reasons,
                          passed=all(r is None for r in reasons))
