"""Synthetic instances and algorithm runs for validating certified bounds.

Generators produce time-varying problems whose minimizer drift and
error-injection magnitudes exactly exhaust the budgets that the bound
recursions assume, so simulated errors probe the bounds at their edge;
``check_soundness`` then verifies that measured errors never exceed the
certified trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .certify import BoundTrace
from .errors import BadModuli, HorizonMismatch, ProxUnavailable
from .schedule import ParamTrack, StepParams

# slack for the deterministic soundness comparison e_t <= U_t
DET_SLACK = 1e-9


def rng_for(seed: int, trial: int = 0) -> np.random.Generator:
    """Counter-based per-trial generator; trials are independent streams."""
    return np.random.Generator(
        np.random.Philox(key=np.uint64(seed) ^ np.uint64(trial)))


def _unit(v: np.ndarray) -> np.ndarray:
    """Normalize, falling back to the first basis vector at zero."""
    n = float(np.linalg.norm(v))
    if n == 0.0:
        out = np.zeros_like(v)
        out[0] = 1.0
        return out
    return v / n


def soft_threshold(v, thr):
    """Proximal operator of thr*|.| applied entrywise."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - thr, 0.0)


class Drift(Enum):
    """How the minimizer moves between rounds (always by exactly sigma_t)."""

    ALIGNED_AWAY = "aligned_away"      # directly away from the next iterate
    FIXED_DIRECTION = "fixed_direction"
    RANDOM_UNIT = "random_unit"


def random_spd_matrix(dim: int, m: float, L: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Random symmetric matrix with spectrum in [m, L], endpoints attained."""
    eigs = rng.uniform(m, L, size=dim)
    eigs[0] = L
    if dim > 1:
        eigs[-1] = m
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    H = (Q * eigs) @ Q.T
    return 0.5 * (H + H.T)


@dataclass(frozen=True)
class DriftingQuadratic:
    """Time-varying quadratic ``f_t(x) = 1/2 (x-x*_t)' H (x-x*_t)``.

    The curvature is fixed; only the minimizer drifts, by exactly sigma_t
    per round under every drift policy.
    """

    H: np.ndarray
    m: float
    L: float
    drift: Drift = Drift.ALIGNED_AWAY
    direction: Optional[np.ndarray] = None  # for FIXED_DIRECTION

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        object.__setattr__(self, "H", 0.5 * (H + H.T))
        w = np.linalg.eigvalsh(self.H)
        tol = 1e-9 * max(1.0, self.L)
        if w[0] < self.m - tol or w[-1] > self.L + tol:
            raise BadModuli(
                f"curvature spectrum [{w[0]}, {w[-1]}] outside [{self.m}, {self.L}]")
        if self.direction is not None:
            object.__setattr__(self, "direction",
                               _unit(np.asarray(self.direction, dtype=float)))

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def grad(self, x, x_star):
        return self.H @ (x - x_star)

    def gap(self, x, x_star):
        d = x - x_star
        return 0.5 * float(d @ self.H @ d)


@dataclass(frozen=True)
class MonotoneField:
    """Rotation operator ``F_t(x) = A (x - x*_t)`` with ``A = m I + b S``.

    S is the block-diagonal 2x2 skew rotation, so the field is m-strongly
    monotone and Lipschitz with constant sqrt(m^2 + b^2) but is not a
    gradient unless b = 0.
    """

    m: float
    b: float
    blocks: int
    drift: Drift = Drift.ALIGNED_AWAY
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.m <= 0 or self.blocks < 1:
            raise BadModuli(f"need m > 0 and blocks >= 1, got {self.m}, {self.blocks}")
        if self.direction is not None:
            object.__setattr__(self, "direction",
                               _unit(np.asarray(self.direction, dtype=float)))

    @property
    def dim(self) -> int:
        return 2 * self.blocks

    @property
    def L(self) -> float:
        return math.hypot(self.m, self.b)

    def operator(self) -> np.ndarray:
        A = self.m * np.eye(self.dim)
        for k in range(self.blocks):
            A[2 * k, 2 * k + 1] += self.b
            A[2 * k + 1, 2 * k] -= self.b
        return A

    def __call__(self, x, x_star):
        return self.operator() @ (x - x_star)


@dataclass(frozen=True)
class FiniteSumQuadratic:
    """``f_t = (1/n) sum_i 1/2 (x - a_i)' H (x - a_i)`` with drifting anchors.

    The full minimizer is the anchor mean; the gradient-dispersion level
    G = sqrt((1/n) sum_i ||grad f^(i)(x*)||^2) is drift-invariant because
    all anchors move together.
    """

    H: np.ndarray
    anchors: np.ndarray  # (n, p)
    m: float
    L: float
    drift: Drift = Drift.RANDOM_UNIT
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        H = 0.5 * (np.asarray(self.H, dtype=float)
                   + np.asarray(self.H, dtype=float).T)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "anchors",
                           np.atleast_2d(np.asarray(self.anchors, dtype=float)))
        w = np.linalg.eigvalsh(H)
        tol = 1e-9 * max(1.0, self.L)
        if w[0] < self.m - tol or w[-1] > self.L + tol:
            raise BadModuli(
                f"curvature spectrum [{w[0]}, {w[-1]}] outside [{self.m}, {self.L}]")
        if self.direction is not None:
            object.__setattr__(self, "direction",
                               _unit(np.asarray(self.direction, dtype=float)))

    @property
    def n(self) -> int:
        return self.anchors.shape[0]

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    def minimizer(self, anchors) -> np.ndarray:
        return anchors.mean(axis=0)

    def dispersion(self, anchors) -> float:
        xs = self.minimizer(anchors)
        g = (xs - anchors) @ self.H
        return math.sqrt(float(np.mean(np.sum(g * g, axis=1))))

    def gap(self, x, anchors):
        d = x - self.minimizer(anchors)
        return 0.5 * float(d @ self.H @ d)


@dataclass(frozen=True)
class DiagonalComposite:
    """Diagonal quadratic plus an l1 penalty: the proximal test problem.

    ``f_t(x) = 1/2 sum_j h_j (x_j - b_{t,j})^2`` and ``g(x) = lam1 |x|_1``,
    so the composite minimizer is the coordinatewise soft-threshold of the
    drifting target b_t, and g has Lipschitz constant lam1*sqrt(p).
    """

    h: np.ndarray       # positive diagonal curvatures in [m, L]
    lam1: float
    m: float
    L: float
    drift: Drift = Drift.RANDOM_UNIT
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        object.__setattr__(self, "h", h)
        tol = 1e-9 * max(1.0, self.L)
        if h.min() < self.m - tol or h.max() > self.L + tol:
            raise BadModuli("diagonal curvatures outside [m, L]")
        if self.lam1 < 0:
            raise ProxUnavailable("l1 weight must be >= 0")
        if self.direction is not None:
            object.__setattr__(self, "direction",
                               _unit(np.asarray(self.direction, dtype=float)))

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    @property
    def Lg(self) -> float:
        return self.lam1 * math.sqrt(self.dim)

    def minimizer(self, b) -> np.ndarray:
        return soft_threshold(b, self.lam1 / self.h)

    def gap(self, x, b):
        xs = self.minimizer(b)
        return (0.5 * float(self.h @ (x - b) ** 2) + self.lam1 * float(np.abs(x).sum())
                - 0.5 * float(self.h @ (xs - b) ** 2)
                - self.lam1 * float(np.abs(xs).sum()))


class ErrorPolicy:
    """Marker base class for gradient-error injection policies."""


@dataclass(frozen=True)
class NoError(ErrorPolicy):
    pass


@dataclass(frozen=True)
class AbsoluteWorstCase(ErrorPolicy):
    """Norm-c_t error aimed to push the update away from the next minimizer."""


@dataclass(frozen=True)
class RelativeWorstCase(ErrorPolicy):
    """delta_t-relative error, worst of the three canonical candidates."""


@dataclass(frozen=True)
class IidGaussian(ErrorPolicy):
    """Zero-mean Gaussian error with total variance c_t^2."""


def _drift_to(x_star, sigma, drift, direction, x_tentative, rng):
    """Advance the minimizer by exactly sigma along the policy direction."""
    if sigma == 0.0:
        return x_star
    if drift is Drift.ALIGNED_AWAY:
        d = _unit(x_star - x_tentative)
    elif drift is Drift.FIXED_DIRECTION:
        if direction is None:
            raise ValueError("FIXED_DIRECTION drift requires a direction")
        d = direction
    else:
        d = _unit(rng.normal(size=x_star.shape))
    return x_star + sigma * d


def _error_vector(policy, grad, x, x_step_exact, x_star_next, p: StepParams,
                  rng) -> np.ndarray:
    """Injected gradient error v_t for the given policy and step data."""
    if isinstance(policy, NoError):
        return np.zeros_like(grad)
    if isinstance(policy, AbsoluteWorstCase):
        if p.c == 0.0:
            return np.zeros_like(grad)
        # the update subtracts alpha*v, so aiming v at the minimizer
        # pushes the iterate exactly away from it
        return -p.c * _unit(x_step_exact - x_star_next)
    if isinstance(policy, RelativeWorstCase):
        gn = float(np.linalg.norm(grad))
        if p.delta == 0.0 or gn == 0.0:
            return np.zeros_like(grad)
        cands = [-p.delta * grad, p.delta * grad]
        if grad.shape[0] > 1:
            ghat = grad / gn
            t = np.zeros_like(grad)
            t[0] = 1.0
            t = t - float(t @ ghat) * ghat
            if np.linalg.norm(t) < 1e-12:
                t = np.zeros_like(grad)
                t[1] = 1.0
                t = t - float(t @ ghat) * ghat
            t = _unit(t)
            cands.extend([p.delta * gn * t, -p.delta * gn * t])
        best, best_d = None, -1.0
        for v in cands:
            d = float(np.linalg.norm(x - p.alpha * (grad + v) - x_star_next))
            if d > best_d:
                best, best_d = v, d
        return best
    if isinstance(policy, IidGaussian):
        if p.c == 0.0:
            return np.zeros_like(grad)
        return rng.normal(0.0, p.c / math.sqrt(grad.shape[0]),
                          size=grad.shape)
    raise TypeError(f"unknown error policy {policy!r}")


@dataclass(frozen=True)
class Trajectory:
    """One simulated run: iterates, minimizers, errors, and function gaps."""

    x: np.ndarray        # (T+1, p)
    x_star: np.ndarray   # (T+1, p)
    e: np.ndarray        # (T+1,) squared tracking errors
    gaps: np.ndarray     # (T+1,) function (or composite) suboptimality
    seed: int

    def __post_init__(self):
        if not (len(self.x) == len(self.x_star) == len(self.e)
                == len(self.gaps)):
            raise HorizonMismatch("trajectory arrays must share one horizon")


def run_inexact_ogd(problem: DriftingQuadratic, track: ParamTrack,
                    policy: ErrorPolicy = NoError(), x0=None, x_star0=None,
                    seed: int = 0, trial: int = 0) -> Trajectory:
    """Gradient descent on a drifting quadratic with injected errors."""
    rng = rng_for(seed, trial)
    p0 = track.at(0)
    x_star = (np.zeros(problem.dim) if x_star0 is None
              else np.asarray(x_star0, dtype=float))
    x = (x_star + math.sqrt(track.U0) * _unit(np.ones(problem.dim))
         if x0 is None else np.asarray(x0, dtype=float))
    xs_hist, x_hist, e_hist, gap_hist = [x_star], [x], \
        [float(np.sum((x - x_star) ** 2))], [problem.gap(x, x_star)]
    for t in range(track.horizon):
        p = track.at(t)
        g = problem.grad(x, x_star)
        x_exact = x - p.alpha * g
        x_star_next = _drift_to(x_star, p.sigma, problem.drift,
                                problem.direction, x_exact, rng)
        v = _error_vector(policy, g, x, x_exact, x_star_next, p, rng)
        x = x - p.alpha * (g + v)
        x_star = x_star_next
        x_hist.append(x)
        xs_hist.append(x_star)
        e_hist.append(float(np.sum((x - x_star) ** 2)))
        gap_hist.append(problem.gap(x, x_star))
    return Trajectory(x=np.array(x_hist), x_star=np.array(xs_hist),
                      e=np.array(e_hist), gaps=np.array(gap_hist), seed=seed)


def run_vi_ogd(field: MonotoneField, track: ParamTrack, worst: bool = True,
               x0=None, x_star0=None, seed: int = 0,
               trial: int = 0) -> Trajectory:
    """Forward steps on a strongly monotone field with mixed-budget errors.

    The injected error exhausts ||v||^2 = delta^2 ||F(x)||^2 + c^2 and is
    aimed away from the next minimizer when ``worst`` is set (random unit
    direction otherwise).
    """
    rng = rng_for(seed, trial)
    x_star = (np.zeros(field.dim) if x_star0 is None
              else np.asarray(x_star0, dtype=float))
    x = (x_star + math.sqrt(track.U0) * _unit(np.ones(field.dim))
         if x0 is None else np.asarray(x0, dtype=float))
    xs_hist, x_hist, e_hist = [x_star], [x], [float(np.sum((x - x_star) ** 2))]
    for t in range(track.horizon):
        p = track.at(t)
        F = field(x, x_star)
        x_exact = x - p.alpha * F
        x_star_next = _drift_to(x_star, p.sigma, field.drift,
                                field.direction, x_exact, rng)
        mag = math.sqrt(p.delta ** 2 * float(F @ F) + p.c ** 2)
        if mag == 0.0:
            v = np.zeros_like(F)
        elif worst:
            v = -mag * _unit(x_exact - x_star_next)
        else:
            v = mag * _unit(rng.normal(size=F.shape))
        x = x - p.alpha * (F + v)
        x_star = x_star_next
        x_hist.append(x)
        xs_hist.append(x_star)
        e_hist.append(float(np.sum((x - x_star) ** 2)))
    zeros = np.zeros(len(e_hist))
    return Trajectory(x=np.array(x_hist), x_star=np.array(xs_hist),
                      e=np.array(e_hist), gaps=zeros, seed=seed)


def run_stoch_finite_sum(problem: FiniteSumQuadratic, track: ParamTrack,
                         x0=None, seed: int = 0, trial: int = 0) -> Trajectory:
    """Uniform single-component stochastic gradient on the finite sum."""
    rng = rng_for(seed, trial)
    anchors = problem.anchors.copy()
    x_star = problem.minimizer(anchors)
    x = (x_star + math.sqrt(track.U0) * _unit(np.ones(problem.dim))
         if x0 is None else np.asarray(x0, dtype=float))
    xs_hist, x_hist, e_hist, gap_hist = [x_star], [x], \
        [float(np.sum((x - x_star) ** 2))], [problem.gap(x, anchors)]
    for t in range(track.horizon):
        p = track.at(t)
        i = int(rng.integers(problem.n))
        g = problem.H @ (x - anchors[i])
        x_exact = x - p.alpha * g
        x_star_next = _drift_to(x_star, p.sigma, problem.drift,
                                problem.direction, x_exact, rng)
        anchors = anchors + (x_star_next - x_star)
        x = x_exact
        x_star = x_star_next
        x_hist.append(x)
        xs_hist.append(x_star)
        e_hist.append(float(np.sum((x - x_star) ** 2)))
        gap_hist.append(problem.gap(x, anchors))
    return Trajectory(x=np.array(x_hist), x_star=np.array(xs_hist),
                      e=np.array(e_hist), gaps=np.array(gap_hist), seed=seed)


def run_ipogd(problem: DiagonalComposite, track: ParamTrack,
              policy: ErrorPolicy = NoError(), x0=None, b0=None,
              seed: int = 0, trial: int = 0) -> Trajectory:
    """Inexact proximal gradient descent on the l1-composite problem."""
    rng = rng_for(seed, trial)
    b = (np.zeros(problem.dim) if b0 is None
         else np.asarray(b0, dtype=float))
    x_star = problem.minimizer(b)
    x = (x_star + math.sqrt(track.U0) * _unit(np.ones(problem.dim))
         if x0 is None else np.asarray(x0, dtype=float))
    xs_hist, x_hist, e_hist, gap_hist = [x_star], [x], \
        [float(np.sum((x - x_star) ** 2))], [problem.gap(x, b)]
    for t in range(track.horizon):
        p = track.at(t)
        g = problem.h * (x - b)
        x_exact = soft_threshold(x - p.alpha * g, p.alpha * problem.lam1)
        # the target b drifts by sigma; soft-thresholding is entrywise
        # 1-Lipschitz, so the composite minimizer moves by at most sigma
        b_next = _drift_to(b, p.sigma, problem.drift, problem.direction,
                           x_exact, rng)
        x_star_next = problem.minimizer(b_next)
        v = _error_vector(policy, g, x, x_exact, x_star_next, p, rng)
        x = soft_threshold(x - p.alpha * (g + v), p.alpha * problem.lam1)
        b, x_star = b_next, x_star_next
        x_hist.append(x)
        xs_hist.append(x_star)
        e_hist.append(float(np.sum((x - x_star) ** 2)))
        gap_hist.append(problem.gap(x, b))
    return Trajectory(x=np.array(x_hist), x_star=np.array(xs_hist),
                      e=np.array(e_hist), gaps=np.array(gap_hist), seed=seed)


@dataclass(frozen=True)
class SoundnessReport:
    """Outcome of comparing measured errors against a certified trace."""

    ok: bool
    worst_excess: float          # max of e_t - allowed_t (<= 0 when ok)
    first_violation: Optional[int]
    mode: str


def check_soundness(traj: Union[Trajectory, Sequence[float], np.ndarray],
                    bounds: Union[BoundTrace, Sequence[float]],
                    mode: str = "deterministic",
                    trials: Optional[int] = None) -> SoundnessReport:
    """Verify measured (or trial-mean) squared errors against the bound.

    Deterministic mode allows only roundoff slack; mean-square mode allows
    the 5/sqrt(trials) statistical slack on the trial mean.
    """
    e = np.asarray(traj.e if isinstance(traj, Trajectory) else traj,
                   dtype=float)
    U = np.asarray(bounds.U if isinstance(bounds, BoundTrace) else bounds,
                   dtype=float)
    if e.shape != U.shape:
        raise HorizonMismatch(f"errors have shape {e.shape}, bounds {U.shape}")
    if mode == "deterministic":
        allowed = U + DET_SLACK * np.maximum(1.0, U)
    elif mode == "mean-square":
        if not trials or trials < 1:
            raise ValueError("mean-square mode requires a positive trial count")
        allowed = U * (1.0 + 5.0 / math.sqrt(trials))
    else:
        raise ValueError(f"unknown soundness mode {mode!r}")
    excess = e - allowed
    bad = np.nonzero(excess > 0)[0]
    return SoundnessReport(ok=bad.size == 0,
                           worst_excess=float(excess.max()),
                           first_violation=int(bad[0]) if bad.size else None,
                           mode=mode)


def trial_mean_errors(run_one: Callable[[int], Trajectory],
                      trials: int) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and max squared-error curves over independent trials."""
    mean = None
    peak = None
    for trial in range(trials):
        e = run_one(trial).e
        mean = e.copy() if mean is None else mean + e
        peak = e.copy() if peak is None else np.maximum(peak, e)
    return mean / trials, peak


def sector_residual(problem: DriftingQuadratic, rng: np.random.Generator,
                    points: int = 100) -> float:
    """Worst value of the curvature sector form over random points (>= 0
    up to roundoff for a valid instance)."""
    m, L = problem.m, problem.L
    worst = math.inf
    x_star = np.zeros(problem.dim)
    for _ in range(points):
        x = rng.normal(size=problem.dim)
        s = x - x_star
        g = problem.grad(x, x_star)
        val = (-2.0 * m * L * float(s @ s) + 2.0 * (L + m) * float(s @ g)
               - 2.0 * float(g @ g))
        worst = min(worst, val)
    return worst


def monotone_residuals(field: MonotoneField, rng: np.random.Generator,
                       pairs: int = 100) -> Tuple[float, float]:
    """Worst strong-monotonicity and Lipschitz margins over random pairs."""
    worst_mono, worst_lip = math.inf, math.inf
    x_star = np.zeros(field.dim)
    for _ in range(pairs):
        x = rng.normal(size=field.dim)
        y = rng.normal(size=field.dim)
        dF = field(x, x_star) - field(y, x_star)
        d = x - y
        worst_mono = min(worst_mono,
                         float(dF @ d) - field.m * float(d @ d))
        worst_lip = min(worst_lip,
                        field.L * float(np.linalg.norm(d))
                        - float(np.linalg.norm(dF)))
    return worst_mono, worst_lip
