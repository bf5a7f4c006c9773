"""Shared fixtures: random valid parameter draws for every analysis."""

import numpy as np
import pytest

from trackbound.schedule import (Analysis, AnalysisKind, FnClass, StepParams,
                                 finite_sum_alpha_bar)

# One representative AnalysisKind per certified analysis.
EIGHT_ANALYSES = (
    AnalysisKind(Analysis.EXACT_OGD),
    AnalysisKind(Analysis.INEXACT_OGD_ABS),
    AnalysisKind(Analysis.INEXACT_OGD_REL),
    AnalysisKind(Analysis.VI_OGD),
    AnalysisKind(Analysis.STOCH_OGD_IID),
    AnalysisKind(Analysis.FINITE_SUM, FnClass.SMOOTH),
    AnalysisKind(Analysis.IP_OGD),
    AnalysisKind(Analysis.BIASED_SGD),
)

# All kind variants, including every finite-sum component class.
ALL_KIND_VARIANTS = tuple(
    k for tag in Analysis
    for k in ([AnalysisKind(tag, fc) for fc in FnClass]
              if tag is Analysis.FINITE_SUM else [AnalysisKind(tag)])
)


def draw_params(kind: AnalysisKind, rng: np.random.Generator):
    """One random valid (U, StepParams) draw for the given analysis.

    Moduli are log-uniform (m in [0.1, 10], L/m in [1, 100]), the
    stepsize is uniform within the analysis' valid range, and the
    perturbation budgets are uniform in moderate ranges with the unused
    ones zeroed.
    """
    m = 10.0 ** rng.uniform(-1.0, 1.0)
    L = m * 10.0 ** rng.uniform(0.0, 2.0)
    U = 10.0 ** rng.uniform(-4.0, 2.0)
    sigma = rng.uniform(0.0, 0.5)
    c = rng.uniform(0.0, 1.0)
    G = rng.uniform(0.0, 1.0)
    delta = 0.0
    Lg = 0.0
    tag = kind.tag
    if tag is Analysis.INEXACT_OGD_REL:
        delta = rng.uniform(0.0, 0.9) * 2.0 * m / (L + m)
        cap = 2.0 / ((1.0 + delta) * L)
        c = G = 0.0
    elif tag is Analysis.VI_OGD:
        delta = rng.uniform(0.0, 0.9) * m / L
        cap = 2.0 * (m - delta * L) / (L * L * (1.0 - delta ** 2))
        G = 0.0
    elif tag is Analysis.FINITE_SUM:
        cap = finite_sum_alpha_bar(kind.fn_class, m, L)
        c = delta = 0.0
    elif tag is Analysis.BIASED_SGD:
        delta = rng.uniform(0.0, 0.5) * m / L
        cap = 2.0 / L
        sigma = 0.0
    else:
        cap = 2.0 / L
        if tag is Analysis.IP_OGD:
            Lg = rng.uniform(0.0, 1.0)
        if tag is Analysis.EXACT_OGD:
            c = 0.0
        delta = 0.0
        G = 0.0
    alpha = rng.uniform(0.05, 1.0) * cap
    p = StepParams(m=m, L=L, alpha=alpha, sigma=sigma, c=c, delta=delta,
                   G=G, Lg=Lg)
    return U, p


@pytest.fixture(scope="session")
def acceptance_draws():
    """The shared 100-draws-per-analysis pool used by the acceptance gate."""
    rng = np.random.default_rng(20260823)
    return {kind: [draw_params(kind, rng) for _ in range(100)]
            for kind in EIGHT_ANALYSES}
