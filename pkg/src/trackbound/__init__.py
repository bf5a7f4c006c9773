"""Certified tracking-error and dynamic-regret bounds for inexact online
optimization methods.

The package computes closed-form solutions of the per-step semidefinite
programs that govern worst-case tracking error for eight first-order
online methods, cross-checks them against independent numerical solvers
and explicit multiplier certificates, validates them against simulated
trajectories, and converts them into dynamic-regret bounds.
"""

from .certify import BoundTrace, run, step
from .errors import TrackboundError
from .lmi import MultiplierCertificate, build, certificate
from .regret import RegretReport, empirical_regret, regret_bound, \
    regret_bound_for
from .schedule import Analysis, AnalysisKind, FnClass, ParamTrack, \
    StepParams, validate
from .sdp_oracle import OracleResult, solve_step_generic, solve_step_reduced
from .simulate import (DiagonalComposite, Drift, DriftingQuadratic,
                       FiniteSumQuadratic, MonotoneField, Trajectory,
                       check_soundness)

__all__ = [
    "Analysis", "AnalysisKind", "BoundTrace", "DiagonalComposite", "Drift",
    "DriftingQuadratic", "FiniteSumQuadratic", "FnClass",
    "MonotoneField", "MultiplierCertificate", "OracleResult", "ParamTrack",
    "RegretReport", "StepParams", "TrackboundError", "Trajectory", "build",
    "certificate", "check_soundness", "empirical_regret", "regret_bound",
    "regret_bound_for", "run", "solve_step_generic", "solve_step_reduced",
    "step", "validate",
]

__version__ = "0.1.0"
