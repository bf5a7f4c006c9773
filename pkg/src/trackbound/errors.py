"""Exception taxonomy shared across the toolkit."""


class TrackboundError(Exception):
    """Base class for all toolkit errors."""


class BadModuli(TrackboundError):
    """m <= 0 or m > L."""


class StepsizeOutOfRange(TrackboundError):
    """Stepsize violates the hypothesis of the chosen analysis."""


class DeltaOutOfRange(TrackboundError):
    """Relative error level outside the feasible range."""


class NonFinite(TrackboundError):
    """A matrix or parameter contains non-finite entries."""


class SingularPivot(TrackboundError):
    """Schur pivot block is numerically singular."""


class SignViolation(TrackboundError):
    """A nonnegativity constraint on a multiplier is broken."""


class DegenerateState(TrackboundError):
    """Optimal multipliers are not representable (e.g. U = 0 with sigma > 0)."""


class NoContraction(TrackboundError):
    """Contraction factor >= 1; no steady state exists."""


class DegenerateFixedPoint(TrackboundError):
    """Fixed point is zero where a positive one is required."""


class Infeasible(TrackboundError):
    """No feasible point found for the LMI."""


class ValidateFailed(TrackboundError):
    """Parameter track fails the hypotheses of the chosen analysis."""


class ProxUnavailable(TrackboundError):
    """No proximal operator available for the requested nonsmooth term."""


class HorizonMismatch(TrackboundError):
    """Trajectory and bound trace have different horizons."""


class NonConstantSchedule(TrackboundError):
    """A regret bullet requires constant parameters."""
