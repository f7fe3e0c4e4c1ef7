"""Exception types raised across the package."""


class FewBodyError(Exception):
    """Base class for solver failures."""


class NonConvergedError(FewBodyError):
    """Grid extrapolation levels disagree beyond tolerance."""


class NoSolutionError(FewBodyError):
    """A root solve has no solution on the requested branch."""


class SingularFormError(FewBodyError):
    """A Gaussian form is not positive definite or is too ill-conditioned."""


class RankDeficientError(FewBodyError):
    """Fewer independent basis directions than requested eigenpairs."""


class LinearDependenceError(FewBodyError):
    """Candidate function lies (numerically) inside the current span."""


class NoProgressError(FewBodyError):
    """Basis growth stalled because every candidate was rejected."""


class UnboundStateError(FewBodyError):
    """Observable requested for a state flagged as continuum-like."""


class DegenerateFitError(FewBodyError):
    """Too few points for a least-squares fit."""


class ThresholdNotFoundError(FewBodyError):
    """No binding threshold crossing inside the scanned strength range."""
