"""Exception types shared across the package."""


class AsmLabError(Exception):
    """Base class for all asmlab errors."""


class InvalidInputError(AsmLabError, ValueError):
    """Input violates an operation's precondition or a type invariant."""


class GapViolationError(AsmLabError):
    """Quasiprojector defect too large: no spectral gap, straightening undefined."""


class DegenerateSpectrumError(AsmLabError):
    """An eigenvalue sits within tolerance of a thresholding cut."""


class NonConvergentError(AsmLabError):
    """A grid-limit quantity did not stabilize over the grid tail."""


class PrecisionError(AsmLabError):
    """Quadrature failed its successive-order convergence check."""


class IndeterminateIndexError(AsmLabError):
    """Singular values straddle the rank threshold; index undecidable at this truncation."""
