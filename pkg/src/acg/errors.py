"""Exception types shared across the package."""


class AcgError(Exception):
    """Base class for all package-specific errors."""


class InvalidDistribution(AcgError, ValueError):
    """A weight matrix is malformed (shape, negativity, or sum too far from 1)."""


class ZeroMeanDegree(AcgError, ValueError):
    """The node-type distribution has mean degree zero."""


class InconsistentPair(AcgError, ValueError):
    """An operation requires a consistent (node, edge) distribution pair."""


class ClipOverflow(AcgError, RuntimeError):
    """Clipping cannot place all degree increments without exceeding the cutoff."""


class InfeasibleSequence(AcgError, ValueError):
    """A node-type sequence has unequal in- and out-stub totals."""


class DeadEnd(AcgError, RuntimeError):
    """Sequential wiring ran out of admissible stub pairings before finishing."""


class RetriesExhausted(AcgError, RuntimeError):
    """Too many redraws without an acceptable node-type sequence."""


class MarginMismatch(AcgError, ValueError):
    """Stub-count margins disagree in total or shape."""


class CapExceeded(AcgError, ValueError):
    """An enumeration was requested beyond its explicit size cap."""


class InconsistentWiring(AcgError, ValueError):
    """A wiring does not use exactly the stubs implied by the node sequence."""


class ZeroPartition(AcgError, ValueError):
    """The wiring partition function vanishes; no admissible wiring exists."""


class NoConvergence(AcgError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class UnsupportedMargin(AcgError, ValueError):
    """Margins put mass where the edge-type distribution has none (or vice versa)."""


class SingularHessian(AcgError, RuntimeError):
    """The projected Hessian is singular where a determinant is required."""


class NotATree(AcgError, ValueError):
    """A configuration has repeated nodes where a tree is required."""


class DegenerateVariance(AcgError, ValueError):
    """A correlation is undefined because one coordinate has zero variance."""
