"""Exception hierarchy shared across the package.

Every failure that callers are expected to handle maps onto one of these;
the CLI translates them into its exit codes.
"""


class PolysepError(Exception):
    """Base class for all package errors."""


class RootSolveError(PolysepError):
    """Root extraction failed or produced an inconsistent cluster set."""


class TraceError(PolysepError):
    """A separatrix trace could not be completed or classified.

    Carries optional diagnostic attributes: ``exit_angle`` (radians, when a
    direction match failed) and ``steps`` (budget state).
    """

    def __init__(self, message, exit_angle=None, steps=None):
        super().__init__(message)
        self.exit_angle = exit_angle
        self.steps = steps


class PairingError(TraceError):
    """Forward and backward traces of a homoclinic disagree."""


class DecompositionError(PolysepError):
    """The separatrix graph does not decompose into valid zones."""


class InvariantError(PolysepError):
    """An invariant integral violated its contract (sign, residual, path)."""


class HomotopyMismatchError(InvariantError):
    """Two homotopic transversal paths gave different integrals."""


class RealizeError(PolysepError):
    """The root-space Newton solve failed, or left the LMP neighborhood."""


class SearchExhausted(PolysepError):
    """A bounded search (rank decomposition, instance search) found nothing."""


class TheoremViolation(PolysepError):
    """An internal consistency property that is provably true was violated.

    Raised e.g. when an accepted union graph contains a cycle.  Always a bug.
    """
