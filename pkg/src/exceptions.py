"""
Error hierarchy for the disc invariants toolkit.

Every error carries a human readable message plus an optional ``details``
dict with the numeric evidence that triggered it, so the CLI can echo it
into a report without re-deriving anything.
"""

from typing import Dict, Optional


class DiscInvariantError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict:
        return {'error': type(self).__name__, 'message': self.message, 'details': self.details}


class MalformedInput(DiscInvariantError):
    """Input could not be parsed into the expected object."""


class ParamOutOfRange(DiscInvariantError):
    """A parameter lies outside its documented range."""


class DegeneratePair(DiscInvariantError):
    """Two parameters that must differ coincide."""


class DimensionMismatch(DiscInvariantError):
    """Sizes of paired inputs disagree."""


class PoleError(DiscInvariantError):
    """A rational map was evaluated at (or numerically at) a pole."""


class DegreeOverflow(DiscInvariantError):
    """A composition would exceed the supported degree."""


class NotACrossing(DiscInvariantError):
    """Two boundary points do not share an image."""


class TransversalityViolation(DiscInvariantError):
    """The pairing <f(xi), f'(xi) xi> is not a positive real."""


class ConvergenceFailure(DiscInvariantError):
    """An iterative refinement did not reach its residual target."""


class PatternMismatch(DiscInvariantError):
    """A crossing pattern does not have the shape an operation requires."""


class KernelSingularity(DiscInvariantError):
    """1 - <f(z), f(w)> vanished while evaluating the kernel."""


class NonHermitianInput(DiscInvariantError):
    """A matrix expected to be Hermitian is not."""


class PathLeftDisc(DiscInvariantError):
    """A boundary approach path was asked for a step that leaves the disc."""


class InjectivityScreenFailed(DiscInvariantError):
    """The chosen parameter collides with a root of the injectivity system."""


class RootFindingFailure(DiscInvariantError):
    """Roots inside the disc could not be located consistently."""
