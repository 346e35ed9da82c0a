"""
Error types shared by the whole toolkit.

Every error carries an exit code so the command line front end can map a
failure to its contract without a lookup table:
    2 = hypothesis or precondition violated
    3 = numerics under-resolved
"""


class GeoballError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


class OutOfChart(GeoballError):
    """A point (or an integrated ray) left the declared chart domain."""


class SingularMetric(GeoballError):
    """The metric is not invertible to working precision."""


class DegeneratePlane(GeoballError):
    """Two tangent vectors do not span a 2-plane."""


class BadProfile(GeoballError):
    """A warping profile is not positive or not C² at its joins."""


class DivergentIntegral(GeoballError):
    """The total K+ integral does not converge."""


class PastConjugate(GeoballError):
    """A quantity was requested at or past the first conjugate point."""


class ConjugateInsideRange(GeoballError):
    """Some ray reaches a conjugate point before t_max."""

    def __init__(self, message, direction=None, conjugate_t=None):
        super().__init__(message)
        self.direction = direction
        self.conjugate_t = conjugate_t


class QuadratureUnderResolved(GeoballError):
    """Refining the discretization changed a result beyond tolerance."""

    exit_code = 3


class BoundaryPoint(GeoballError):
    """A finite-difference stencil does not fit inside the grid."""


class HypothesisViolated(GeoballError):
    """A theorem's hypothesis could not be certified on the sampled data."""


class ParseError(GeoballError):
    """Malformed run configuration."""

    def __init__(self, message, line=None, column=None):
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column


class ConstraintError(GeoballError):
    """A parameter violates a family or configuration invariant."""


class IoError(GeoballError):
    """Writing an output artifact failed."""
