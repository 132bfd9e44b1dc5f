"""Exception hierarchy.

Validation failures (bad input data) and budget failures (computation would
exceed the configured combinatorial budget) are kept distinct so the CLI can
map them to different exit codes.
"""


class KStabError(Exception):
    """Base class for all library errors."""


class ValidationError(KStabError):
    """Input data violates a documented precondition or invariant."""


class BudgetError(KStabError):
    """A combinatorial computation exceeded its configured budget."""


class ConsistencyError(KStabError):
    """An internally asserted exact identity failed.

    These identities are mathematically guaranteed; a failure indicates a bug,
    never bad user input.
    """


# geometry kernel

class DimensionMismatch(ValidationError):
    pass


class UnboundedPolytope(ValidationError):
    pass


# the toric layer reports unboundedness of a moment polytope under this name
PolytopeUnbounded = UnboundedPolytope


class DegeneratePolytope(ValidationError):
    """Polytope is empty or not full-dimensional where full dimension is required."""


class EmptyPolytope(ValidationError):
    pass


# toric model

class NotKlt(ValidationError):
    pass


class NotPrimitive(ValidationError):
    pass


class NotLogFano(ValidationError):
    pass


class PointOutsidePolytope(ValidationError):
    pass


# invariants

class EmptyLinearSystem(ValidationError):
    pass


class NegativeCoefficient(ValidationError):
    pass


class AlreadySemistable(ValidationError):
    pass


# filtrations and ideals

class ZeroIdeal(ValidationError):
    pass


class NoCertificate(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class CombinatorialBlowup(BudgetError):
    pass


class SearchBudgetExceeded(BudgetError):
    """Raised with the largest stabilization level tried; never silently wrong."""


# CLI

class ParseError(ValidationError):
    pass
