"""Exception hierarchy.

Every error raised by the library derives from :class:`NodalCountError`.
Numerical trouble derives from :class:`NumericalFailure` so the CLI can map
it to its own exit code.
"""


class NodalCountError(Exception):
    """Base class for all library errors."""


class ParseError(NodalCountError, ValueError):
    """Malformed JSON or a document missing required fields."""


class InvalidGraph(NodalCountError, ValueError):
    """Graph input violates simplicity, range or connectivity."""


class InvalidCover(NodalCountError, ValueError):
    """Cycle cover is not a vertex-disjoint spanning union of edges and odd cycles."""


class InvalidMatrix(NodalCountError, ValueError):
    """Matrix is not symmetric, not finite, or not supported on its graph."""


class DimensionMismatch(NodalCountError, ValueError):
    pass


class OutOfRange(NodalCountError, ValueError):
    """Construction parameters outside the admissible range."""


class PreconditionFailed(NodalCountError):
    pass


class WrongGraph(PreconditionFailed):
    """Operation requires a specific graph family."""


class FullDegreeMissing(PreconditionFailed):
    pass


class PositivityViolation(PreconditionFailed):
    pass


class NotAnEigenvector(PreconditionFailed):
    pass


class VanishingEntry(PreconditionFailed):
    pass


class DegenerateBase(PreconditionFailed):
    """Unperturbed matrix has a repeated eigenvalue."""


class NumericalFailure(NodalCountError, ArithmeticError):
    """Solver trouble or a violated numerical contract."""


class PairingFailure(NumericalFailure):
    pass


class GapTooSmall(NumericalFailure):
    pass


class DegenerateEigenvalue(NumericalFailure):
    pass


class SingularMatrix(NumericalFailure):
    pass


class UnresolvedMultiplicity(NumericalFailure):
    pass


class AmbiguousClustering(NumericalFailure):
    """Eigenvalue clustering is unclear at the given tolerance.

    Attributes:
        profiles: the two candidate multiplicity profiles.
    """

    def __init__(self, message, profiles=()):
        super().__init__(message)
        self.profiles = tuple(profiles)


class NoStabilization(NumericalFailure):
    pass


class SearchExhausted(NumericalFailure):
    pass


class ParameterSearchFailed(SearchExhausted):
    pass


class RepairFailed(NumericalFailure):
    """Transversal repair did not converge or lost the sign structure.

    Attributes:
        trace: residual norms per Newton step.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class NewtonStalled(RepairFailed):
    pass
