"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the command line
front end prints and maps to a nonzero exit status.
"""


class RankZetaError(Exception):
    code = "error"


class ResourceError(RankZetaError):
    code = "resource"


class ParseError(RankZetaError):
    code = "parse"

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class ValidationError(RankZetaError):
    code = "validation"


class SingularCurveError(ValidationError):
    code = "singular-curve"


class ReductionError(RankZetaError):
    """Raised when a prime has the wrong reduction type for the request."""

    code = "wrong-reduction"


class DependencyError(RankZetaError):
    code = "dependency"


class PoleError(RankZetaError):
    code = "pole"


class PrecisionError(RankZetaError):
    code = "precision"

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DomainError(RankZetaError):
    code = "domain"


class IncompletenessError(RankZetaError):
    """A zero list failed its count certificate; the partial list is attached."""

    code = "incomplete"

    def __init__(self, message, zeros=None):
        super().__init__(message)
        self.zeros = zeros


class CompletenessError(RankZetaError):
    code = "completeness"


class InferenceError(RankZetaError):
    code = "inference"


class ConsistencyError(RankZetaError):
    code = "consistency"
