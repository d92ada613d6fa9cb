"""Exception hierarchy.

``ModelError`` subclasses signal an input that violates a model invariant
(CLI exit code 2); ``NumericalError`` subclasses signal a well-formed input
on which a numerical step failed (CLI exit code 3).
"""


class SLHError(Exception):
    """Base class for all errors raised by this package."""

    errclass = "ERROR"


class ModelError(SLHError, ValueError):
    errclass = "MODEL"


class DimensionError(ModelError):
    errclass = "DIMENSION"


class InvariantError(ModelError):
    errclass = "INVARIANT"


class ParseError(ModelError):
    errclass = "PARSE"


class StructureError(ModelError):
    """A component lacks the declared linear-passive mode structure."""

    errclass = "STRUCTURE"


class ParityError(InvariantError):
    errclass = "PARITY"


class NumericalError(SLHError, ArithmeticError):
    errclass = "NUMERICAL"


class SingularTransformError(NumericalError):
    errclass = "SINGULAR"


class NoStratonovichFormError(SingularTransformError):
    errclass = "NO_STRATONOVICH"


class AlgebraicLoopError(NumericalError):
    errclass = "ALGEBRAIC_LOOP"


class IntegrationDivergedError(NumericalError):
    errclass = "DIVERGED"

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class PoleError(NumericalError):
    errclass = "POLE"


class DomainExitError(NumericalError):
    errclass = "DOMAIN_EXIT"
