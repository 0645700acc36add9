"""Exception hierarchy.

``InputError`` subclasses signal malformed or out-of-contract input (CLI exit
code 2); ``MathematicalFailure`` subclasses signal a well-posed question whose
answer is negative, e.g. an obstruction (CLI exit code 1).
"""


class VersalError(Exception):
    pass


class InputError(VersalError, ValueError):
    pass


class MathematicalFailure(VersalError):
    pass


# coefficients
class RelationHasUnit(InputError):
    pass


class BadTruncation(InputError):
    pass


class RingMismatch(InputError):
    pass


class NotAUnit(InputError):
    pass


class NotStronglyConvex(InputError):
    pass


class NonPositiveArea(InputError):
    pass


class IrrationalPhase(InputError):
    pass


# graded
class LengthMismatch(InputError):
    pass


class ArityMismatch(InputError):
    pass


# linf
class DifferentialNotSquareZero(InputError):
    pass


class ConstantTermPresent(InputError):
    pass


class NotMinimal(InputError):
    pass


class OrderOnePartNotClosed(MathematicalFailure):
    pass


class ObstructionMismatch(MathematicalFailure):
    pass


class RingHasRelations(InputError):
    pass


class NotGaugeEquivalent(MathematicalFailure):
    """Single-flowline search failed; carries the lowest obstruction."""

    def __init__(self, order, obstruction, message=None):
        self.order = order
        self.obstruction = obstruction
        super().__init__(message or f"gauge solve obstructed at order {order}")


# ainf
class ComponentNotInvertible(InputError):
    pass


class InvalidCochain(InputError):
    pass


class PushforwardNotBounding(MathematicalFailure):
    pass


# hochschild
class ReductionMismatch(InputError):
    pass


class NotMaurerCartan(MathematicalFailure):
    def __init__(self, location, residual, message=None):
        self.location = location
        self.residual = residual
        super().__init__(message or f"Maurer-Cartan equation fails at {location}")


class KSNotSurjective(MathematicalFailure):
    pass


class ObstructionEscapes(MathematicalFailure):
    def __init__(self, order, message=None):
        self.order = order
        super().__init__(message or f"discrepancy class outside the KS image at order {order}")


# io
class SchemaError(InputError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class VersionUnsupported(InputError):
    pass


class DescriptionSyntaxError(InputError):
    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
