"""Exception types shared across the package."""


class QpersistError(Exception):
    """Base class for all qpersist errors."""


class ParseError(QpersistError):
    pass


class DimensionMismatch(QpersistError):
    pass


class TooManyPoints(QpersistError):
    pass


class EmptyMask(QpersistError):
    pass


class NotASubset(QpersistError):
    pass


class ScaleOrder(QpersistError):
    pass


class ZeroXi(QpersistError):
    pass


class NotSymmetric(QpersistError):
    pass


class NotSquare(QpersistError):
    pass


class TooLarge(QpersistError):
    pass


class EmptyBasis(QpersistError):
    pass


class NoMarkedStates(QpersistError):
    pass


class BadM(QpersistError):
    pass


class AmbiguousRounding(QpersistError):
    pass
