"""Exception hierarchy shared by every module of the package."""


class GmnError(Exception):
    """Base class for all errors raised by :mod:`gmn`."""


class NotHermitian(GmnError, ValueError):
    pass


class DimensionMismatch(GmnError, ValueError):
    pass


class TooLarge(GmnError, ValueError):
    pass


class InvalidSpec(GmnError, ValueError):
    pass


class NotPure(GmnError, ValueError):
    pass


class WrongGraph(GmnError, ValueError):
    pass


class PreconditionViolated(GmnError, ValueError):
    pass


class NotDecomposable(GmnError, ValueError):
    pass


class DualInfeasible(GmnError, ValueError):
    pass


class NumericalFailure(GmnError, ArithmeticError):
    pass


class ParseError(GmnError, ValueError):
    pass
