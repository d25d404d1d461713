"""Exception hierarchy for the package.

Every domain error derives from :class:`PvcspError`; the CLI maps these to
exit code 1.
"""


class PvcspError(Exception):
    pass


class UndefinedArithmetic(PvcspError, ArithmeticError):
    pass


class ParseError(PvcspError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ArityMismatch(ParseError):
    pass


class UnknownSymbol(ParseError):
    pass


class RoleViolation(PvcspError, ValueError):
    pass


class SignatureMismatch(PvcspError, ValueError):
    pass


class BudgetExceeded(PvcspError):
    pass


class InvalidParameter(PvcspError, ValueError):
    pass


class Disconnected(PvcspError, ValueError):
    pass


class TooSmall(PvcspError, ValueError):
    pass


class MalformedProgram(PvcspError, ValueError):
    pass


class DimensionMismatch(PvcspError, ValueError):
    pass


class MalformedDistribution(PvcspError, ValueError):
    pass


class ProtocolViolation(PvcspError, AssertionError):
    pass


class ScheduleExceeded(PvcspError):
    pass


class InternalError(PvcspError, RuntimeError):
    pass
