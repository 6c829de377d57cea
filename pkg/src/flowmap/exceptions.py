"""Exception hierarchy shared by every module of the package."""


class FlowMapError(Exception):
    """Base class for all package errors."""


class InvalidArgument(FlowMapError, ValueError):
    pass


class NotFound(FlowMapError, KeyError):
    def __str__(self):
        # KeyError quotes its argument; keep messages readable
        return str(self.args[0]) if self.args else ""


class EmptyHistogram(FlowMapError, ValueError):
    pass


class OutOfBounds(FlowMapError, IndexError):
    pass


class ProtocolViolation(FlowMapError, RuntimeError):
    """Internal ownership bookkeeping reached an impossible state."""


class UndefinedResult(FlowMapError, ArithmeticError):
    pass


class EmptyOverlap(FlowMapError, ValueError):
    pass


class NoPath(FlowMapError):
    pass


class ParseError(FlowMapError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
