from __future__ import annotations


class SspError(Exception):
    """Base class for library errors."""


class InvalidArgument(SspError, ValueError):
    pass


class CorruptedInstance(SspError, ValueError):
    pass


class ImproperInstance(InvalidArgument):
    """No proper policy exists (goal unreachable from some state)."""


class ProtocolViolation(SspError, RuntimeError):
    """A learner was fed a transition it did not choose."""


class NumericFailure(SspError, RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class RefusedError(SspError, RuntimeError):
    """Oracle guard exceeded."""


class AbortedRun(SspError, RuntimeError):
    """Too many episodes hit the step cap."""
