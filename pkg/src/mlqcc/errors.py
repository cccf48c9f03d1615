"""Exception hierarchy shared by every mlqcc module."""

from __future__ import annotations


class MlqccError(Exception):
    """Base class for all library errors."""


class UnknownRegister(MlqccError, ValueError):
    def __init__(self, name: str, available=()):
        self.name = name
        msg = f"unknown register {name!r}"
        if available:
            msg += f" (layout has {', '.join(map(repr, available))})"
        super().__init__(msg)


class NotHermitian(MlqccError, ValueError):
    pass


class InvalidState(MlqccError, ValueError):
    pass


class OverlappingParts(MlqccError, ValueError):
    pass


class DimensionMismatch(MlqccError, ValueError):
    pass


class OutOfRange(MlqccError, ValueError):
    pass


class StateBlowup(MlqccError, RuntimeError):
    """Raised when an enumeration would exceed the configured size cap."""

    def __init__(self, measured: int, cap: int, what: str = "dimension"):
        self.measured = measured
        self.cap = cap
        super().__init__(f"{what} {measured} exceeds cap {cap}")


class PreconditionError(MlqccError, ValueError):
    """A protocol does not meet the preconditions of an operation."""


class RequiresMemoryless(PreconditionError):
    pass


class RequiresBinaryInputs(PreconditionError):
    pass


class NotOneShot(PreconditionError):
    pass


class UnsupportedOutput(PreconditionError):
    pass


class KeyLengthMismatch(MlqccError, ValueError):
    pass


class InvalidProtocol(MlqccError, ValueError):
    """simulate() was handed a protocol with validation violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid protocol: " + ", ".join(map(str, self.violations)))


class ProtocolParseError(MlqccError, ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
