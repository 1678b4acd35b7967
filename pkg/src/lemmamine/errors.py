"""Exception hierarchy shared across the package."""

from __future__ import annotations


class LemmaMineError(Exception):
    """Base class for all package errors."""


class WellFormednessError(LemmaMineError):
    pass


class UnboundVariable(LemmaMineError):
    pass


class StateSpaceTooLarge(LemmaMineError):
    pass


class FrontendError(LemmaMineError):
    """Base for source-level errors; carries a ``(line, col)`` position when known."""

    def __init__(self, message: str, position: tuple[int, int] | None = None):
        self.message = message
        self.position = position
        where = f"{position[0]}:{position[1]}: " if position else ""
        super().__init__(where + message)

    def one_line(self) -> str:
        return str(self).splitlines()[0]


class HdlSyntaxError(FrontendError):
    def __init__(self, message: str, position: tuple[int, int] | None = None, expected: str | None = None):
        self.expected = expected
        if expected:
            message = f"{message} (expected {expected})"
        super().__init__(message, position)


class UnsupportedConstruct(FrontendError):
    def __init__(self, name: str, position: tuple[int, int] | None = None):
        self.name = name
        super().__init__(f"unsupported construct: {name}", position)


class NonAsciiOperator(FrontendError):
    def __init__(self, char: str, position: tuple[int, int], hint: str | None):
        self.char = char
        self.hint = hint
        msg = f"non-ASCII character {char!r} (U+{ord(char):04X})"
        if hint:
            msg += f"; did you mean {hint!r}?"
        super().__init__(msg, position)


class UnknownSignal(FrontendError):
    pass


class ElaborationError(FrontendError):
    pass


class UnsupportedTemporalDepth(FrontendError):
    pass


class SolverCrash(LemmaMineError):
    pass


class GeneratorError(LemmaMineError):
    pass


class TransportError(GeneratorError):
    pass


class AuthError(GeneratorError):
    pass


class MockExhausted(GeneratorError):
    pass


class CombinatorialCap(LemmaMineError):
    pass


class PoolTooSmall(LemmaMineError):
    pass


class ProviderError(LemmaMineError):
    pass


class ConfigError(LemmaMineError):
    pass
