"""Exception types. Every error carries a stable ``code`` string."""

from __future__ import annotations


class MinModError(ValueError):
    """Base error; ``code`` is one of the documented error identifiers."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class PreconditionError(MinModError):
    def __init__(self, message: str, **diagnostic):
        self.diagnostic = diagnostic
        super().__init__("PRECONDITION_FAIL", message)


class NotFoundError(MinModError):
    """A search found no witness; ``diagnostic`` holds the best value seen."""

    def __init__(self, message: str, **diagnostic):
        self.diagnostic = diagnostic
        super().__init__("NOT_FOUND", message)


class ParseError(MinModError):
    def __init__(self, line: int, reason: str, code: str = "PARSE_ERROR"):
        self.line = line
        self.reason = reason
        super().__init__(code, f"line {line}: {reason}")
