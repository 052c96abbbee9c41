"""Exception types shared across the package."""

from __future__ import annotations


class PromutError(Exception):
    pass


class ParseError(PromutError):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected=()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        where = f"line {line}, column {column}: " if line else ""
        hint = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{where}{message}{hint}")


class UnsupportedConstruct(ParseError):
    """Valid Prolog that lies outside the supported subset."""


class DuplicateTestName(ParseError):
    pass


class UnsupportedOption(ParseError):
    pass


class InvalidPath(PromutError, IndexError):
    def __init__(self, path):
        self.path = tuple(path)
        super().__init__(f"invalid term path {list(self.path)}")


class StaleSite(PromutError):
    pass


class EmptySuite(PromutError):
    def __init__(self):
        super().__init__("the test suite is empty; a mutation score needs at least one test")


class BaselineRejected(PromutError):
    def __init__(self, failing):
        self.failing = tuple(failing)
        names = ", ".join(self.failing)
        super().__init__(f"tests must pass on the original program; failing: {names}")
