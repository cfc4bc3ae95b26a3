"""Exception hierarchy. CLI exit codes hang off these classes."""

from __future__ import annotations


class YaharvestError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ValidationError(YaharvestError):
    """Bad configuration or arguments (exit code 1)."""

    exit_code = 1


class DataError(YaharvestError):
    """Malformed or inconsistent input data (exit code 2)."""

    exit_code = 2


class ParseError(DataError):
    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class StageError(YaharvestError):
    """A pipeline stage failed; wraps the underlying error with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__(f"stage '{stage}' failed: {cause}")
