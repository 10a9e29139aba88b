"""Diagnostic records shared by the validators and the document checker."""
from __future__ import annotations

from dataclasses import dataclass

ERROR = "Error"
WARN = "Warn"


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding. Errors block code generation, Warns do not."""

    severity: str
    code: str
    path: str
    message: str

    def format(self) -> str:
        return f"{self.severity} {self.code} {self.path}: {self.message}"


def error(code: str, path: str, message: str) -> Diagnostic:
    return Diagnostic(ERROR, code, path, message)


def warn(code: str, path: str, message: str) -> Diagnostic:
    return Diagnostic(WARN, code, path, message)


def has_errors(diagnostics) -> bool:
    return any(d.severity == ERROR for d in diagnostics)


class ValidationFailedError(Exception):
    """Raised when an operation needs a clean validation pass but errors remain."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(d.format() for d in self.diagnostics) or "validation failed"
        super().__init__(lines)
