"""Error types. Every error carries a stable ``E_*`` code."""

from __future__ import annotations

from dataclasses import dataclass


class CescError(Exception):
    """Base class; ``code`` is one of the stable ``E_*`` identifiers."""

    code = "E_INTERNAL"

    def __init__(self, message: str, code: str | None = None, line: int | None = None,
                 col: int | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        where = ""
        if self.line is not None:
            where = f"{self.line}:{self.col or 0}: " if self.col else f"line {self.line}: "
        return f"{self.code}: {where}{self.message}"


class ParseError(CescError):
    code = "E_PARSE"


class ValidationError(CescError):
    code = "E_VALIDATION"

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        super().__init__("; ".join(str(d) for d in self.diagnostics) or "invalid spec",
                         code=first.code if first else None)


class SynthesisError(CescError):
    code = "E_SYNTHESIS"


class TraceFormatError(CescError):
    code = "E_TRACE_FORMAT"


class RuntimeCheckError(CescError):
    code = "E_NO_TRANSITION"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.code}: line {self.line}: {self.message}"
        return f"{self.code}: {self.message}"
