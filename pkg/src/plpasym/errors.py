"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class PLPError(Exception):
    """Base class; ``code`` is the machine-readable tag printed by the CLI."""

    code = "error"


class FormulaError(PLPError):
    code = "formula-error"


class StructureError(PLPError):
    code = "structure-error"


class PLPSyntaxError(PLPError):
    code = "parse-error"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        self.bare_message = message
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


class ProgramError(PLPError):
    """A program that parses but violates a structural invariant."""

    code = "program-error"


class UnstratifiableError(PLPError):
    code = "unstratifiable"

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("negation cycle through " + " -> ".join(self.cycle))


class ConstantsNotSupported(PLPError):
    code = "constants"


class ScaleLimitExceeded(PLPError):
    code = "scale-limit"


class AsymptoticError(PLPError):
    code = "asymptotic-error"
