"""Exception hierarchy shared by the library, CLI and service layers.

Every error carries a short machine-readable ``code`` so the HTTP layer can
emit structured error documents and the CLI can map failures onto exit codes
without string matching.
"""


class VarError(Exception):
    """Base class for all workbench errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ParseError(VarError):
    """Malformed input file (CSV structure, bad cell, wrong field count)."""

    code = "parse_error"

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class EmptyInputError(VarError):
    code = "empty_input"


class SchemaError(VarError):
    """A referenced column or metric does not exist."""

    code = "schema_error"


class EmptyProjectionError(VarError):
    """Every row was dropped while projecting; nothing to plot."""

    code = "empty_projection"


class DomainError(VarError):
    """Argument outside the mathematical domain (negative radius etc.)."""

    code = "domain_error"


class ModeError(VarError):
    """Field mode incompatible with the chosen kernel."""

    code = "mode_error"


class SolverError(VarError):
    """The kernel linear system could not be solved."""

    code = "solver_error"


class CapacityError(VarError):
    """Request exceeds the desk-scale enumeration guard."""

    code = "capacity_error"


class ConfigError(VarError):
    """Invalid configuration value."""

    code = "config_error"


class RenderError(VarError):
    """Inconsistent render inputs (grid/spec mismatch)."""

    code = "render_error"
