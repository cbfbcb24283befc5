"""Exception hierarchy shared across the toolchain.

Every error raised on a public surface derives from BugtrailError so the
CLI and the HTTP service can map failures to exit codes / status codes
without string matching.
"""

from __future__ import annotations


class BugtrailError(Exception):
    """Base class for all domain errors."""

    code = "error"


class ValidationError(BugtrailError):
    """Input violates a documented precondition or schema."""

    code = "validation"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class LayoutParseError(ValidationError):
    """Malformed layout/menu markup; carries file name and position."""

    code = "parse"

    def __init__(self, message: str, file: str, line: int | None = None, column: int | None = None):
        loc = f"{file}:{line}:{column}" if line is not None else file
        super().__init__(f"{loc}: {message}")
        self.file = file
        self.line = line
        self.column = column


class PackageError(ValidationError):
    """App package is structurally invalid (manifest, schema, cross-refs)."""

    code = "package"


class NotFoundError(BugtrailError):
    """Referenced app/state/session/report does not exist."""

    code = "not_found"


class ConflictError(BugtrailError):
    """Write refused: the artifact already exists (append-only store)."""

    code = "conflict"


class StateError(BugtrailError):
    """Operation not valid in the current lifecycle state."""

    code = "state"


class DriverTimeoutError(BugtrailError):
    """A device-driver call exceeded the per-action budget."""

    code = "timeout"


class RipAbortedError(BugtrailError):
    """Exploration could not re-localize after bounded retries."""

    code = "rip_aborted"
