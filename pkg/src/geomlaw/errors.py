"""Domain errors with stable machine-readable codes.

Every error raised by the library carries a ``code`` string that is kept
stable for CLI/service consumers (it ends up in the structured JSON error
output). Codes are lowercase, hyphen separated.
"""

from __future__ import annotations

from typing import Any


class GeomlawError(Exception):
    """Base class for all domain errors."""

    def __init__(self, code: str, message: str, **detail: Any):
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail

    def to_dict(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.detail:
            out["detail"] = self.detail
        return out


class ValidationError(GeomlawError):
    """Invalid parameters or malformed inputs (CLI exit code 3)."""


class NotRepresentableError(ValidationError):
    """A requested reparameterization does not exist for these parameters."""

    def __init__(self, message: str, correlation_sign: int | None = None):
        detail = {}
        if correlation_sign is not None:
            detail["correlation_sign"] = correlation_sign
        super().__init__("not-representable", message, **detail)
