"""Domain exceptions shared across the platform.

Every error carries a stable machine-readable ``code`` so HTTP handlers
and CLI reports can map failures without string matching.
"""

from __future__ import annotations

from typing import Any


class NourIdError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


class FormatError(NourIdError):
    """Input fails a syntactic rule (distinct from lookups that miss)."""

    code = "format_error"

    def __init__(self, reason: str, message: str = "", **details: Any):
        super().__init__(message or f"format error: {reason}", reason=reason, **details)
        self.reason = reason


class NotFound(NourIdError):
    code = "not_found"


class DimensionMismatch(NourIdError):
    code = "dimension_mismatch"


class TargetUnreachable(NourIdError):
    """Calibration cannot reach the requested accuracy."""

    code = "target_unreachable"

    def __init__(self, best_achievable: float, target: float):
        super().__init__(
            f"best achievable accuracy {best_achievable:.4f} below target {target:.4f}",
            best_achievable=best_achievable,
            target=target,
        )
        self.best_achievable = best_achievable
        self.target = target


class InvalidTransition(NourIdError):
    code = "invalid_transition"


class EvidenceMissing(NourIdError):
    code = "evidence_missing"


class ValidationIncomplete(NourIdError):
    code = "validation_incomplete"


class VersionConflict(NourIdError):
    code = "version_conflict"


class ReasonRequired(NourIdError):
    code = "reason_required"


class NotOwner(NourIdError):
    code = "not_owner"


class EmptySelection(NourIdError):
    code = "empty_selection"


class DuplicateRequest(NourIdError):
    code = "duplicate_request"


class DuplicateIssuance(NourIdError):
    code = "duplicate_issuance"


class PayloadTooLarge(NourIdError):
    code = "payload_too_large"


class EmptySeries(NourIdError):
    code = "empty_series"


class SeriesTooShort(NourIdError):
    code = "series_too_short"


class InsufficientData(NourIdError):
    code = "insufficient_data"


class InvalidConfig(NourIdError):
    code = "invalid_config"


class DuplicateEmail(NourIdError):
    code = "duplicate_email"


class WeakPassword(NourIdError):
    code = "weak_password"


class InvalidEmail(NourIdError):
    code = "invalid_email"


class InvalidCredentials(NourIdError):
    code = "invalid_credentials"


class Forbidden(NourIdError):
    code = "forbidden"


class IdentityMismatch(NourIdError):
    code = "identity_mismatch"


class MatchFailed(NourIdError):
    code = "match_failed"
