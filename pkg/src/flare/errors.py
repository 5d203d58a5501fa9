"""Error taxonomy shared by every service layer.

Each error carries a stable wire code (the ``error`` field of failure
envelopes) so transports never invent their own strings.
"""

from __future__ import annotations


class FlareError(Exception):
    """Base class for all service errors; ``code`` is the wire identifier."""

    code = "internal_error"
    http_status = 500

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.code)
        self.message = message or self.__class__.code


class ValidationError(FlareError):
    code = "validation_error"
    http_status = 400


class NotFound(FlareError):
    code = "not_found"
    http_status = 404


class StorageFull(FlareError):
    code = "storage_full"
    http_status = 500


class CorruptLog(FlareError):
    code = "corrupt_log"
    http_status = 500


class InvalidKey(FlareError):
    code = "invalid_key"
    http_status = 401


class UnknownApp(FlareError):
    code = "unknown_app"
    http_status = 404


class DuplicateUsername(FlareError):
    code = "duplicate_username"
    http_status = 409


class Unauthenticated(FlareError):
    code = "unauthenticated"
    http_status = 401


class Forbidden(FlareError):
    code = "forbidden"
    http_status = 403


class UnknownProvider(FlareError):
    code = "unknown_provider"
    http_status = 404


class UnsupportedFeature(FlareError):
    code = "unsupported_feature"
    http_status = 400


class ProviderError(FlareError):
    code = "provider_error"
    http_status = 500


class InvalidHandle(NotFound):
    """Blogging handle unknown, revoked, or owned by someone else."""
