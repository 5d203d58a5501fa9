"""Flare: a four-tier backend-as-a-service.

Layers, bottom up: a durable schema-less storage engine, the service
logic (app registry, user directory, record store with visibility, web
gateway), one REST transport binding, and a client access library.
"""

from .client import APIError, AuthResult, FlareClient, TransportError
from .engine import Engine, FieldEntry, QuerySpec, Record, Scope
from .errors import FlareError

__all__ = [
    "APIError",
    "AuthResult",
    "Engine",
    "FieldEntry",
    "FlareClient",
    "FlareError",
    "QuerySpec",
    "Record",
    "Scope",
    "TransportError",
]

__version__ = "0.1.0"
