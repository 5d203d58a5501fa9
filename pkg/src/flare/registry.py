"""Developer-key validation and application registration.

Registrations are ordinary engine records under a reserved namespace, so
they recover with everything else.  App ids are a deterministic digest of
(developer key, app name), which makes re-registration idempotent for free.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time

from .engine import Engine, FieldEntry, Scope
from .errors import InvalidKey, ValidationError

# Engine namespace for registration rows.  Real app ids are bare hex, so a
# "#" suffix can never collide with one.
_REGISTRY_APP = "#registry"
_COLLECTION = "apps"


def derive_app_id(dev_key: str, app_name: str) -> str:
    digest = hashlib.sha256(f"{dev_key}\x00{app_name}".encode("utf-8")).hexdigest()
    return "a" + digest[:31]


class AppRegistry:
    def __init__(self, engine: Engine, dev_keys: list[str]):
        self._engine = engine
        self._keys = frozenset(dev_keys)
        self._lock = threading.Lock()
        self._apps: dict[str, str] = {}  # app_id -> app_name
        for rec in engine.scan(_REGISTRY_APP, Scope.static()):
            row = json.loads(rec.fields["registration"].value)
            self._apps[row["appID"]] = row["appName"]

    def validate_key(self, key: str) -> bool:
        return key in self._keys

    def register_app(self, key: str, app_name: str) -> str:
        if not self.validate_key(key):
            raise InvalidKey("developer key not recognized")
        if not app_name or len(app_name) > 64:
            raise ValidationError("app name must be 1-64 characters")
        app_id = derive_app_id(key, app_name)
        with self._lock:
            if app_id in self._apps:
                return app_id
            row = {
                "appID": app_id,
                "appName": app_name,
                "keyDigest": hashlib.sha256(key.encode("utf-8")).hexdigest()[:16],
                "createdAt": int(time.time() * 1000),
            }
            self._engine.append_record(
                _REGISTRY_APP,
                Scope.static(),
                _COLLECTION,
                {"registration": FieldEntry(json.dumps(row), "private")},
            )
            self._apps[app_id] = app_name
        return app_id

    def app_exists(self, app_id: str) -> bool:
        with self._lock:
            return app_id in self._apps
