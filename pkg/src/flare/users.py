"""Per-app user accounts: creation, authentication, and free-form attributes.

Username and password are the only mandatory inputs; everything else an
application wants to remember about a user goes into an unconstrained
string-to-string attribute map.

Accounts are persisted through the storage engine (one record per account
under a reserved "<appID>#users" namespace) so they share its durability
and recovery story.  Passwords are stored as salted PBKDF2-HMAC-SHA256
digests; the digest never leaves this module.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import threading
from typing import Optional

from .engine import Engine, FieldEntry, Scope
from .errors import (
    DuplicateUsername,
    NotFound,
    Unauthenticated,
    UnknownApp,
    ValidationError,
)
from .registry import AppRegistry

DEFAULT_ITERATIONS = 60_000
_COLLECTION = "accounts"
_CACHE_CAP = 4096


def _users_namespace(app_id: str) -> str:
    return f"{app_id}#users"


def _digest_password(password: str, iterations: int) -> str:
    salt = os.urandom(16)
    dk = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"pbkdf2-sha256${iterations}${salt.hex()}${dk.hex()}"


def _verify_password(password: str, digest: str) -> bool:
    try:
        _, iters, salt_hex, dk_hex = digest.split("$")
        dk = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iters)
        )
        return hmac.compare_digest(dk.hex(), dk_hex)
    except (ValueError, TypeError):
        return False


class UserDirectory:
    """Users API core, layered on the engine and the app registry."""

    def __init__(self, engine: Engine, registry: AppRegistry, iterations: int = DEFAULT_ITERATIONS):
        self._engine = engine
        self._registry = registry
        self._iterations = iterations
        self._lock = threading.Lock()
        # app_id -> {username -> record_id} and {user_id -> record_id},
        # lazily rebuilt from the engine after a restart.
        self._by_name: dict[str, dict[str, str]] = {}
        self._by_id: dict[str, dict[str, str]] = {}
        # (user_id, sha256(password)) -> True; spares the slow digest on
        # repeated per-request credential checks.
        self._verified: dict[tuple[str, str], bool] = {}

    # -- index upkeep --------------------------------------------------------

    def _indexes(self, app_id: str) -> tuple[dict[str, str], dict[str, str]]:
        if app_id not in self._by_name:
            by_name: dict[str, str] = {}
            by_id: dict[str, str] = {}
            for rec in self._engine.scan(_users_namespace(app_id), Scope.static()):
                row = json.loads(rec.fields["account"].value)
                by_name[row["username"]] = rec.record_id
                by_id[row["userID"]] = rec.record_id
            self._by_name[app_id] = by_name
            self._by_id[app_id] = by_id
        return self._by_name[app_id], self._by_id[app_id]

    def _load_account(self, app_id: str, record_id: str) -> dict:
        rec = self._engine.get_record(_users_namespace(app_id), record_id)
        return json.loads(rec.fields["account"].value)

    def _store_account(self, app_id: str, record_id: str, row: dict) -> None:
        self._engine.update_record(
            _users_namespace(app_id),
            record_id,
            {"account": FieldEntry(json.dumps(row, ensure_ascii=False), "private")},
        )

    def _require_app(self, app_id: str) -> None:
        if not self._registry.app_exists(app_id):
            raise UnknownApp(f"no app {app_id!r}")

    # -- operations ------------------------------------------------------------

    def create_user(
        self, app_id: str, username: str, password: str, attributes: Optional[dict] = None
    ) -> str:
        self._require_app(app_id)
        if not username or len(username) > 64:
            raise ValidationError("username must be 1-64 characters")
        if not password:
            raise ValidationError("password must not be empty")
        attributes = dict(attributes or {})
        for k, v in attributes.items():
            if not isinstance(k, str) or not isinstance(v, str):
                raise ValidationError("attributes must map strings to strings")
        with self._lock:
            by_name, by_id = self._indexes(app_id)
            if username in by_name:
                raise DuplicateUsername(f"username {username!r} already taken")
            # Deterministic for identical engine histories, fresh after a
            # delete (the engine seq only moves forward).
            seed = f"{app_id}\x00{username}\x00{self._engine.next_seq}"
            user_id = "u" + hashlib.sha256(seed.encode("utf-8")).hexdigest()[:31]
            row = {
                "userID": user_id,
                "username": username,
                "digest": _digest_password(password, self._iterations),
                "attributes": attributes,
            }
            rec = self._engine.append_record(
                _users_namespace(app_id),
                Scope.static(),
                _COLLECTION,
                {"account": FieldEntry(json.dumps(row, ensure_ascii=False), "private")},
            )
            by_name[username] = rec.record_id
            by_id[user_id] = rec.record_id
        return user_id

    def authenticate(self, app_id: str, username: str, password: str) -> Optional[str]:
        """userID on success, None otherwise; unknown user and bad password
        are deliberately indistinguishable."""
        self._require_app(app_id)
        with self._lock:
            by_name, _ = self._indexes(app_id)
            record_id = by_name.get(username)
        if record_id is None:
            return None
        row = self._load_account(app_id, record_id)
        if self._check(row, password):
            return row["userID"]
        return None

    def verify_credentials(self, app_id: str, user_id: str, password: str) -> bool:
        """Per-request principal check: userID + password headers."""
        if not self._registry.app_exists(app_id):
            return False
        with self._lock:
            _, by_id = self._indexes(app_id)
            record_id = by_id.get(user_id)
        if record_id is None:
            return False
        return self._check(self._load_account(app_id, record_id), password)

    def _check(self, row: dict, password: str) -> bool:
        cache_key = (row["userID"], hashlib.sha256(password.encode("utf-8")).hexdigest())
        with self._lock:
            if cache_key in self._verified:
                return True
        ok = _verify_password(password, row["digest"])
        if ok:
            with self._lock:
                if len(self._verified) >= _CACHE_CAP:
                    self._verified.clear()
                self._verified[cache_key] = True
        return ok

    def _drop_cached(self, user_id: str) -> None:
        self._verified = {k: v for k, v in self._verified.items() if k[0] != user_id}

    def get_user(self, app_id: str, caller_user_id: Optional[str], target_username: str) -> dict:
        self._require_app(app_id)
        if caller_user_id is None:
            raise Unauthenticated("authentication required")
        with self._lock:
            by_name, _ = self._indexes(app_id)
            record_id = by_name.get(target_username)
        if record_id is None:
            raise NotFound(f"no user {target_username!r}")
        row = self._load_account(app_id, record_id)
        return {
            "userID": row["userID"],
            "username": row["username"],
            "attributes": dict(row["attributes"]),
        }

    def resolve_username(self, app_id: str, username: str) -> str:
        """Public username -> userID lookup backing the `userID=@name` query syntax."""
        self._require_app(app_id)
        with self._lock:
            by_name, _ = self._indexes(app_id)
            record_id = by_name.get(username)
        if record_id is None:
            raise NotFound(f"no user {username!r}")
        return self._load_account(app_id, record_id)["userID"]

    def update_user(
        self,
        app_id: str,
        caller_user_id: Optional[str],
        password: Optional[str] = None,
        attribute_patch: Optional[dict] = None,
    ) -> None:
        self._require_app(app_id)
        if caller_user_id is None:
            raise Unauthenticated("authentication required")
        if password is not None and not password:
            raise ValidationError("password must not be empty")
        with self._lock:
            _, by_id = self._indexes(app_id)
            record_id = by_id.get(caller_user_id)
        if record_id is None:
            raise Unauthenticated("unknown principal")
        row = self._load_account(app_id, record_id)
        if password is not None:
            row["digest"] = _digest_password(password, self._iterations)
            self._drop_cached(caller_user_id)
        for key, value in (attribute_patch or {}).items():
            if not isinstance(key, str) or not isinstance(value, str):
                raise ValidationError("attributes must map strings to strings")
            if value == "":
                row["attributes"].pop(key, None)  # empty value removes the key
            else:
                row["attributes"][key] = value
        self._store_account(app_id, record_id, row)

    def delete_user(self, app_id: str, caller_user_id: Optional[str]) -> None:
        self._require_app(app_id)
        if caller_user_id is None:
            raise Unauthenticated("authentication required")
        with self._lock:
            by_name, by_id = self._indexes(app_id)
            record_id = by_id.get(caller_user_id)
            if record_id is None:
                raise Unauthenticated("unknown principal")
            row = self._load_account(app_id, record_id)
            del by_id[caller_user_id]
            by_name.pop(row["username"], None)
        # The user's store records stay behind (tombstoned owner); only the
        # account row is removed.
        self._engine.delete_record(_users_namespace(app_id), record_id)
        self._drop_cached(caller_user_id)
