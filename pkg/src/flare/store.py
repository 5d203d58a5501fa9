"""Storage API semantics: userStore / staticStore with per-field visibility.

The engine below this layer knows nothing about access flags.  Everything
a caller may or may not see is decided here:

* owners read their own records in full (public and private fields);
* anyone else, authenticated or anonymous, sees only ``public`` fields;
* records left with no visible requested field are dropped and do not
  consume result-count slots, so "ten posts" means ten visible posts
  (within the newest 100 matching records, the server-wide cap);
* staticStore records belong to the app as a whole: every field is
  readable by any caller, while writes still require a logged-in user.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

from .engine import (
    MAX_RESULTS,
    PRIVATE,
    PUBLIC,
    Engine,
    FieldEntry,
    QuerySpec,
    Record,
    Scope,
)
from .errors import Forbidden, NotFound, Unauthenticated, ValidationError

USER_STORE = "userStore"
STATIC_STORE = "staticStore"


@dataclasses.dataclass
class VisibleRecord:
    """A record as one principal is allowed to see it."""

    record_id: str
    owner_id: Optional[str]
    collection: str
    fields: dict[str, str]
    wall_millis: int
    seq: int


def parse_field_map(data: dict) -> dict[str, FieldEntry]:
    """Wire shape {name: {value, access?}} -> field entries (private default)."""
    if not isinstance(data, dict) or not data:
        raise ValidationError("fields must be a non-empty object")
    fields = {}
    for name, spec in data.items():
        if not isinstance(spec, dict) or "value" not in spec:
            raise ValidationError(f"field {name!r} needs a value")
        access = spec.get("access", PRIVATE)
        fields[name] = FieldEntry(value=spec["value"], access=access)
    return fields


class StoreService:
    def __init__(self, engine: Engine):
        self._engine = engine

    # -- writes --------------------------------------------------------------

    def put(
        self,
        app_id: str,
        principal: Optional[str],
        store_kind: str,
        collection: str,
        data: dict,
    ) -> str:
        scope = self._write_scope(store_kind, principal)
        fields = parse_field_map(data)
        rec = self._engine.append_record(app_id, scope, collection, fields)
        return rec.record_id

    def update(
        self,
        app_id: str,
        principal: Optional[str],
        store_kind: str,
        record_id: str,
        patch: dict,
    ) -> None:
        rec = self._modifiable(app_id, principal, store_kind, record_id)
        self._engine.update_record(app_id, rec.record_id, parse_field_map(patch))

    def delete(
        self,
        app_id: str,
        principal: Optional[str],
        store_kind: str,
        record_id: str,
    ) -> None:
        rec = self._modifiable(app_id, principal, store_kind, record_id)
        self._engine.delete_record(app_id, rec.record_id)

    def _write_scope(self, store_kind: str, principal: Optional[str]) -> Scope:
        if principal is None:
            raise Unauthenticated("store writes require authentication")
        if store_kind == USER_STORE:
            return Scope.user(principal)
        if store_kind == STATIC_STORE:
            return Scope.static()
        raise ValidationError(f"unknown store {store_kind!r}")

    def _modifiable(
        self, app_id: str, principal: Optional[str], store_kind: str, record_id: str
    ) -> Record:
        if store_kind not in (USER_STORE, STATIC_STORE):
            raise ValidationError(f"unknown store {store_kind!r}")
        if principal is None:
            raise Unauthenticated("store writes require authentication")
        rec = self._engine.get_record(app_id, record_id)
        expected_kind = "user" if store_kind == USER_STORE else "static"
        if rec.scope.kind != expected_kind:
            raise NotFound(f"no record {record_id!r} in {store_kind}")
        if rec.scope.kind == "user" and rec.scope.owner != principal:
            raise Forbidden("only the record owner may modify it")
        return rec

    # -- reads ---------------------------------------------------------------

    def get(
        self,
        app_id: str,
        principal: Optional[str],
        store_kind: str,
        spec: QuerySpec,
    ) -> list[VisibleRecord]:
        spec.validate()
        if store_kind == USER_STORE:
            if spec.owner_filter is None:
                if principal is None:
                    raise Unauthenticated("reading your own store requires authentication")
                scope = Scope.user(principal)
            else:
                scope = Scope.user(spec.owner_filter)
        elif store_kind == STATIC_STORE:
            if spec.owner_filter is not None:
                raise ValidationError("userID filter does not apply to staticStore")
            scope = Scope.static()
        else:
            raise ValidationError(f"unknown store {store_kind!r}")

        # Ask the engine for its full cap, filter, then apply the caller's
        # count: dropped records must not consume count slots.
        engine_spec = dataclasses.replace(spec, count=MAX_RESULTS)
        out: list[VisibleRecord] = []
        limit = spec.limit()
        for rec in self._engine.query_records(app_id, scope, engine_spec):
            if len(out) >= limit:
                break
            visible = self._visible_fields(rec, principal, spec.field_names)
            if not visible:
                continue
            out.append(
                VisibleRecord(
                    record_id=rec.record_id,
                    owner_id=rec.scope.owner,
                    collection=rec.collection,
                    fields=visible,
                    wall_millis=rec.stamp.wall_millis,
                    seq=rec.stamp.seq,
                )
            )
        return out

    def static_recent(
        self, app_id: str, principal: Optional[str], spec: QuerySpec
    ) -> list[VisibleRecord]:
        """staticStore query; identical results for every caller of the app."""
        return self.get(app_id, principal, STATIC_STORE, spec)

    @staticmethod
    def _visible_fields(
        rec: Record, principal: Optional[str], requested: list[str]
    ) -> dict[str, str]:
        is_owner = rec.scope.kind == "static" or (
            principal is not None and rec.scope.owner == principal
        )
        visible = {}
        for name in requested:
            entry = rec.fields.get(name)
            if entry is None:
                continue
            if is_owner or entry.access == PUBLIC:
                visible[name] = entry.value
        return visible
