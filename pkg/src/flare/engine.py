"""Schema-less record store with an append-only log, snapshots, and crash recovery.

Every mutation (append / update / delete) is serialized through a single
writer lock, encoded as one length-prefixed log entry and flushed to disk
before the call returns.  Entry layout on disk:

    [4 bytes big-endian payload length][4 bytes big-endian CRC32][payload]

The payload is UTF-8 JSON.  The CRC32 is ``zlib.crc32`` over the payload
bytes, so any log reader can verify entries bit-exactly.

Recovery replays the snapshot (if present) and then the log.  A trailing
entry that does not span to the declared length, or whose checksum fails
while sitting at the very end of the file, is treated as a torn write and
dropped.  A checksum failure anywhere earlier means the file itself is
damaged and the engine refuses to open.

In-memory indexes (record id -> record, (app, scope) -> records in write
order) are rebuilt during recovery and are never persisted.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import re
import struct
import threading
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import CorruptLog, NotFound, StorageFull, ValidationError

logger = logging.getLogger(__name__)

LOG_FILENAME = "flare.log"
SNAPSHOT_FILENAME = "flare.snapshot"

# Hard server-side bounds (see module docs / README for rationale).
MAX_RESULTS = 100
MAX_VALUE_BYTES = 1024 * 1024

PRIVATE = "private"
PUBLIC = "public"

_FIELD_NAME_RE = re.compile(r"^[a-z0-9_]{1,64}$")
_COLLECTION_RE = re.compile(r"^[a-z0-9_-]{1,64}$")

_ENTRY_HEADER = struct.Struct(">II")


@dataclass(frozen=True)
class Scope:
    """Where a record lives: one user's store or the app-global static store."""

    kind: str  # "user" | "static"
    owner: Optional[str] = None

    @classmethod
    def user(cls, owner: str) -> "Scope":
        return cls("user", owner)

    @classmethod
    def static(cls) -> "Scope":
        return cls("static", None)

    def validate(self) -> None:
        if self.kind == "user":
            if not self.owner:
                raise ValidationError("user scope requires a non-empty owner")
        elif self.kind == "static":
            if self.owner is not None:
                raise ValidationError("static scope carries no owner")
        else:
            raise ValidationError(f"unknown scope kind {self.kind!r}")

    def key(self) -> tuple:
        return (self.kind, self.owner)


@dataclass(frozen=True)
class FieldEntry:
    """One stored field: opaque text plus its access flag (private unless said otherwise)."""

    value: str
    access: str = PRIVATE


@dataclass(frozen=True)
class Stamp:
    wall_millis: int
    seq: int


@dataclass
class Record:
    record_id: str
    app_id: str
    scope: Scope
    collection: str
    fields: dict[str, FieldEntry]
    stamp: Stamp

    def copy(self) -> "Record":
        return dataclasses.replace(self, fields=dict(self.fields))


@dataclass
class QuerySpec:
    """Filter for record queries; results are always newest-first."""

    field_names: list[str]
    count: Optional[int] = None
    owner_filter: Optional[str] = None
    collection: Optional[str] = None

    def validate(self) -> None:
        if not self.field_names:
            raise ValidationError("query needs at least one field name")
        for name in self.field_names:
            if not _FIELD_NAME_RE.match(name):
                raise ValidationError(f"bad field name {name!r}")
        if self.count is not None and self.count < 0:
            raise ValidationError("count must be >= 0")
        if self.collection is not None and not _COLLECTION_RE.match(self.collection):
            raise ValidationError(f"bad collection name {self.collection!r}")

    def limit(self) -> int:
        if self.count is None:
            return MAX_RESULTS
        return min(self.count, MAX_RESULTS)


def validate_fields(fields: dict[str, FieldEntry]) -> None:
    if not fields:
        raise ValidationError("at least one field is required")
    for name, entry in fields.items():
        if not _FIELD_NAME_RE.match(name):
            raise ValidationError(f"bad field name {name!r}")
        if not isinstance(entry.value, str):
            raise ValidationError(f"field {name!r} value must be text")
        if len(entry.value.encode("utf-8")) > MAX_VALUE_BYTES:
            raise ValidationError(f"field {name!r} exceeds the 1 MiB value cap")
        if entry.access not in (PRIVATE, PUBLIC):
            raise ValidationError(f"field {name!r} has invalid access {entry.access!r}")


def _encode_fields(fields: dict[str, FieldEntry]) -> dict:
    return {n: {"value": e.value, "access": e.access} for n, e in fields.items()}


def _decode_fields(raw: dict) -> dict[str, FieldEntry]:
    return {n: FieldEntry(v["value"], v["access"]) for n, v in raw.items()}


def _encode_record(rec: Record) -> dict:
    scope: dict = {"kind": rec.scope.kind}
    if rec.scope.owner is not None:
        scope["owner"] = rec.scope.owner
    return {
        "recordID": rec.record_id,
        "appID": rec.app_id,
        "scope": scope,
        "collection": rec.collection,
        "fields": _encode_fields(rec.fields),
        "stamp": {"wallMillis": rec.stamp.wall_millis, "seq": rec.stamp.seq},
    }


def _decode_record(raw: dict) -> Record:
    return Record(
        record_id=raw["recordID"],
        app_id=raw["appID"],
        scope=Scope(raw["scope"]["kind"], raw["scope"].get("owner")),
        collection=raw["collection"],
        fields=_decode_fields(raw["fields"]),
        stamp=Stamp(raw["stamp"]["wallMillis"], raw["stamp"]["seq"]),
    )


class Engine:
    """Durable, indexed record store behind the storage wrapper contract.

    ``fsync=False`` skips the per-write fsync; only test fixtures should do
    that, since it trades the crash-durability guarantee for speed.
    """

    def __init__(self, data_dir: str | os.PathLike, fsync: bool = True):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.data_dir / LOG_FILENAME
        self.snapshot_path = self.data_dir / SNAPSHOT_FILENAME
        self._fsync = fsync
        self._lock = threading.RLock()
        self._records: dict[str, Record] = {}
        self._scopes: dict[tuple, list[str]] = {}  # (app, kind, owner) -> ids in seq order
        self._next_seq = 1
        self._recover()
        self._log_file = open(self.log_path, "ab")

    # -- recovery ----------------------------------------------------------

    def _recover(self) -> None:
        if self.snapshot_path.exists():
            self._load_snapshot()
        if not self.log_path.exists():
            self.log_path.touch()
            return
        raw = self.log_path.read_bytes()
        offset = 0
        keep = 0  # end of the last fully valid entry
        while offset < len(raw):
            if offset + _ENTRY_HEADER.size > len(raw):
                break  # torn header
            length, crc = _ENTRY_HEADER.unpack_from(raw, offset)
            end = offset + _ENTRY_HEADER.size + length
            if end > len(raw):
                break  # torn payload
            payload = raw[offset + _ENTRY_HEADER.size : end]
            if zlib.crc32(payload) & 0xFFFFFFFF != crc:
                if end == len(raw):
                    break  # torn rewrite of the final entry
                raise CorruptLog(f"checksum mismatch at byte {offset}")
            try:
                entry = json.loads(payload.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise CorruptLog(f"undecodable entry at byte {offset}: {exc}")
            self._apply(entry)
            offset = end
            keep = end
        if keep < len(raw):
            logger.warning("dropping torn log tail (%d bytes)", len(raw) - keep)
            with open(self.log_path, "r+b") as fh:
                fh.truncate(keep)

    def _load_snapshot(self) -> None:
        try:
            snap = json.loads(self.snapshot_path.read_text("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CorruptLog(f"unreadable snapshot: {exc}")
        for raw in snap["records"]:
            self._insert(_decode_record(raw))
        self._next_seq = snap["nextSeq"]

    def _apply(self, entry: dict) -> None:
        # Replay tolerates entries already covered by the snapshot, which
        # happens if a crash lands between snapshot write and log truncation.
        op = entry["op"]
        if op == "append":
            rec = _decode_record(entry["record"])
            if rec.record_id not in self._records:
                self._insert(rec)
        elif op == "update":
            rec = self._records.get(entry["recordID"])
            if rec is not None:
                rec.fields.update(_decode_fields(entry["patch"]))
        elif op == "delete":
            rec = self._records.pop(entry["recordID"], None)
            if rec is not None:
                self._scopes[(rec.app_id,) + rec.scope.key()].remove(rec.record_id)
        else:
            raise CorruptLog(f"unknown log op {op!r}")
        self._next_seq = max(self._next_seq, entry["seq"] + 1)

    def _insert(self, rec: Record) -> None:
        self._records[rec.record_id] = rec
        self._scopes.setdefault((rec.app_id,) + rec.scope.key(), []).append(rec.record_id)

    # -- log writing -------------------------------------------------------

    def _write_entry(self, entry: dict) -> None:
        payload = json.dumps(entry, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
        header = _ENTRY_HEADER.pack(len(payload), zlib.crc32(payload) & 0xFFFFFFFF)
        try:
            self._log_file.write(header + payload)
            self._log_file.flush()
            if self._fsync:
                os.fsync(self._log_file.fileno())
        except OSError as exc:
            raise StorageFull(f"log device error: {exc}")

    # -- mutations ---------------------------------------------------------

    def append_record(
        self,
        app_id: str,
        scope: Scope,
        collection: str,
        fields: dict[str, FieldEntry],
    ) -> Record:
        scope.validate()
        if not _COLLECTION_RE.match(collection):
            raise ValidationError(f"bad collection name {collection!r}")
        validate_fields(fields)
        with self._lock:
            seq = self._next_seq
            rec = Record(
                record_id=f"r{seq:012x}",
                app_id=app_id,
                scope=scope,
                collection=collection,
                fields=dict(fields),
                stamp=Stamp(int(time.time() * 1000), seq),
            )
            self._write_entry({"op": "append", "seq": seq, "record": _encode_record(rec)})
            self._next_seq = seq + 1
            self._insert(rec)
            return rec.copy()

    def update_record(self, app_id: str, record_id: str, patch: dict[str, FieldEntry]) -> Record:
        validate_fields(patch)
        with self._lock:
            rec = self._owned(app_id, record_id)
            seq = self._next_seq
            self._write_entry(
                {"op": "update", "seq": seq, "recordID": record_id, "patch": _encode_fields(patch)}
            )
            self._next_seq = seq + 1
            rec.fields.update(patch)
            return rec.copy()

    def delete_record(self, app_id: str, record_id: str) -> None:
        with self._lock:
            rec = self._owned(app_id, record_id)
            seq = self._next_seq
            self._write_entry({"op": "delete", "seq": seq, "recordID": record_id})
            self._next_seq = seq + 1
            del self._records[record_id]
            self._scopes[(rec.app_id,) + rec.scope.key()].remove(record_id)

    def _owned(self, app_id: str, record_id: str) -> Record:
        rec = self._records.get(record_id)
        if rec is None or rec.app_id != app_id:
            raise NotFound(f"no record {record_id!r}")
        return rec

    # -- reads -------------------------------------------------------------

    def get_record(self, app_id: str, record_id: str) -> Record:
        with self._lock:
            return self._owned(app_id, record_id).copy()

    def query_records(self, app_id: str, scope: Scope, spec: QuerySpec) -> list[Record]:
        """Newest-first records matching the query spec; capped at MAX_RESULTS.

        Visibility is intentionally not applied here; the store service
        filters fields one layer up.
        """
        spec.validate()
        scope.validate()
        with self._lock:
            if scope.kind == "user":
                owner = spec.owner_filter or scope.owner
                ids = self._scopes.get((app_id, "user", owner), ())
            else:
                ids = self._scopes.get((app_id, "static", None), ())
            out: list[Record] = []
            limit = spec.limit()
            wanted = set(spec.field_names)
            for record_id in reversed(ids):  # ids are in seq order
                if len(out) >= limit:
                    break
                rec = self._records[record_id]
                if spec.collection is not None and rec.collection != spec.collection:
                    continue
                if wanted.isdisjoint(rec.fields):
                    continue
                out.append(rec.copy())
            return out

    def query_records_fullscan(self, app_id: str, scope: Scope, spec: QuerySpec) -> list[Record]:
        """Index-free twin of query_records, kept for differential testing."""
        spec.validate()
        scope.validate()
        with self._lock:
            if scope.kind == "user":
                owner = spec.owner_filter or scope.owner
                target = Scope.user(owner)
            else:
                target = Scope.static()
            wanted = set(spec.field_names)
            matches = [
                rec
                for rec in self._records.values()
                if rec.app_id == app_id
                and rec.scope == target
                and (spec.collection is None or rec.collection == spec.collection)
                and not wanted.isdisjoint(rec.fields)
            ]
            matches.sort(key=lambda r: r.stamp.seq, reverse=True)
            return [rec.copy() for rec in matches[: spec.limit()]]

    def scan(self, app_id: str, scope: Scope) -> list[Record]:
        """All live records of one scope in write order; internal, uncapped."""
        with self._lock:
            ids = self._scopes.get((app_id,) + scope.key(), ())
            return [self._records[i].copy() for i in ids]

    # -- maintenance -------------------------------------------------------

    def snapshot(self) -> None:
        """Persist full state and truncate the log it covers."""
        with self._lock:
            ordered = sorted(self._records.values(), key=lambda r: r.stamp.seq)
            snap = {
                "version": 1,
                "nextSeq": self._next_seq,
                "records": [_encode_record(r) for r in ordered],
            }
            tmp = self.snapshot_path.with_suffix(".tmp")
            try:
                with open(tmp, "w", encoding="utf-8") as fh:
                    json.dump(snap, fh, separators=(",", ":"), ensure_ascii=False)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, self.snapshot_path)
                self._log_file.close()
                self._log_file = open(self.log_path, "wb")
                self._log_file.flush()
                if self._fsync:
                    os.fsync(self._log_file.fileno())
                self._log_file.close()
                self._log_file = open(self.log_path, "ab")
            except OSError as exc:
                raise StorageFull(f"snapshot failed: {exc}")

    @property
    def next_seq(self) -> int:
        with self._lock:
            return self._next_seq

    def record_count(self) -> int:
        with self._lock:
            return len(self._records)

    def close(self) -> None:
        with self._lock:
            if not self._log_file.closed:
                self._log_file.close()

    def __enter__(self) -> "Engine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
