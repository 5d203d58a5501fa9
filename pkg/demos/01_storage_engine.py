#!/usr/bin/env python3
"""Walkthrough of the storage engine: writes, queries, snapshot, recovery.

Run directly:  python3 demos/01_storage_engine.py
Everything happens in a throwaway directory that is printed at the end so
you can inspect the log and snapshot files.
"""

import tempfile
from pathlib import Path

from flare.engine import Engine, FieldEntry, QuerySpec, Scope

workdir = Path(tempfile.mkdtemp(prefix="flare-demo-"))
print(f"engine data directory: {workdir}\n")

# -- 1. append a few records ----------------------------------------------

engine = Engine(workdir)
app = "demo-app"

for i in range(5):
    rec = engine.append_record(
        app,
        Scope.user("alice"),
        "posts",
        {"post": FieldEntry(f"post number {i}", "public" if i % 2 else "private")},
    )
    print(f"append -> {rec.record_id} seq={rec.stamp.seq}")

# -- 2. newest-first queries ------------------------------------------------

print("\nnewest three posts:")
for rec in engine.query_records(app, Scope.user("alice"), QuerySpec(["post"], count=3)):
    print(f"  seq={rec.stamp.seq} {rec.fields['post'].value!r}")

# -- 3. update keeps the recency rank, delete removes ------------------------

first = engine.query_records(app, Scope.user("alice"), QuerySpec(["post"]))[-1]
engine.update_record(app, first.record_id, {"post": FieldEntry("edited!", "public")})
print(f"\nafter update, seq unchanged: {engine.get_record(app, first.record_id).stamp.seq}")

engine.delete_record(app, first.record_id)
remaining = engine.query_records(app, Scope.user("alice"), QuerySpec(["post"]))
print(f"after delete, {len(remaining)} records remain")

# -- 4. snapshot compacts the log -------------------------------------------

log_size = (workdir / "flare.log").stat().st_size
engine.snapshot()
print(f"\nsnapshot written; log shrank from {log_size} to "
      f"{(workdir / 'flare.log').stat().st_size} bytes")
engine.close()

# -- 5. recovery rebuilds identical state ------------------------------------

with Engine(workdir) as recovered:
    rows = recovered.query_records(app, Scope.user("alice"), QuerySpec(["post"]))
    print(f"recovered engine sees {len(rows)} records, next seq {recovered.next_seq}")
    for rec in rows:
        print(f"  seq={rec.stamp.seq} {rec.fields['post'].value!r}")
