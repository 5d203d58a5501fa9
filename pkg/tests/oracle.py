"""Brute-force reference implementations used to cross-check query results.

These deliberately re-state the contracts as literal linear scans over a
plain list of record dicts, independent of the engine's indexes and of the
store service's filter code.
"""

from __future__ import annotations

MAX_RESULTS = 100


def brute_force_query(records, app_id, kind, owner, field_names, count, collection):
    """Literal restatement of the engine query contract.

    ``records`` is a list of dicts with keys: record_id, app_id, kind,
    owner, collection, fields (name -> (value, access)), seq.
    """
    matches = []
    for rec in records:
        if rec["app_id"] != app_id:
            continue
        if rec["kind"] != kind:
            continue
        if kind == "user" and rec["owner"] != owner:
            continue
        if collection is not None and rec["collection"] != collection:
            continue
        if not any(name in rec["fields"] for name in field_names):
            continue
        matches.append(rec)
    matches.sort(key=lambda r: r["seq"], reverse=True)
    limit = MAX_RESULTS if count is None else min(count, MAX_RESULTS)
    return matches[:limit]


def brute_force_visible(records, app_id, kind, owner, principal, field_names, count, collection):
    """Engine query oracle plus the literal visibility rule of the store layer.

    Returns (record_id, {field: value}) pairs: the engine-capped newest
    matches are field-filtered for the principal, records left with no
    visible requested field are dropped, and only then is the caller's
    count applied.
    """
    engine_rows = brute_force_query(
        records, app_id, kind, owner, field_names, None, collection
    )
    visible = []
    for rec in engine_rows:
        fields = {}
        for name in field_names:
            if name not in rec["fields"]:
                continue
            value, access = rec["fields"][name]
            if kind == "static" or principal == rec["owner"] or access == "public":
                fields[name] = value
        if fields:
            visible.append((rec["record_id"], fields))
    limit = MAX_RESULTS if count is None else min(count, MAX_RESULTS)
    return visible[:limit]
