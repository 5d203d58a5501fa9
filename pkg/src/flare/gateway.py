"""Unified Web API: one contract per service group, many providers behind it.

Nine service groups exist; only blogging ships with working providers:

* ``mockblog`` keeps posts in memory and offers a ``word_count`` extra;
* ``loopback`` stores posts in the owning app's staticStore, which proves
  the point of the contract: same calls, interchangeable backends.

Provider connections ("handles") are persisted as private records in the
connecting user's userStore, so they survive restarts and are only usable
by their owner.  Mockblog post content itself is in-memory by design.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass
from typing import Optional

from .engine import Engine, FieldEntry, QuerySpec, Scope
from .errors import (
    InvalidHandle,
    NotFound,
    UnknownProvider,
    UnsupportedFeature,
)
from .store import STATIC_STORE, StoreService

GROUPS = (
    "blogging",
    "email",
    "instant_messaging",
    "social_networks",
    "feeds",
    "offbeat_devices",
    "maps",
    "search",
    "media",
)

_HANDLE_COLLECTION = "web-handles"


@dataclass(frozen=True)
class BlogPost:
    post_ref: str
    title: str
    body: str
    published_at: int  # wall-clock millis


@dataclass(frozen=True)
class Handle:
    handle_id: str
    app_id: str
    user_id: str
    provider_id: str


class MockBlogProvider:
    """In-memory blogging backend; the reference for conformance tests."""

    provider_id = "mockblog"
    capabilities = frozenset({"word_count"})

    def __init__(self):
        self._posts: dict[str, list[BlogPost]] = {}
        self._counter = 0

    def connect(self, handle: Handle, credentials: dict) -> None:
        self._posts.setdefault(handle.handle_id, [])

    def create_post(self, handle: Handle, title: str, body: str) -> str:
        self._counter += 1
        post = BlogPost(f"mb{self._counter:08d}", title, body, int(time.time() * 1000))
        self._posts.setdefault(handle.handle_id, []).append(post)
        return post.post_ref

    def recent_posts(self, handle: Handle, count: int) -> list[BlogPost]:
        posts = self._posts.get(handle.handle_id, [])
        return list(reversed(posts))[: max(count, 0)]

    def extra(self, handle: Handle, feature: str, params: dict) -> dict:
        if feature == "word_count":
            ref = params.get("postRef")
            for post in self._posts.get(handle.handle_id, []):
                if post.post_ref == ref:
                    return {"words": len(post.body.split())}
            raise NotFound(f"no post {ref!r}")
        raise UnsupportedFeature(feature)


class LoopbackProvider:
    """Blogging backend that writes into the app's own staticStore.

    Each handle gets its own collection, so two connections never share a
    post stream, while the posts remain public app data reachable through
    ordinary staticStore queries.
    """

    provider_id = "loopback"
    capabilities = frozenset()

    def __init__(self, store: StoreService):
        self._store = store

    @staticmethod
    def _collection(handle: Handle) -> str:
        return f"blog-{handle.handle_id[1:17]}"

    def connect(self, handle: Handle, credentials: dict) -> None:
        pass

    def create_post(self, handle: Handle, title: str, body: str) -> str:
        return self._store.put(
            handle.app_id,
            handle.user_id,
            STATIC_STORE,
            self._collection(handle),
            {
                "title": {"value": title, "access": "public"},
                "body": {"value": body, "access": "public"},
            },
        )

    def recent_posts(self, handle: Handle, count: int) -> list[BlogPost]:
        spec = QuerySpec(
            ["title", "body"], count=max(count, 0), collection=self._collection(handle)
        )
        rows = self._store.static_recent(handle.app_id, handle.user_id, spec)
        return [
            BlogPost(row.record_id, row.fields["title"], row.fields["body"], row.wall_millis)
            for row in rows
        ]

    def extra(self, handle: Handle, feature: str, params: dict) -> dict:
        raise UnsupportedFeature(feature)


class WebGateway:
    def __init__(self, engine: Engine, store: StoreService):
        self._engine = engine
        self._providers = {
            "mockblog": MockBlogProvider(),
            "loopback": LoopbackProvider(store),
        }
        self._store = store
        self._guard = threading.Lock()
        self._handle_locks: dict[str, threading.Lock] = {}

    # -- catalogue -----------------------------------------------------------

    def list_groups(self) -> list[str]:
        return list(GROUPS)

    def group_implemented(self, group: str) -> bool:
        if group not in GROUPS:
            raise NotFound(f"unknown service group {group!r}")
        return group == "blogging"

    def list_providers(self, group: str) -> list[dict]:
        if not self.group_implemented(group):
            return []
        return [
            {"providerID": p.provider_id, "capabilities": sorted(p.capabilities)}
            for p in self._providers.values()
        ]

    # -- handles -------------------------------------------------------------

    def connect(self, app_id: str, user_id: str, provider_id: str, credentials: dict) -> str:
        provider = self._providers.get(provider_id)
        if provider is None:
            raise UnknownProvider(f"no provider {provider_id!r}")
        handle = Handle("h" + secrets.token_hex(16), app_id, user_id, provider_id)
        provider.connect(handle, credentials)
        payload = {"handleID": handle.handle_id, "providerID": provider_id}
        self._engine.append_record(
            app_id,
            Scope.user(user_id),
            _HANDLE_COLLECTION,
            {"web_handle": FieldEntry(json.dumps(payload), "private")},
        )
        return handle.handle_id

    def disconnect(self, app_id: str, user_id: str, handle_id: str) -> None:
        record_id = self._handle_record(app_id, user_id, handle_id)
        self._engine.delete_record(app_id, record_id)
        with self._guard:
            self._handle_locks.pop(handle_id, None)

    def _handle_record(self, app_id: str, user_id: str, handle_id: str) -> str:
        for rec in self._engine.scan(app_id, Scope.user(user_id)):
            if rec.collection != _HANDLE_COLLECTION:
                continue
            payload = json.loads(rec.fields["web_handle"].value)
            if payload["handleID"] == handle_id:
                return rec.record_id
        raise InvalidHandle(f"no handle {handle_id!r}")

    def _resolve(self, app_id: str, user_id: Optional[str], handle_id: str) -> Handle:
        if user_id is None:
            raise InvalidHandle("handles are bound to an authenticated user")
        for rec in self._engine.scan(app_id, Scope.user(user_id)):
            if rec.collection != _HANDLE_COLLECTION:
                continue
            payload = json.loads(rec.fields["web_handle"].value)
            if payload["handleID"] == handle_id:
                return Handle(handle_id, app_id, user_id, payload["providerID"])
        raise InvalidHandle(f"no handle {handle_id!r}")

    def _handle_lock(self, handle_id: str) -> threading.Lock:
        with self._guard:
            return self._handle_locks.setdefault(handle_id, threading.Lock())

    # -- blogging contract -----------------------------------------------------

    def create_post(
        self, app_id: str, user_id: Optional[str], handle_id: str, title: str, body: str
    ) -> str:
        handle = self._resolve(app_id, user_id, handle_id)
        with self._handle_lock(handle_id):
            return self._providers[handle.provider_id].create_post(handle, title, body)

    def recent_posts(
        self, app_id: str, user_id: Optional[str], handle_id: str, count: int
    ) -> list[BlogPost]:
        handle = self._resolve(app_id, user_id, handle_id)
        with self._handle_lock(handle_id):
            return self._providers[handle.provider_id].recent_posts(handle, count)

    def invoke_extra(
        self, app_id: str, user_id: Optional[str], handle_id: str, feature: str, params: dict
    ) -> dict:
        handle = self._resolve(app_id, user_id, handle_id)
        provider = self._providers[handle.provider_id]
        if feature not in provider.capabilities:
            raise UnsupportedFeature(f"{handle.provider_id} does not support {feature!r}")
        with self._handle_lock(handle_id):
            return provider.extra(handle, feature, params)
