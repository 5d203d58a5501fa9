"""Access library: a typed client over the REST wire format.

Applications talk to the service through this instead of hand-building
HTTP.  The session mirrors the server's three APIs (users, stores, web)
and caches credentials after a successful login so every later call is
authenticated automatically.

Every network method also accepts an optional ``on_complete(result, error)``
continuation; when supplied, exactly one of the two arguments is non-None
and nothing is raised, which mirrors callback-style callers.  API failures
(``APIError``, carrying the server's error code) and transport failures
(``TransportError``) stay distinguishable by type either way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Callable, Optional

import httpx

OnComplete = Callable[[Optional[Any], Optional[Exception]], None]


class ClientError(Exception):
    """Base class for everything this client raises."""


class StateError(ClientError):
    """Local misuse: the session is missing a key, app binding, or login."""


class TransportError(ClientError):
    """The server could not be reached or did not speak the wire format."""


class APIError(ClientError):
    """A failure envelope from the server."""

    def __init__(self, code: str, message: str, status: int):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.status = status


@dataclass
class AuthResult:
    ok: bool
    user_id: Optional[str] = None


class FlareClient:
    """One session against one server; safe to pass between threads."""

    def __init__(
        self,
        server_url: str,
        dev_key: Optional[str] = None,
        *,
        timeout: float = 10.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.server_url = server_url.rstrip("/")
        self.dev_key = dev_key
        self.app_id: Optional[str] = None
        self.user_id: Optional[str] = None
        self._password: Optional[str] = None
        self._http = httpx.Client(base_url=self.server_url, timeout=timeout, transport=transport)
        self.record_exchanges = False
        self.exchanges: list[dict] = []
        self.users = _UsersAPI(self)
        self.user_store = _StoreAPI(self, "userStore")
        self.static_store = _StoreAPI(self, "staticStore")
        self.web = _WebAPI(self)

    # -- plumbing ------------------------------------------------------------

    def _request(self, method: str, path: str, *, params=None, body=None, auth=True) -> Any:
        headers = {}
        if body is not None:
            headers["Content-Type"] = "application/json"
        if auth and self.user_id is not None:
            headers["X-Flare-User"] = self.user_id
            headers["X-Flare-Password"] = self._password or ""
        try:
            response = self._http.request(
                method,
                path,
                params=params,
                headers=headers,
                content=None if body is None else json.dumps(body, ensure_ascii=False),
            )
        except httpx.HTTPError as exc:
            raise TransportError(str(exc))
        if self.record_exchanges:
            self.exchanges.append(
                {
                    "method": method,
                    "path": path,
                    "status": response.status_code,
                    "body": response.content,
                }
            )
        try:
            payload = response.json()
        except json.JSONDecodeError:
            raise TransportError(f"non-JSON response (status {response.status_code})")
        # Failures always carry an {"error", "message"} envelope; anything
        # else is a result, including the 501 not-implemented group marker.
        if isinstance(payload, dict) and "error" in payload:
            raise APIError(payload["error"], payload.get("message", ""), response.status_code)
        return payload

    def _app_path(self, suffix: str) -> str:
        if self.app_id is None:
            raise StateError("register an app first (use_key + register_app)")
        return f"/v1/apps/{self.app_id}{suffix}"

    def _require_login(self) -> None:
        # Operations that need a principal fail fast without a round trip.
        if self.user_id is None:
            raise StateError("not authenticated (call users.authenticate first)")

    def _deliver(self, fn: Callable[[], Any], on_complete: Optional[OnComplete]) -> Any:
        if on_complete is None:
            return fn()
        try:
            result = fn()
        except Exception as exc:  # delivered, not raised
            on_complete(None, exc)
            return None
        on_complete(result, None)
        return result

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "FlareClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- developer api ---------------------------------------------------------

    def use_key(self, key: str) -> None:
        self.dev_key = key

    def register_app(self, app_name: str, on_complete: Optional[OnComplete] = None) -> str:
        def call():
            if self.dev_key is None:
                raise StateError("use_key must be called before register_app")
            payload = self._request(
                "POST", "/v1/apps", body={"devKey": self.dev_key, "appName": app_name}, auth=False
            )
            self.app_id = payload["appID"]
            return self.app_id

        return self._deliver(call, on_complete)

    def logout(self) -> None:
        self.user_id = None
        self._password = None


class _UsersAPI:
    def __init__(self, client: FlareClient):
        self._c = client

    def create(
        self,
        username: str,
        password: str,
        attributes: Optional[dict] = None,
        on_complete: Optional[OnComplete] = None,
    ) -> str:
        c = self._c

        def call():
            payload = c._request(
                "POST",
                c._app_path("/users"),
                body={"username": username, "password": password, "attributes": attributes or {}},
                auth=False,
            )
            return payload["userID"]

        return c._deliver(call, on_complete)

    def authenticate(
        self, username: str, password: str, on_complete: Optional[OnComplete] = None
    ) -> AuthResult:
        c = self._c

        def call():
            payload = c._request(
                "POST",
                c._app_path("/users/authenticate"),
                body={"username": username, "password": password},
                auth=False,
            )
            if not payload.get("ok"):
                return AuthResult(ok=False)
            # Cache the principal for all future calls on this session.
            c.user_id = payload["userID"]
            c._password = password
            return AuthResult(ok=True, user_id=c.user_id)

        return c._deliver(call, on_complete)

    def get(self, username: str, on_complete: Optional[OnComplete] = None) -> dict:
        c = self._c
        return c._deliver(lambda: c._request("GET", c._app_path(f"/users/{username}")), on_complete)

    def update(
        self,
        password: Optional[str] = None,
        attributes: Optional[dict] = None,
        on_complete: Optional[OnComplete] = None,
    ) -> None:
        c = self._c

        def call():
            c._require_login()
            body: dict = {}
            if password is not None:
                body["password"] = password
            if attributes is not None:
                body["attributes"] = attributes
            c._request("PATCH", c._app_path("/users/me"), body=body)
            if password is not None:
                c._password = password

        return c._deliver(call, on_complete)

    def delete(self, on_complete: Optional[OnComplete] = None) -> None:
        c = self._c

        def call():
            c._require_login()
            c._request("DELETE", c._app_path("/users/me"))
            c.logout()

        return c._deliver(call, on_complete)


class _StoreAPI:
    """Mirror of one store kind (userStore or staticStore)."""

    def __init__(self, client: FlareClient, kind: str):
        self._c = client
        self._kind = kind

    def put(self, data: dict, collection: str, on_complete: Optional[OnComplete] = None) -> str:
        c = self._c

        def call():
            c._require_login()
            payload = c._request(
                "POST",
                c._app_path(f"/{self._kind}/records"),
                body={"collection": collection, "fields": data},
            )
            return payload["recordID"]

        return c._deliver(call, on_complete)

    def get(
        self,
        field_names: list[str],
        query: Optional[dict] = None,
        on_complete: Optional[OnComplete] = None,
    ) -> list[dict]:
        c = self._c

        def call():
            params = {"fields": ",".join(field_names)}
            for key in ("count", "userID", "collection"):
                if query and key in query:
                    params[key] = query[key]
            payload = c._request("GET", c._app_path(f"/{self._kind}/records"), params=params)
            return payload["records"]

        return c._deliver(call, on_complete)

    def update(self, record_id: str, patch: dict, on_complete: Optional[OnComplete] = None) -> None:
        c = self._c

        def call():
            c._require_login()
            c._request(
                "PATCH", c._app_path(f"/{self._kind}/records/{record_id}"), body={"fields": patch}
            )

        return c._deliver(call, on_complete)

    def delete(self, record_id: str, on_complete: Optional[OnComplete] = None) -> None:
        c = self._c

        def call():
            c._require_login()
            c._request("DELETE", c._app_path(f"/{self._kind}/records/{record_id}"))

        return c._deliver(call, on_complete)


class _WebAPI:
    def __init__(self, client: FlareClient):
        self._c = client
        self.blogging = _BloggingAPI(client)

    def groups(self, on_complete: Optional[OnComplete] = None) -> list[str]:
        c = self._c
        return c._deliver(
            lambda: c._request("GET", c._app_path("/web/groups"))["groups"], on_complete
        )

    def providers(self, group: str, on_complete: Optional[OnComplete] = None) -> dict:
        c = self._c
        return c._deliver(
            lambda: c._request("GET", c._app_path(f"/web/{group}/providers")), on_complete
        )


class _BloggingAPI:
    def __init__(self, client: FlareClient):
        self._c = client

    def connect(
        self,
        provider: str,
        credentials: Optional[dict] = None,
        on_complete: Optional[OnComplete] = None,
    ) -> str:
        c = self._c

        def call():
            c._require_login()
            return c._request(
                "POST",
                c._app_path(f"/web/blogging/{provider}/connect"),
                body={"credentials": credentials or {}},
            )["handleID"]

        return c._deliver(call, on_complete)

    def create_post(
        self, handle_id: str, title: str, body: str, on_complete: Optional[OnComplete] = None
    ) -> str:
        c = self._c

        def call():
            c._require_login()
            return c._request(
                "POST",
                c._app_path(f"/web/blogging/{handle_id}/posts"),
                body={"title": title, "body": body},
            )["postRef"]

        return c._deliver(call, on_complete)

    def recent_posts(
        self, handle_id: str, count: int = 10, on_complete: Optional[OnComplete] = None
    ) -> list[dict]:
        c = self._c
        return c._deliver(
            lambda: c._request(
                "GET",
                c._app_path(f"/web/blogging/{handle_id}/posts"),
                params={"count": count},
            )["posts"],
            on_complete,
        )

    def extra(
        self,
        handle_id: str,
        feature: str,
        params: Optional[dict] = None,
        on_complete: Optional[OnComplete] = None,
    ) -> dict:
        c = self._c
        return c._deliver(
            lambda: c._request(
                "POST",
                c._app_path(f"/web/blogging/{handle_id}/extra/{feature}"),
                body=params or {},
            ),
            on_complete,
        )
