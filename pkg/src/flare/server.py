"""REST transport: one JSON binding over the storage, users, and web APIs.

Endpoint table (all under /v1):

    POST   /apps                                        register app
    POST   /apps/{appID}/users                          create user
    POST   /apps/{appID}/users/authenticate             login check
    GET    /apps/{appID}/users/{username}               public profile view
    PATCH  /apps/{appID}/users/me                       update own account
    DELETE /apps/{appID}/users/me                       delete own account
    POST   /apps/{appID}/{store}/records                put record
    GET    /apps/{appID}/{store}/records                query records
    PATCH  /apps/{appID}/{store}/records/{recordID}     patch record
    DELETE /apps/{appID}/{store}/records/{recordID}     delete record
    GET    /apps/{appID}/web/groups                     the nine groups
    GET    /apps/{appID}/web/{group}/providers          providers or 501 marker
    POST   /apps/{appID}/web/blogging/{provider}/connect
    POST   /apps/{appID}/web/blogging/{handleID}/posts
    GET    /apps/{appID}/web/blogging/{handleID}/posts
    POST   /apps/{appID}/web/blogging/{handleID}/extra/{feature}

{store} is userStore or staticStore.  Credentials ride in the
X-Flare-User / X-Flare-Password headers on every request; the dedicated
authenticate endpoint reports failure as a normal {"ok": false} result,
not as a transport error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import secrets
import sys
from contextlib import asynccontextmanager
from typing import Any, Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from .config import ServerConfig, load_config
from .engine import Engine, QuerySpec
from .errors import FlareError, Unauthenticated, UnknownApp, ValidationError
from .gateway import WebGateway
from .registry import AppRegistry
from .store import StoreService
from .users import UserDirectory

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class Services:
    config: ServerConfig
    engine: Engine
    registry: AppRegistry
    users: UserDirectory
    store: StoreService
    gateway: WebGateway


@dataclasses.dataclass
class RequestContext:
    app_id: str
    principal: Optional[str]  # verified userID, or None for anonymous
    request_id: str


def json_response(payload: Any, status: int = 200) -> Response:
    # One serializer for every response keeps bodies byte-stable.
    return Response(
        content=json.dumps(payload, separators=(",", ":"), ensure_ascii=False),
        status_code=status,
        media_type="application/json",
    )


async def read_body(request: Request, allow_empty: bool = False) -> dict:
    raw = await request.body()
    if not raw:
        if allow_empty:
            return {}
        raise ValidationError("request body must be a JSON object")
    try:
        body = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise ValidationError("request body must be valid JSON")
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    return body


def create_app(config: ServerConfig) -> FastAPI:
    engine = Engine(config.data_dir, fsync=config.fsync)
    registry = AppRegistry(engine, config.dev_keys)
    users = UserDirectory(engine, registry, iterations=config.digest_iterations)
    store = StoreService(engine)
    gateway = WebGateway(engine, store)
    services = Services(config, engine, registry, users, store, gateway)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        engine.close()

    app = FastAPI(
        title="flare", docs_url=None, redoc_url=None, openapi_url=None, lifespan=lifespan
    )
    app.state.services = services

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(FlareError)
    async def flare_error_handler(request: Request, exc: FlareError):
        return json_response({"error": exc.code, "message": exc.message}, exc.http_status)

    @app.middleware("http")
    async def tag_request(request: Request, call_next):
        request.state.request_id = secrets.token_hex(8)
        response = await call_next(request)
        logger.info(
            "%s %s %s -> %d",
            request.state.request_id,
            request.method,
            request.url.path,
            response.status_code,
        )
        return response

    def context(request: Request, app_id: str) -> RequestContext:
        if not registry.app_exists(app_id):
            raise UnknownApp(f"no app {app_id!r}")
        user = request.headers.get("x-flare-user")
        password = request.headers.get("x-flare-password")
        if user is None and password is None:
            principal = None
        elif user is None or password is None:
            raise Unauthenticated("both X-Flare-User and X-Flare-Password are required")
        elif users.verify_credentials(app_id, user, password):
            principal = user
        else:
            raise Unauthenticated("bad credentials")
        return RequestContext(app_id, principal, request.state.request_id)

    def require_principal(ctx: RequestContext) -> str:
        if ctx.principal is None:
            raise Unauthenticated("authentication required")
        return ctx.principal

    @app.get("/healthz")
    async def healthz():
        return json_response({"ok": True})

    # -- app registration ----------------------------------------------------

    @app.post("/v1/apps")
    async def register_app(request: Request):
        body = await read_body(request)
        app_id = registry.register_app(str(body.get("devKey", "")), str(body.get("appName", "")))
        return json_response({"appID": app_id})

    # -- users api -------------------------------------------------------------

    @app.post("/v1/apps/{app_id}/users")
    async def create_user(request: Request, app_id: str):
        context(request, app_id)
        body = await read_body(request)
        attributes = body.get("attributes", {})
        if not isinstance(attributes, dict):
            raise ValidationError("attributes must be an object")
        user_id = users.create_user(
            app_id,
            str(body.get("username", "")),
            str(body.get("password", "")),
            attributes,
        )
        return json_response({"userID": user_id})

    @app.post("/v1/apps/{app_id}/users/authenticate")
    async def authenticate(request: Request, app_id: str):
        if not registry.app_exists(app_id):
            raise UnknownApp(f"no app {app_id!r}")
        body = await read_body(request)
        user_id = users.authenticate(
            app_id, str(body.get("username", "")), str(body.get("password", ""))
        )
        if user_id is None:
            # A failed login is a result, not a transport error.
            return json_response({"ok": False})
        return json_response({"ok": True, "userID": user_id})

    @app.patch("/v1/apps/{app_id}/users/me")
    async def update_user(request: Request, app_id: str):
        ctx = context(request, app_id)
        principal = require_principal(ctx)
        body = await read_body(request)
        password = body.get("password")
        attributes = body.get("attributes")
        if password is not None and not isinstance(password, str):
            raise ValidationError("password must be a string")
        if attributes is not None and not isinstance(attributes, dict):
            raise ValidationError("attributes must be an object")
        users.update_user(app_id, principal, password=password, attribute_patch=attributes)
        return json_response({"ok": True})

    @app.delete("/v1/apps/{app_id}/users/me")
    async def delete_user(request: Request, app_id: str):
        ctx = context(request, app_id)
        users.delete_user(app_id, require_principal(ctx))
        return json_response({"ok": True})

    @app.get("/v1/apps/{app_id}/users/{username}")
    async def get_user(request: Request, app_id: str, username: str):
        ctx = context(request, app_id)
        view = users.get_user(app_id, require_principal(ctx), username)
        return json_response(view)

    # -- storage api -------------------------------------------------------------

    def record_payload(row) -> dict:
        out: dict[str, Any] = {"recordID": row.record_id}
        if row.owner_id is not None:
            out["ownerID"] = row.owner_id
        out["collection"] = row.collection
        out["stamp"] = {"wallMillis": row.wall_millis, "seq": row.seq}
        out["fields"] = row.fields
        return out

    @app.post("/v1/apps/{app_id}/{store_kind}/records")
    async def put_record(request: Request, app_id: str, store_kind: str):
        ctx = context(request, app_id)
        body = await read_body(request)
        fields = body.get("fields")
        if not isinstance(fields, dict):
            raise ValidationError("fields must be an object")
        record_id = store.put(
            app_id, ctx.principal, store_kind, str(body.get("collection", "")), fields
        )
        return json_response({"recordID": record_id})

    @app.get("/v1/apps/{app_id}/{store_kind}/records")
    async def query_records(request: Request, app_id: str, store_kind: str):
        ctx = context(request, app_id)
        params = request.query_params
        if "fields" not in params:
            raise ValidationError("fields query parameter is required")
        field_names = [f for f in params["fields"].split(",") if f]
        count: Optional[int] = None
        if "count" in params:
            try:
                count = int(params["count"])
            except ValueError:
                raise ValidationError("count must be an integer")
        owner_filter = params.get("userID")
        if owner_filter and owner_filter.startswith("@"):
            # Anonymous-friendly bridge from usernames to userIDs.
            owner_filter = users.resolve_username(app_id, owner_filter[1:])
        spec = QuerySpec(
            field_names,
            count=count,
            owner_filter=owner_filter,
            collection=params.get("collection"),
        )
        rows = store.get(app_id, ctx.principal, store_kind, spec)
        return json_response({"records": [record_payload(r) for r in rows]})

    @app.patch("/v1/apps/{app_id}/{store_kind}/records/{record_id}")
    async def patch_record(request: Request, app_id: str, store_kind: str, record_id: str):
        ctx = context(request, app_id)
        body = await read_body(request)
        fields = body.get("fields")
        if not isinstance(fields, dict):
            raise ValidationError("fields must be an object")
        store.update(app_id, ctx.principal, store_kind, record_id, fields)
        return json_response({"ok": True})

    @app.delete("/v1/apps/{app_id}/{store_kind}/records/{record_id}")
    async def delete_record(request: Request, app_id: str, store_kind: str, record_id: str):
        ctx = context(request, app_id)
        store.delete(app_id, ctx.principal, store_kind, record_id)
        return json_response({"ok": True})

    # -- web api -------------------------------------------------------------

    @app.get("/v1/apps/{app_id}/web/groups")
    async def list_groups(request: Request, app_id: str):
        context(request, app_id)
        return json_response({"groups": gateway.list_groups()})

    @app.get("/v1/apps/{app_id}/web/{group}/providers")
    async def list_providers(request: Request, app_id: str, group: str):
        context(request, app_id)
        if not gateway.group_implemented(group):
            return json_response(
                {"group": group, "implemented": False, "providers": []}, status=501
            )
        return json_response(
            {"group": group, "implemented": True, "providers": gateway.list_providers(group)}
        )

    @app.post("/v1/apps/{app_id}/web/blogging/{provider}/connect")
    async def connect_provider(request: Request, app_id: str, provider: str):
        ctx = context(request, app_id)
        principal = require_principal(ctx)
        body = await read_body(request, allow_empty=True)
        credentials = body.get("credentials", {})
        if not isinstance(credentials, dict):
            raise ValidationError("credentials must be an object")
        handle_id = gateway.connect(app_id, principal, provider, credentials)
        return json_response({"handleID": handle_id})

    @app.post("/v1/apps/{app_id}/web/blogging/{handle_id}/posts")
    async def create_post(request: Request, app_id: str, handle_id: str):
        ctx = context(request, app_id)
        body = await read_body(request)
        post_ref = gateway.create_post(
            app_id,
            ctx.principal,
            handle_id,
            str(body.get("title", "")),
            str(body.get("body", "")),
        )
        return json_response({"postRef": post_ref})

    @app.get("/v1/apps/{app_id}/web/blogging/{handle_id}/posts")
    async def list_posts(request: Request, app_id: str, handle_id: str):
        ctx = context(request, app_id)
        try:
            count = int(request.query_params.get("count", "10"))
        except ValueError:
            raise ValidationError("count must be an integer")
        posts = gateway.recent_posts(app_id, ctx.principal, handle_id, count)
        return json_response(
            {
                "posts": [
                    {
                        "postRef": p.post_ref,
                        "title": p.title,
                        "body": p.body,
                        "publishedAt": p.published_at,
                    }
                    for p in posts
                ]
            }
        )

    @app.post("/v1/apps/{app_id}/web/blogging/{handle_id}/extra/{feature}")
    async def invoke_extra(request: Request, app_id: str, handle_id: str, feature: str):
        ctx = context(request, app_id)
        params = await read_body(request, allow_empty=True)
        result = gateway.invoke_extra(app_id, ctx.principal, handle_id, feature, params)
        return json_response(result)

    if config.static_dir:
        app.mount("/app", StaticFiles(directory=config.static_dir, html=True), name="app")

    return app


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="flare-server", description="Run the flare web service")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    parser.add_argument("--data-dir")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    config = load_config(args.config)
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    if args.data_dir:
        config.data_dir = args.data_dir

    try:
        app = create_app(config)
    except FlareError as exc:
        print(f"fatal: {exc.code}: {exc.message}", file=sys.stderr)
        return 1

    import uvicorn

    uvicorn.run(
        app,
        host=config.host,
        port=config.port,
        log_level="warning",
        ssl_keyfile=config.tls_keyfile,
        ssl_certfile=config.tls_certfile,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
