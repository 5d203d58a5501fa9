"""Flutter: the micro-blogging demo client, command-line mode.

Same account and data as the browser mode, driven from a terminal:

    flutter signup alice secret
    flutter login alice secret
    flutter post "hello world"
    flutter post --private "draft"
    flutter timeline
    flutter view bob

Server URL and developer key come from (highest wins) command-line flags,
FLUTTER_SERVER / FLUTTER_DEV_KEY environment variables, and the config
file in the state directory (FLUTTER_HOME, default ~/.flutter).  Login
caches credentials in that directory with owner-only file permissions.

Exit codes: 0 success, 1 API error, 2 transport error.
"""

from __future__ import annotations

import argparse
import json
import os
import stat
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .client import APIError, FlareClient, StateError, TransportError

DEFAULT_SERVER = "http://127.0.0.1:8080"
DEFAULT_DEV_KEY = "F92KLF5434TR4H"
DEFAULT_APP_NAME = "flitterApp"


def state_dir() -> Path:
    return Path(os.environ.get("FLUTTER_HOME", "~/.flutter")).expanduser()


def _load_json(path: Path) -> dict:
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError):
        return {}


def load_settings(args: argparse.Namespace) -> dict:
    cfg = _load_json(state_dir() / "config.json")
    return {
        "server": args.server
        or os.environ.get("FLUTTER_SERVER")
        or cfg.get("server")
        or DEFAULT_SERVER,
        "devKey": os.environ.get("FLUTTER_DEV_KEY") or cfg.get("devKey") or DEFAULT_DEV_KEY,
        "appName": cfg.get("appName") or DEFAULT_APP_NAME,
    }


def save_credentials(creds: dict) -> None:
    directory = state_dir()
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "credentials.json"
    path.write_text(json.dumps(creds), "utf-8")
    path.chmod(stat.S_IRUSR | stat.S_IWUSR)  # owner-only


def load_credentials() -> Optional[dict]:
    creds = _load_json(state_dir() / "credentials.json")
    return creds if creds.get("userID") else None


def clear_credentials() -> None:
    path = state_dir() / "credentials.json"
    if path.exists():
        path.unlink()


def make_client(settings: dict, logged_in: bool = False) -> FlareClient:
    client = FlareClient(settings["server"], settings["devKey"])
    client.register_app(settings["appName"])
    if logged_in:
        creds = load_credentials()
        if creds is None:
            raise StateError("not logged in (run `flutter login` first)")
        client.user_id = creds["userID"]
        client._password = creds["password"]
    return client


def _format_post(record: dict) -> str:
    millis = record["stamp"]["wallMillis"]
    when = datetime.fromtimestamp(millis / 1000, tz=timezone.utc)
    return f"[{when.strftime('%Y-%m-%d %H:%M:%S')}] {record['fields']['post']}"


def _print_posts(records: list[dict], as_json: bool, empty_note: str) -> None:
    if as_json:
        print(json.dumps(records, ensure_ascii=False))
        return
    if not records:
        print(empty_note)
        return
    for record in records:
        print(_format_post(record))


def cmd_signup(args: argparse.Namespace) -> int:
    if not args.password:
        print("error: password must not be empty", file=sys.stderr)
        return 1
    settings = load_settings(args)
    with make_client(settings) as client:
        user_id = client.users.create(args.username, args.password)
        result = client.users.authenticate(args.username, args.password)
        save_credentials(
            {
                "username": args.username,
                "password": args.password,
                "userID": result.user_id,
                "server": settings["server"],
            }
        )
        print(f"created {user_id}")
    return 0


def cmd_login(args: argparse.Namespace) -> int:
    settings = load_settings(args)
    with make_client(settings) as client:
        result = client.users.authenticate(args.username, args.password)
        if not result.ok:
            print("authentication failure", file=sys.stderr)
            clear_credentials()
            return 1
        save_credentials(
            {
                "username": args.username,
                "password": args.password,
                "userID": result.user_id,
                "server": settings["server"],
            }
        )
        print(f"logged in as {args.username}")
    return 0


def cmd_post(args: argparse.Namespace) -> int:
    settings = load_settings(args)
    with make_client(settings, logged_in=True) as client:
        access = "private" if args.private else "public"
        record_id = client.user_store.put(
            {"post": {"value": args.text, "access": access}}, "posts"
        )
        if args.json:
            print(json.dumps({"recordID": record_id}))
        else:
            print(record_id)
    return 0


def cmd_timeline(args: argparse.Namespace) -> int:
    settings = load_settings(args)
    with make_client(settings, logged_in=True) as client:
        records = client.user_store.get(["post"], {"count": 10})
        _print_posts(records, args.json, "no posts")
    return 0


def cmd_view(args: argparse.Namespace) -> int:
    settings = load_settings(args)
    logged_in = load_credentials() is not None
    with make_client(settings, logged_in=logged_in) as client:
        if logged_in:
            target = client.users.get(args.username)["userID"]
        else:
            target = f"@{args.username}"  # server-side username resolution
        records = client.user_store.get(["post"], {"userID": target, "count": 10})
        _print_posts(records, args.json, "no posts")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", help="server URL override")
    common.add_argument("--json", action="store_true", help="emit raw wire records")

    parser = argparse.ArgumentParser(prog="flutter", description="micro-blogging demo client")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("signup", parents=[common], help="create an account and log in")
    p.add_argument("username")
    p.add_argument("password")
    p.set_defaults(func=cmd_signup)

    p = sub.add_parser("login", parents=[common], help="log in and cache credentials")
    p.add_argument("username")
    p.add_argument("password")
    p.set_defaults(func=cmd_login)

    p = sub.add_parser("post", parents=[common], help="publish a post")
    p.add_argument("text")
    p.add_argument("--private", action="store_true", help="store the post as private")
    p.set_defaults(func=cmd_post)

    p = sub.add_parser("timeline", parents=[common], help="your 10 newest posts")
    p.set_defaults(func=cmd_timeline)

    p = sub.add_parser("view", parents=[common], help="another user's 10 newest public posts")
    p.add_argument("username")
    p.set_defaults(func=cmd_view)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except APIError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except StateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
