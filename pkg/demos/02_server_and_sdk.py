#!/usr/bin/env python3
"""End-to-end tour: server process, client sessions, visibility, web gateway.

Run directly:  python3 demos/02_server_and_sdk.py
Starts a real server on a free port, walks through the three APIs, and
shuts everything down again.
"""

import json
import socket
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import httpx

from flare.client import FlareClient

DEV_KEY = "F92KLF5434TR4H"


def start_server(workdir: Path) -> tuple[subprocess.Popen, str]:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    config = workdir / "config.json"
    config.write_text(json.dumps({
        "port": port,
        "data_dir": str(workdir / "data"),
        "dev_keys": [DEV_KEY],
        "digest_iterations": 2000,
    }))
    process = subprocess.Popen(
        [sys.executable, "-m", "flare.server", "--config", str(config)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
    )
    url = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            httpx.get(f"{url}/healthz", timeout=1.0)
            return process, url
        except httpx.HTTPError:
            time.sleep(0.05)
    raise RuntimeError("server did not start")


workdir = Path(tempfile.mkdtemp(prefix="flare-demo-"))
process, url = start_server(workdir)
print(f"server running at {url}\n")

try:
    # -- developer API: key + app name -> appID -----------------------------
    alice = FlareClient(url, dev_key=DEV_KEY)
    app_id = alice.register_app("flitterApp")
    print(f"registered flitterApp -> {app_id}")

    # -- users API ------------------------------------------------------------
    alice.users.create("alice", "secret", {"realname": "Alice A"})
    print("login (wrong password):", alice.users.authenticate("alice", "oops"))
    print("login (correct):      ", alice.users.authenticate("alice", "secret"))

    # -- storage API: visibility ------------------------------------------------
    alice.user_store.put({"post": {"value": "hello, world", "access": "public"}}, "posts")
    alice.user_store.put({"post": {"value": "my secret draft"}}, "posts")  # private

    own = [r["fields"]["post"] for r in alice.user_store.get(["post"], {"count": 10})]
    print(f"\nalice sees her own posts:  {own}")

    bob = FlareClient(url, dev_key=DEV_KEY)
    bob.register_app("flitterApp")
    bob.users.create("bob", "hunter2")
    bob.users.authenticate("bob", "hunter2")
    theirs = [
        r["fields"]["post"]
        for r in bob.user_store.get(["post"], {"userID": alice.user_id, "count": 10})
    ]
    print(f"bob sees only public ones: {theirs}")

    # -- web API: same calls, two providers ---------------------------------------
    print(f"\nservice groups: {', '.join(alice.web.groups())}")
    for provider in ("mockblog", "loopback"):
        handle = alice.web.blogging.connect(provider)
        alice.web.blogging.create_post(handle, "Fresh post", "one two three four")
        posts = alice.web.blogging.recent_posts(handle, 1)
        print(f"{provider:9s} newest post: {posts[0]['title']!r} / {posts[0]['body']!r}")

    handle = alice.web.blogging.connect("mockblog")
    ref = alice.web.blogging.create_post(handle, "Counted", "a b c")
    print("mockblog word_count extra:", alice.web.blogging.extra(handle, "word_count", {"postRef": ref}))

    # Loopback posts are ordinary public app data:
    rows = alice.static_store.get(["title", "body"], {"count": 5})
    print(f"staticStore holds {len(rows)} loopback post(s)")

    alice.close()
    bob.close()
finally:
    process.terminate()
    process.wait()
    print("\nserver stopped")
