#!/usr/bin/env python3
"""Two interfaces, one account: the flutter CLI and the SDK share all data.

Run directly:  python3 demos/03_two_interfaces.py
Posts written through the command-line client show up through the library
(and would equally show up in the browser client), because every interface
talks to the same userStore item.
"""

import json
import os
import socket
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import httpx

from flare.client import FlareClient
from flare.flutter import main as flutter

DEV_KEY = "F92KLF5434TR4H"

workdir = Path(tempfile.mkdtemp(prefix="flare-demo-"))

with socket.socket() as sock:
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
url = f"http://127.0.0.1:{port}"

config = workdir / "config.json"
config.write_text(json.dumps({
    "port": port,
    "data_dir": str(workdir / "data"),
    "dev_keys": [DEV_KEY],
    "digest_iterations": 2000,
}))
server = subprocess.Popen(
    [sys.executable, "-m", "flare.server", "--config", str(config)],
    stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
)
for _ in range(100):
    try:
        httpx.get(f"{url}/healthz", timeout=1.0)
        break
    except httpx.HTTPError:
        time.sleep(0.05)

os.environ["FLUTTER_HOME"] = str(workdir / "flutter-home")
os.environ["FLUTTER_SERVER"] = url

try:
    print("== command-line mode ==")
    flutter(["signup", "alice", "secret"])
    flutter(["post", "written from the CLI"])
    flutter(["post", "--private", "CLI draft, owner-only"])

    print("\n== library mode, same account ==")
    client = FlareClient(url, dev_key=DEV_KEY)
    client.register_app("flitterApp")
    client.users.authenticate("alice", "secret")
    for record in client.user_store.get(["post"], {"count": 10}):
        print("  sdk sees:", record["fields"]["post"])

    client.user_store.put({"post": {"value": "written from the SDK", "access": "public"}}, "posts")
    client.close()

    print("\n== back in the CLI, timeline shows both ==")
    flutter(["timeline"])
finally:
    server.terminate()
    server.wait()
