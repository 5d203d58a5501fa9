"""Shared fixtures: in-process wire client and a real subprocess server."""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import time

import httpx
import pytest
from fastapi.testclient import TestClient

from flare.config import ServerConfig
from flare.server import create_app

DEV_KEY = "F92KLF5434TR4H"

# Fast digests in tests; production default is much higher.
TEST_ITERATIONS = 800


@pytest.fixture
def server_app(tmp_path):
    config = ServerConfig(
        data_dir=str(tmp_path / "data"),
        dev_keys=[DEV_KEY],
        digest_iterations=TEST_ITERATIONS,
        fsync=False,
    )
    return create_app(config)


@pytest.fixture
def http(server_app):
    with TestClient(server_app) as client:
        yield client


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveServer:
    """A real flare-server subprocess bound to a scratch data directory."""

    def __init__(self, tmp_path, fsync: bool = True, iterations: int = TEST_ITERATIONS):
        tmp_path.mkdir(parents=True, exist_ok=True)
        self.data_dir = tmp_path / "data"
        self.config_path = tmp_path / "config.json"
        self.port = free_port()
        self.url = f"http://127.0.0.1:{self.port}"
        self.config_path.write_text(
            json.dumps(
                {
                    "host": "127.0.0.1",
                    "port": self.port,
                    "data_dir": str(self.data_dir),
                    "dev_keys": [DEV_KEY],
                    "digest_iterations": iterations,
                    "fsync": fsync,
                }
            )
        )
        self.process: subprocess.Popen | None = None

    def start(self, timeout: float = 15.0) -> None:
        self.process = subprocess.Popen(
            [sys.executable, "-m", "flare.server", "--config", str(self.config_path)],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
        )
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.process.poll() is not None:
                raise RuntimeError(
                    f"server exited early: {self.process.stderr.read().decode()}"
                )
            try:
                httpx.get(f"{self.url}/healthz", timeout=1.0)
                return
            except httpx.HTTPError:
                time.sleep(0.05)
        raise RuntimeError("server did not become ready")

    def kill(self) -> None:
        if self.process and self.process.poll() is None:
            self.process.kill()
            self.process.wait()

    def stop(self) -> None:
        if self.process and self.process.poll() is None:
            self.process.terminate()
            try:
                self.process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.process.kill()
                self.process.wait()


@pytest.fixture
def live_server(tmp_path):
    server = LiveServer(tmp_path)
    server.start()
    yield server
    server.stop()
