"""Server configuration: JSON file plus FLARE_* environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

DEFAULT_DEV_KEYS = ["F92KLF5434TR4H"]


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: str = "flare-data"
    dev_keys: list[str] = field(default_factory=lambda: list(DEFAULT_DEV_KEYS))
    digest_iterations: int = 60_000
    fsync: bool = True
    # HTTPS: hand both paths to the listener, or terminate TLS in front.
    tls_keyfile: Optional[str] = None
    tls_certfile: Optional[str] = None
    # Optional static bundle (the browser client) served under /app/.
    static_dir: Optional[str] = None


def load_config(path: Optional[str] = None, env: Optional[dict] = None) -> ServerConfig:
    env = os.environ if env is None else env
    cfg = ServerConfig()
    if path:
        raw = json.loads(Path(path).read_text("utf-8"))
        for key in vars(cfg):
            if key in raw:
                setattr(cfg, key, raw[key])
    if "FLARE_HOST" in env:
        cfg.host = env["FLARE_HOST"]
    if "FLARE_PORT" in env:
        cfg.port = int(env["FLARE_PORT"])
    if "FLARE_DATA_DIR" in env:
        cfg.data_dir = env["FLARE_DATA_DIR"]
    if "FLARE_DEV_KEYS" in env:
        cfg.dev_keys = [k for k in env["FLARE_DEV_KEYS"].split(",") if k]
    if "FLARE_DIGEST_ITERATIONS" in env:
        cfg.digest_iterations = int(env["FLARE_DIGEST_ITERATIONS"])
    if "FLARE_STATIC_DIR" in env:
        cfg.static_dir = env["FLARE_STATIC_DIR"]
    return cfg
