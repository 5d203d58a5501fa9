"""Flutter CLI: command grammar, exit codes, output, credential cache."""

from __future__ import annotations

import itertools
import json
import stat

import pytest

from flare.flutter import main

from conftest import LiveServer

_app_names = (f"cliApp{i}" for i in itertools.count())


@pytest.fixture(scope="module")
def server(tmp_path_factory):
    server = LiveServer(tmp_path_factory.mktemp("cli-srv"), fsync=False)
    server.start()
    yield server
    server.stop()


@pytest.fixture
def home(tmp_path, monkeypatch, server):
    """Fresh state dir per test, pointed at the shared server, isolated app."""
    state = tmp_path / "flutter-home"
    state.mkdir()
    (state / "config.json").write_text(json.dumps({"appName": next(_app_names)}))
    monkeypatch.setenv("FLUTTER_HOME", str(state))
    monkeypatch.setenv("FLUTTER_SERVER", server.url)
    return state


def test_signup_prints_user_id(home, capsys):
    assert main(["signup", "alice", "pw1"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("created u")


def test_signup_duplicate_exits_one(home, capsys):
    main(["signup", "alice", "pw1"])
    assert main(["signup", "alice", "pw2"]) == 1
    assert "duplicate_username" in capsys.readouterr().err


def test_signup_empty_password_local_error(home, capsys):
    assert main(["signup", "alice", ""]) == 1
    assert "password" in capsys.readouterr().err


def test_login_success_and_failure(home, capsys):
    main(["signup", "alice", "pw1"])
    assert main(["login", "alice", "pw1"]) == 0
    assert main(["login", "alice", "wrong"]) == 1
    assert "authentication failure" in capsys.readouterr().err


def test_unreachable_server_exit_two(home, monkeypatch, capsys):
    monkeypatch.setenv("FLUTTER_SERVER", "http://127.0.0.1:9")
    assert main(["login", "alice", "pw1"]) == 2
    assert "transport error" in capsys.readouterr().err


def test_credentials_file_is_owner_only(home):
    main(["signup", "alice", "pw1"])
    mode = stat.S_IMODE((home / "credentials.json").stat().st_mode)
    assert mode == 0o600


def test_post_and_timeline(home, capsys):
    main(["signup", "alice", "pw1"])
    capsys.readouterr()
    assert main(["post", "hello world"]) == 0
    record_id = capsys.readouterr().out.strip()
    assert record_id.startswith("r")
    assert main(["timeline"]) == 0
    out = capsys.readouterr().out
    assert "hello world" in out


def test_post_requires_login(home, capsys):
    assert main(["post", "hi"]) == 1
    assert "not logged in" in capsys.readouterr().err


def test_timeline_caps_at_ten_newest_first(home, capsys):
    main(["signup", "alice", "pw1"])
    for i in range(12):
        main(["post", f"post number {i}"])
    capsys.readouterr()
    assert main(["timeline"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 10
    assert "post number 11" in lines[0]
    assert "post number 2" in lines[-1]


def test_timeline_empty_account(home, capsys):
    main(["signup", "alice", "pw1"])
    capsys.readouterr()
    main(["timeline"])
    assert capsys.readouterr().out.strip() == "no posts"


def test_timeline_includes_private_posts(home, capsys):
    main(["signup", "alice", "pw1"])
    main(["post", "--private", "my draft"])
    capsys.readouterr()
    main(["timeline"])
    assert "my draft" in capsys.readouterr().out


def test_view_shows_only_public(home, capsys):
    main(["signup", "alice", "pw1"])
    for i in range(3):
        main(["post", f"pub {i}"])
        main(["post", "--private", f"sec {i}"])
    main(["signup", "bob", "pw2"])  # switches the cached login to bob
    capsys.readouterr()
    assert main(["view", "alice"]) == 0
    out = capsys.readouterr().out
    assert out.count("pub") == 3
    assert "sec" not in out


def test_view_anonymous(home, capsys):
    main(["signup", "alice", "pw1"])
    main(["post", "visible to all"])
    (home / "credentials.json").unlink()
    capsys.readouterr()
    assert main(["view", "alice"]) == 0
    assert "visible to all" in capsys.readouterr().out


def test_view_unknown_user(home, capsys):
    main(["signup", "alice", "pw1"])
    capsys.readouterr()
    assert main(["view", "nobody"]) == 1
    assert "not_found" in capsys.readouterr().err


def test_json_flag_emits_wire_records(home, capsys):
    main(["signup", "alice", "pw1"])
    main(["post", "raw please"])
    capsys.readouterr()
    assert main(["timeline", "--json"]) == 0
    records = json.loads(capsys.readouterr().out)
    assert records[0]["fields"]["post"] == "raw please"
    assert {"recordID", "ownerID", "collection", "stamp", "fields"} <= set(records[0])
