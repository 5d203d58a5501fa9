"""User directory: accounts, authentication, attributes."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flare.engine import Engine
from flare.errors import (
    DuplicateUsername,
    NotFound,
    Unauthenticated,
    UnknownApp,
    ValidationError,
)
from flare.registry import AppRegistry
from flare.users import UserDirectory

KEY = "F92KLF5434TR4H"


@pytest.fixture
def stack(tmp_path):
    eng = Engine(tmp_path, fsync=False)
    registry = AppRegistry(eng, [KEY])
    users = UserDirectory(eng, registry, iterations=600)
    app_id = registry.register_app(KEY, "flitterApp")
    yield eng, users, app_id
    eng.close()


def test_create_minimal_user(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "pw1", {})
    assert uid.startswith("u")


def test_duplicate_username_rejected(stack):
    _, users, app = stack
    users.create_user(app, "alice", "pw1", {})
    with pytest.raises(DuplicateUsername):
        users.create_user(app, "alice", "pw2", {})


def test_attributes_stored_verbatim(stack):
    _, users, app = stack
    users.create_user(app, "bob", "pw", {"realname": "Bob B", "city": "Pune"})
    alice = users.create_user(app, "alice", "pw1", {})
    view = users.get_user(app, alice, "bob")
    assert view["attributes"] == {"realname": "Bob B", "city": "Pune"}


def test_unknown_app_rejected(stack):
    _, users, _ = stack
    with pytest.raises(UnknownApp):
        users.create_user("a" + "0" * 31, "alice", "pw", {})


def test_empty_password_rejected(stack):
    _, users, app = stack
    with pytest.raises(ValidationError):
        users.create_user(app, "alice", "", {})


def test_authenticate_round_trip(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "pw1", {})
    assert users.authenticate(app, "alice", "pw1") == uid


def test_wrong_password_fails(stack):
    _, users, app = stack
    users.create_user(app, "alice", "pw1", {})
    assert users.authenticate(app, "alice", "wrong") is None


def test_unknown_user_indistinguishable_from_wrong_password(stack):
    _, users, app = stack
    users.create_user(app, "alice", "pw1", {})
    assert users.authenticate(app, "alice", "bad") == users.authenticate(app, "ghost", "pw")


def test_get_user_requires_auth(stack):
    _, users, app = stack
    users.create_user(app, "bob", "pw", {})
    with pytest.raises(Unauthenticated):
        users.get_user(app, None, "bob")


def test_get_unknown_user(stack):
    _, users, app = stack
    caller = users.create_user(app, "alice", "pw1", {})
    with pytest.raises(NotFound):
        users.get_user(app, caller, "nobody")


def test_get_user_never_exposes_digest(stack):
    _, users, app = stack
    caller = users.create_user(app, "alice", "pw1", {"hobby": "chess"})
    view = users.get_user(app, caller, "alice")
    assert "pbkdf2" not in json.dumps(view)
    assert set(view) == {"userID", "username", "attributes"}


def test_update_attributes(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "pw1", {"city": "Pune"})
    users.update_user(app, uid, attribute_patch={"city": "Delhi"})
    assert users.get_user(app, uid, "alice")["attributes"]["city"] == "Delhi"


def test_empty_value_removes_attribute(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "pw1", {"city": "Pune"})
    users.update_user(app, uid, attribute_patch={"city": ""})
    assert "city" not in users.get_user(app, uid, "alice")["attributes"]


def test_password_change(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "old", {})
    users.update_user(app, uid, password="new")
    assert users.authenticate(app, "alice", "old") is None
    assert users.authenticate(app, "alice", "new") == uid


def test_delete_then_authenticate_fails(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "pw1", {})
    users.delete_user(app, uid)
    assert users.authenticate(app, "alice", "pw1") is None


def test_delete_twice_unauthenticated(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "pw1", {})
    users.delete_user(app, uid)
    with pytest.raises(Unauthenticated):
        users.delete_user(app, uid)


def test_recreate_after_delete_gets_fresh_user_id(stack):
    _, users, app = stack
    first = users.create_user(app, "alice", "pw1", {})
    users.delete_user(app, first)
    second = users.create_user(app, "alice", "pw2", {})
    assert second != first
    assert users.authenticate(app, "alice", "pw2") == second


def test_verify_credentials_by_user_id(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "pw1", {})
    assert users.verify_credentials(app, uid, "pw1")
    assert not users.verify_credentials(app, uid, "nope")
    assert not users.verify_credentials(app, "u" + "f" * 31, "pw1")


def test_accounts_survive_restart(tmp_path):
    with Engine(tmp_path, fsync=False) as eng:
        registry = AppRegistry(eng, [KEY])
        users = UserDirectory(eng, registry, iterations=600)
        app = registry.register_app(KEY, "flitterApp")
        uid = users.create_user(app, "alice", "pw1", {"city": "Pune"})
    with Engine(tmp_path, fsync=False) as eng:
        users = UserDirectory(eng, AppRegistry(eng, [KEY]), iterations=600)
        assert users.authenticate(app, "alice", "pw1") == uid
        assert users.get_user(app, uid, "alice")["attributes"] == {"city": "Pune"}


def test_resolve_username(stack):
    _, users, app = stack
    uid = users.create_user(app, "alice", "pw1", {})
    assert users.resolve_username(app, "alice") == uid
    with pytest.raises(NotFound):
        users.resolve_username(app, "ghost")


def test_cross_app_same_username_isolated(tmp_path):
    with Engine(tmp_path, fsync=False) as eng:
        registry = AppRegistry(eng, [KEY])
        users = UserDirectory(eng, registry, iterations=600)
        app_a = registry.register_app(KEY, "appA")
        app_b = registry.register_app(KEY, "appB")
        uid_a = users.create_user(app_a, "alice", "pwA", {})
        uid_b = users.create_user(app_b, "alice", "pwB", {})
        assert uid_a != uid_b
        assert users.authenticate(app_a, "alice", "pwB") is None
        assert users.authenticate(app_b, "alice", "pwB") == uid_b


@settings(max_examples=25, deadline=None)
@given(
    attrs=st.dictionaries(
        st.text(min_size=1, max_size=40),
        st.text(max_size=80),
        max_size=100,
    )
)
def test_attribute_round_trip_arbitrary_utf8(tmp_path_factory, attrs):
    # Empty string values are the delete-key marker in patches, but create
    # must still round-trip them untouched.
    tmp = tmp_path_factory.mktemp("attrs")
    with Engine(tmp, fsync=False) as eng:
        registry = AppRegistry(eng, [KEY])
        users = UserDirectory(eng, registry, iterations=600)
        app = registry.register_app(KEY, "flitterApp")
        uid = users.create_user(app, "alice", "pw1", attrs)
        assert users.get_user(app, uid, "alice")["attributes"] == attrs
