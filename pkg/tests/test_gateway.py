"""Web gateway: group taxonomy, provider conformance, extras."""

from __future__ import annotations

import pytest

from flare.engine import Engine, QuerySpec
from flare.errors import InvalidHandle, NotFound, UnknownProvider, UnsupportedFeature
from flare.gateway import GROUPS, WebGateway
from flare.store import StoreService

APP = "app-one"
ALICE = "u-alice"
BOB = "u-bob"

PROVIDERS = ("mockblog", "loopback")


@pytest.fixture
def stack(tmp_path):
    eng = Engine(tmp_path, fsync=False)
    store = StoreService(eng)
    yield store, WebGateway(eng, store)
    eng.close()


def test_exactly_nine_groups(stack):
    _, gw = stack
    groups = gw.list_groups()
    assert len(groups) == 9
    assert groups[:3] == ["blogging", "email", "instant_messaging"]
    assert gw.list_groups() == groups  # stable order


def test_blogging_providers_registered(stack):
    _, gw = stack
    providers = {p["providerID"]: p["capabilities"] for p in gw.list_providers("blogging")}
    assert providers == {"mockblog": ["word_count"], "loopback": []}


def test_unimplemented_group_is_marked(stack):
    _, gw = stack
    assert gw.group_implemented("email") is False
    assert gw.list_providers("email") == []


def test_unknown_group_rejected(stack):
    _, gw = stack
    with pytest.raises(NotFound):
        gw.list_providers("astrology")


def test_unknown_provider_rejected(stack):
    _, gw = stack
    with pytest.raises(UnknownProvider):
        gw.connect(APP, ALICE, "blogger", {})


# -- shared conformance suite: every provider must behave identically --------


@pytest.mark.parametrize("provider", PROVIDERS)
def test_create_then_list_round_trip(stack, provider):
    _, gw = stack
    handle = gw.connect(APP, ALICE, provider, {})
    gw.create_post(APP, ALICE, handle, "T", "B")
    posts = gw.recent_posts(APP, ALICE, handle, 1)
    assert [(p.title, p.body) for p in posts] == [("T", "B")]


@pytest.mark.parametrize("provider", PROVIDERS)
def test_newest_first_ordering_and_truncation(stack, provider):
    _, gw = stack
    handle = gw.connect(APP, ALICE, provider, {})
    for i in range(3):
        gw.create_post(APP, ALICE, handle, f"t{i}", f"b{i}")
    posts = gw.recent_posts(APP, ALICE, handle, 2)
    assert [p.title for p in posts] == ["t2", "t1"]
    assert gw.recent_posts(APP, ALICE, handle, 0) == []


@pytest.mark.parametrize("provider", PROVIDERS)
def test_post_refs_unique_per_connection(stack, provider):
    _, gw = stack
    handle = gw.connect(APP, ALICE, provider, {})
    refs = [gw.create_post(APP, ALICE, handle, f"t{i}", "b") for i in range(5)]
    assert len(set(refs)) == 5


@pytest.mark.parametrize("provider", PROVIDERS)
def test_handle_isolation(stack, provider):
    _, gw = stack
    mine = gw.connect(APP, ALICE, provider, {})
    other = gw.connect(APP, BOB, provider, {})
    gw.create_post(APP, ALICE, mine, "mine", "b")
    assert gw.recent_posts(APP, BOB, other, 10) == []
    # A handle is bound to the user who connected it.
    with pytest.raises(InvalidHandle):
        gw.create_post(APP, BOB, mine, "stolen", "b")


@pytest.mark.parametrize("provider", PROVIDERS)
def test_revoked_handle_rejected(stack, provider):
    _, gw = stack
    handle = gw.connect(APP, ALICE, provider, {})
    gw.disconnect(APP, ALICE, handle)
    with pytest.raises(InvalidHandle):
        gw.create_post(APP, ALICE, handle, "T", "B")
    with pytest.raises(InvalidHandle):
        gw.recent_posts(APP, ALICE, handle, 1)


def test_same_call_sequence_same_results_across_providers(stack):
    _, gw = stack
    views = []
    for provider in PROVIDERS:
        handle = gw.connect(APP, ALICE, provider, {})
        for i in range(4):
            gw.create_post(APP, ALICE, handle, f"title{i}", f"body words {i}")
        posts = gw.recent_posts(APP, ALICE, handle, 3)
        views.append([(p.title, p.body) for p in posts])
    assert views[0] == views[1]


def test_word_count_extra(stack):
    _, gw = stack
    handle = gw.connect(APP, ALICE, "mockblog", {})
    ref = gw.create_post(APP, ALICE, handle, "T", "a b c")
    assert gw.invoke_extra(APP, ALICE, handle, "word_count", {"postRef": ref}) == {"words": 3}


def test_word_count_matches_token_count(stack):
    _, gw = stack
    handle = gw.connect(APP, ALICE, "mockblog", {})
    bodies = ["", "one", "  spaced   out  ", "a b\tc\nd"]
    for body in bodies:
        ref = gw.create_post(APP, ALICE, handle, "T", body)
        got = gw.invoke_extra(APP, ALICE, handle, "word_count", {"postRef": ref})
        assert got == {"words": len(body.split())}


def test_extra_not_in_capability_set(stack):
    _, gw = stack
    handle = gw.connect(APP, ALICE, "loopback", {})
    with pytest.raises(UnsupportedFeature):
        gw.invoke_extra(APP, ALICE, handle, "word_count", {"postRef": "x"})


def test_unknown_feature_rejected(stack):
    _, gw = stack
    handle = gw.connect(APP, ALICE, "mockblog", {})
    with pytest.raises(UnsupportedFeature):
        gw.invoke_extra(APP, ALICE, handle, "teleport", {})


def test_extras_do_not_disturb_listing(stack):
    _, gw = stack
    handle = gw.connect(APP, ALICE, "mockblog", {})
    refs = [gw.create_post(APP, ALICE, handle, f"t{i}", "a b") for i in range(3)]
    gw.invoke_extra(APP, ALICE, handle, "word_count", {"postRef": refs[1]})
    posts = gw.recent_posts(APP, ALICE, handle, 10)
    assert [p.post_ref for p in posts] == list(reversed(refs))


def test_loopback_posts_land_in_static_store(stack):
    store, gw = stack
    handle = gw.connect(APP, ALICE, "loopback", {})
    gw.create_post(APP, ALICE, handle, "headline", "body text")
    rows = store.static_recent(APP, None, QuerySpec(["title", "body"], count=10))
    assert [(r.fields["title"], r.fields["body"]) for r in rows] == [("headline", "body text")]


def test_handles_survive_restart_for_loopback(tmp_path):
    with Engine(tmp_path, fsync=False) as eng:
        store = StoreService(eng)
        gw = WebGateway(eng, store)
        handle = gw.connect(APP, ALICE, "loopback", {})
        gw.create_post(APP, ALICE, handle, "before", "restart")
    with Engine(tmp_path, fsync=False) as eng:
        gw = WebGateway(eng, StoreService(eng))
        posts = gw.recent_posts(APP, ALICE, handle, 10)
        assert [p.title for p in posts] == ["before"]
