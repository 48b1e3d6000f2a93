"""Canonical states: symmetry breaking, keys and trip updates."""
from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from vesselplan.state import (
    CanonicalState,
    StateError,
    apply_trip,
    canonicalize,
    cargo_items,
    fleet_members,
    ports_with_cargo,
    state_key,
    to_nested,
)

from conftest import reference_instance


def test_reference_state_nested_form():
    inst = reference_instance()
    cargo, fleet = to_nested(canonicalize(inst.cargo, inst.vessel.initial))
    assert cargo == [
        ["p1", ["f1", 20], ["f2", 30, 15], ["f3", 10], ["f4", 15], ["f5", 25], ["f6", 5]],
        ["p2", ["f1", 40], ["f2", 30], ["f3", 20], ["g1", 20, 15], ["g2", 30, 20], ["g4", 8]],
    ]
    assert fleet == [["a1"] + [400] * 6, ["a2"] + [400] * 4]


def test_empty_state():
    assert canonicalize([], []) == CanonicalState((), ())
    assert to_nested(canonicalize([], [])) == ([], [])


def test_weights_sorted_downward_in_any_input_order():
    a = canonicalize([("p1", "f2", 30), ("p1", "f2", 15)], [])
    b = canonicalize([("p1", "f2", 15), ("p1", "f2", 30)], [])
    assert a == b
    assert a.cargo == (("p1", (("f2", (30, 15)),)),)


def test_fuel_sorted_upward():
    s = canonicalize([], [("a1", 400), ("a1", 300), ("a2", 10)])
    assert s.fleet == (("a1", (300, 400)), ("a2", (10,)))


def test_state_key_examples():
    items = [("p1", "f1", 20), ("p2", "f3", 5), ("p1", "f1", 30)]
    fleet = [("a1", 400), ("a2", 120), ("a1", 390)]
    assert state_key(canonicalize(items, fleet)) == state_key(canonicalize(items[::-1], fleet[::-1]))
    assert state_key(canonicalize([], [])) == state_key(CanonicalState((), ()))
    assert state_key(canonicalize(items, [("a1", 5)])) != state_key(canonicalize(items, [("a1", 6)]))


def test_state_key_injective_exhaustive():
    locs = ("a1", "p1", "f1")
    fuels = range(6)
    vessels = [(loc, f) for loc in locs for f in fuels]
    cargo_pool = [("p1", "f1", 1), ("p1", "f1", 2), ("p1", "a1", 1)]
    states = set()
    for n in (0, 1, 2):
        for fleet in itertools.combinations_with_replacement(vessels, n):
            for k in (0, 1, 2):
                for cargo in itertools.combinations_with_replacement(cargo_pool, k):
                    states.add(canonicalize(cargo, fleet))
    keys = {state_key(s) for s in states}
    assert len(keys) == len(states) > 1000


def test_apply_trip_removes_last_item():
    s = canonicalize([("p1", "f1", 20)], [("a1", 400)])
    nxt = apply_trip(s, [("p1", "f1", 20)], ("a1", 400), ("a1", 335))
    assert nxt.cargo == ()


def test_apply_trip_moves_one_vessel():
    s = canonicalize([("p1", "f1", 20)], [("a1", 400), ("a1", 400)])
    nxt = apply_trip(s, [], ("a1", 400), ("f1", 360))
    assert to_nested(nxt)[1] == [["a1", 400], ["f1", 360]]
    # the original is untouched
    assert to_nested(s)[1] == [["a1", 400, 400]]


def test_apply_trip_rejects_missing_cargo_or_vessel():
    s = canonicalize([("p1", "f1", 20)], [("a1", 400)])
    with pytest.raises(StateError):
        apply_trip(s, [("p1", "f1", 25)], ("a1", 400), ("a1", 400))
    with pytest.raises(StateError):
        apply_trip(s, [], ("a2", 400), ("a1", 400))
    with pytest.raises(StateError):
        apply_trip(s, [("p1", "f1", 20), ("p1", "f1", 20)], ("a1", 400), ("a1", 400))


def test_ports_with_cargo():
    inst = reference_instance()
    assert ports_with_cargo(canonicalize(inst.cargo, [])) == ["p1", "p2"]
    assert ports_with_cargo(canonicalize([], [])) == []
    assert ports_with_cargo(canonicalize([("p2", "f1", 3)], [])) == ["p2"]


items_st = st.lists(
    st.tuples(st.sampled_from(["p1", "p2", "p3"]), st.sampled_from(["f1", "f2", "g1"]), st.integers(1, 40)),
    max_size=8,
)
fleet_st = st.lists(st.tuples(st.sampled_from(["a1", "a2", "p1", "f2"]), st.integers(0, 400)), max_size=6)


@settings(max_examples=200)
@given(items_st, fleet_st, st.randoms())
def test_canonical_form_ignores_order(items, fleet, rnd):
    a = canonicalize(items, fleet)
    items2, fleet2 = list(items), list(fleet)
    rnd.shuffle(items2)
    rnd.shuffle(fleet2)
    assert canonicalize(items2, fleet2) == a
    assert state_key(canonicalize(items2, fleet2)) == state_key(a)


@settings(max_examples=200)
@given(items_st, fleet_st)
def test_canonicalize_idempotent(items, fleet):
    s = canonicalize(items, fleet)
    assert canonicalize(cargo_items(s), fleet_members(s)) == s
    assert sorted(cargo_items(s)) == sorted(items)
    assert sorted(fleet_members(s)) == sorted(fleet)


@settings(max_examples=200)
@given(items_st, fleet_st)
def test_canonical_invariants(items, fleet):
    s = canonicalize(items, fleet)
    origins = [o for o, _ in s.cargo]
    assert origins == sorted(set(origins))
    for _, dests in s.cargo:
        names = [d for d, _ in dests]
        assert names == sorted(set(names))
        for _, weights in dests:
            assert weights and list(weights) == sorted(weights, reverse=True)
    locs = [loc for loc, _ in s.fleet]
    assert locs == sorted(set(locs))
    for _, fuels in s.fleet:
        assert fuels and list(fuels) == sorted(fuels)


@settings(max_examples=100)
@given(items_st.filter(bool), fleet_st.filter(bool), st.integers(0, 10_000))
def test_apply_trip_matches_multiset_update(items, fleet, seed):
    rng = random.Random(seed)
    removed = rng.sample(items, rng.randint(0, len(items)))
    before = rng.choice(fleet)
    after = ("f1", rng.randint(0, 400))
    s = canonicalize(items, fleet)
    rest = list(items)
    for it in removed:
        rest.remove(it)
    moved = list(fleet)
    moved.remove(before)
    assert apply_trip(s, removed, before, after) == canonicalize(rest, moved + [after])
