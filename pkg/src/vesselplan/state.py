"""Canonical, symmetry-broken search states.

Cargo is grouped by origin then destination, weights sorted downward; vessels
are anonymous and grouped by location, fuel levels sorted upward.  Two states
that differ only by a permutation of identical vessels or cargo items share
the same representation, so the memo tables see them once.
"""
from __future__ import annotations

from collections import Counter
from itertools import groupby
from typing import Iterable, NamedTuple

from .instance import CargoItem

# (origin, ((dest, (w1, w2, ...)), ...))
CanonicalCargo = tuple[tuple[str, tuple[tuple[str, tuple[int, ...]], ...]], ...]
# (location, (fuel1, fuel2, ...))
CanonicalFleet = tuple[tuple[str, tuple[int, ...]], ...]

Item = tuple[str, str, int]
Vessel = tuple[str, int]


class StateError(RuntimeError):
    """A trip referred to cargo or a vessel that is not in the state."""


class CanonicalState(NamedTuple):
    cargo: CanonicalCargo
    fleet: CanonicalFleet


def _as_item(item: CargoItem | Item) -> Item:
    if isinstance(item, CargoItem):
        return (item.origin, item.dest, item.weight)
    return (item[0], item[1], item[2])


def canonical_cargo(items: Iterable[CargoItem | Item]) -> CanonicalCargo:
    flat = sorted((_as_item(it) for it in items), key=lambda t: (t[0], t[1], -t[2]))
    out = []
    for origin, by_origin in groupby(flat, key=lambda t: t[0]):
        dests = tuple(
            (dest, tuple(t[2] for t in group))
            for dest, group in groupby(by_origin, key=lambda t: t[1])
        )
        out.append((origin, dests))
    return tuple(out)


def canonical_fleet(vessels: Iterable[Vessel]) -> CanonicalFleet:
    flat = sorted((loc, fuel) for loc, fuel in vessels)
    return tuple(
        (loc, tuple(fuel for _, fuel in group))
        for loc, group in groupby(flat, key=lambda v: v[0])
    )


def canonicalize(
    cargo: Iterable[CargoItem | Item], fleet: Iterable[Vessel]
) -> CanonicalState:
    return CanonicalState(canonical_cargo(cargo), canonical_fleet(fleet))


def cargo_items(state: CanonicalState) -> list[Item]:
    return [
        (origin, dest, w)
        for origin, dests in state.cargo
        for dest, weights in dests
        for w in weights
    ]


def fleet_members(state: CanonicalState) -> list[Vessel]:
    return [(loc, fuel) for loc, fuels in state.fleet for fuel in fuels]


def port_cargo(state: CanonicalState, port: str) -> list[tuple[str, int]]:
    """(dest, weight) pairs waiting at ``port``, in canonical order."""
    for origin, dests in state.cargo:
        if origin == port:
            return [(dest, w) for dest, weights in dests for w in weights]
    return []


def ports_with_cargo(state: CanonicalState) -> list[str]:
    return [origin for origin, _ in state.cargo]


def pending_destinations(state: CanonicalState) -> frozenset[str]:
    return frozenset(dest for _, dests in state.cargo for dest, _ in dests)


def state_key(state: CanonicalState) -> bytes:
    """Injective byte encoding of a canonical state, used as a memo key."""
    return repr(tuple(state)).encode()


def remove_cargo(cargo: CanonicalCargo, removed: Iterable[CargoItem | Item]) -> CanonicalCargo:
    need = Counter(_as_item(it) for it in removed)
    out = []
    for origin, dests in cargo:
        kept_dests = []
        for dest, weights in dests:
            kept = []
            for w in weights:
                key = (origin, dest, w)
                if need[key] > 0:
                    need[key] -= 1
                else:
                    kept.append(w)
            if kept:
                kept_dests.append((dest, tuple(kept)))
        if kept_dests:
            out.append((origin, tuple(kept_dests)))
    missing = [item for item, n in need.items() if n > 0]
    if missing:
        raise StateError(f"cargo items {missing} not present in state")
    return tuple(out)


def move_vessel(fleet: CanonicalFleet, before: Vessel, after: Vessel) -> CanonicalFleet:
    groups = {loc: list(fuels) for loc, fuels in fleet}
    loc, fuel = before
    try:
        groups[loc].remove(fuel)
    except (KeyError, ValueError):
        raise StateError(f"vessel {before} not present in state") from None
    if not groups[loc]:
        del groups[loc]
    dest = groups.setdefault(after[0], [])
    dest.append(after[1])
    dest.sort()
    return tuple((loc, tuple(groups[loc])) for loc in sorted(groups))


def apply_trip(
    state: CanonicalState,
    removed: Iterable[CargoItem | Item],
    before: Vessel,
    after: Vessel,
) -> CanonicalState:
    """Return the state reached after one trip; ``state`` is left untouched."""
    return CanonicalState(
        remove_cargo(state.cargo, removed), move_vessel(state.fleet, before, after)
    )


def to_nested(state: CanonicalState) -> tuple[list, list]:
    """The flat list-of-lists rendering: ``[[origin, [dest, w...], ...]]``."""
    cargo = [[origin, *[[dest, *weights] for dest, weights in dests]] for origin, dests in state.cargo]
    fleet = [[loc, *fuels] for loc, fuels in state.fleet]
    return cargo, fleet
