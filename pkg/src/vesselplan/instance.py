"""Static problem data: locations, distances, rates, fleet and cargo manifest.

An :class:`Instance` is immutable once parsed.  All quantities are integers so
that fuel levels can be used verbatim inside memo keys.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping

logger = logging.getLogger(__name__)

WAITING = "waiting"
PORT = "port"
PLATFORM = "platform"
KINDS = (WAITING, PORT, PLATFORM)

RATE_FIELDS = (
    "fuel_per_dist_empty",
    "fuel_per_dist_loaded",
    "time_per_dist_empty",
    "time_per_dist_loaded",
    "dock_time",
    "undock_time",
    "refuel_time",
    "handling_time_per_weight",
    "docking_cost_rate_port",
    "docking_cost_rate_platform",
)

DEFAULT_DOCK_CAPACITY = {PORT: 2, PLATFORM: 1, WAITING: None}


class InstanceError(ValueError):
    """Raised for malformed or inconsistent instance data."""


@dataclass(frozen=True)
class Location:
    id: str
    kind: str
    refuel: bool = False
    # None means unbounded (waiting areas never dock).
    dock_capacity: int | None = None


@dataclass(frozen=True)
class Rates:
    fuel_per_dist_empty: int
    fuel_per_dist_loaded: int
    time_per_dist_empty: int
    time_per_dist_loaded: int
    dock_time: int
    undock_time: int
    refuel_time: int
    handling_time_per_weight: int
    docking_cost_rate_port: int = 0
    docking_cost_rate_platform: int = 0

    def docking_cost_rate(self, kind: str) -> int:
        if kind == PORT:
            return self.docking_cost_rate_port
        if kind == PLATFORM:
            return self.docking_cost_rate_platform
        return 0


@dataclass(frozen=True)
class CargoItem:
    origin: str
    dest: str
    weight: int


@dataclass(frozen=True)
class VesselSpec:
    weight_capacity: int
    fuel_capacity: int
    initial: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class Instance:
    locations: tuple[Location, ...]
    distances: Mapping[tuple[str, str], int] = field(repr=False)
    rates: Rates
    vessel: VesselSpec
    cargo: tuple[CargoItem, ...]

    # -- lookups ---------------------------------------------------------
    @cached_property
    def by_id(self) -> dict[str, Location]:
        return {loc.id: loc for loc in self.locations}

    @cached_property
    def _dist(self) -> dict[str, dict[str, int]]:
        table: dict[str, dict[str, int]] = {loc.id: {loc.id: 0} for loc in self.locations}
        for (a, b), d in self.distances.items():
            table[a][b] = d
            table[b][a] = d
        return table

    @cached_property
    def refuel_ids(self) -> tuple[str, ...]:
        return tuple(sorted(loc.id for loc in self.locations if loc.refuel))

    @cached_property
    def waiting_ids(self) -> tuple[str, ...]:
        return tuple(sorted(loc.id for loc in self.locations if loc.kind == WAITING))

    @cached_property
    def port_ids(self) -> tuple[str, ...]:
        return tuple(sorted(loc.id for loc in self.locations if loc.kind == PORT))

    @cached_property
    def vessel_ids(self) -> tuple[str, ...]:
        return tuple(f"v{i + 1}" for i in range(len(self.vessel.initial)))

    @cached_property
    def cargo_ids(self) -> tuple[str, ...]:
        return tuple(f"c{i + 1}" for i in range(len(self.cargo)))

    @cached_property
    def cargo_by_id(self) -> dict[str, CargoItem]:
        return dict(zip(self.cargo_ids, self.cargo))

    @cached_property
    def _reserve(self) -> dict[tuple[str, bool], int]:
        if not self.refuel_ids:
            return {}
        table = {}
        for loc in self.locations:
            for loaded in (False, True):
                table[loc.id, loaded] = min(
                    self.leg_fuel(loc.id, r, loaded) for r in self.refuel_ids
                )
        return table

    def distance(self, a: str, b: str) -> int:
        return self._dist[a][b]

    def kind(self, loc: str) -> str:
        return self.by_id[loc].kind

    def refuels(self, loc: str) -> bool:
        return self.by_id[loc].refuel

    def leg_fuel(self, a: str, b: str, loaded: bool) -> int:
        rate = self.rates.fuel_per_dist_loaded if loaded else self.rates.fuel_per_dist_empty
        return self._dist[a][b] * rate

    def leg_time(self, a: str, b: str, loaded: bool) -> int:
        rate = self.rates.time_per_dist_loaded if loaded else self.rates.time_per_dist_empty
        return self._dist[a][b] * rate

    def nearest_refuel_cost(self, loc: str, loaded: bool) -> int:
        """Fuel needed to reach the closest refuelling station from ``loc``."""
        try:
            return self._reserve[loc, loaded]
        except KeyError:
            if loc not in self.by_id:
                raise InstanceError(f"unknown location {loc!r}") from None
            raise InstanceError("instance has no refuelling station") from None


def leg_fuel(inst: Instance, a: str, b: str, loaded: bool) -> int:
    return inst.leg_fuel(a, b, loaded)


def leg_time(inst: Instance, a: str, b: str, loaded: bool) -> int:
    return inst.leg_time(a, b, loaded)


def nearest_refuel_cost(inst: Instance, loc: str, loaded: bool) -> int:
    return inst.nearest_refuel_cost(loc, loaded)


# -- parsing -----------------------------------------------------------------

def _int(value: Any, where: str, minimum: int = 0) -> int:
    # bool is an int subclass; reject it along with floats and strings
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"{where}: expected integer, got {value!r}")
    if value < minimum:
        raise InstanceError(f"{where}: must be >= {minimum}, got {value}")
    return value


def _field(doc: Mapping[str, Any], key: str, where: str) -> Any:
    if not isinstance(doc, Mapping):
        raise InstanceError(f"{where}: expected object")
    if key not in doc:
        raise InstanceError(f"{where}: missing field {key!r}")
    return doc[key]


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise InstanceError(f"{where}: expected array")
    return value


def parse_instance(text: str | bytes | Mapping[str, Any]) -> Instance:
    """Build an :class:`Instance` from a JSON document (string or decoded)."""
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"not a JSON document: {exc}") from exc
    else:
        doc = text
    if not isinstance(doc, Mapping):
        raise InstanceError("instance document must be an object")

    locations = []
    seen: set[str] = set()
    for i, raw in enumerate(_list(_field(doc, "locations", "instance"), "locations")):
        where = f"locations[{i}]"
        loc_id = _field(raw, "id", where)
        if not isinstance(loc_id, str) or not loc_id:
            raise InstanceError(f"{where}.id: expected non-empty string")
        if loc_id in seen:
            raise InstanceError(f"{where}: duplicate location id {loc_id!r}")
        seen.add(loc_id)
        kind = _field(raw, "kind", where)
        if kind not in KINDS:
            raise InstanceError(f"{where}.kind: expected one of {KINDS}, got {kind!r}")
        refuel = raw.get("refuel", kind == PORT)
        if not isinstance(refuel, bool):
            raise InstanceError(f"{where}.refuel: expected boolean")
        if kind == PORT and not refuel:
            raise InstanceError(f"{where}: ports are always refuelling stations")
        cap = raw.get("dock_capacity", DEFAULT_DOCK_CAPACITY[kind])
        if cap is not None:
            cap = _int(cap, f"{where}.dock_capacity")
        if kind != WAITING and cap is None:
            raise InstanceError(f"{where}.dock_capacity: required for {kind}")
        locations.append(Location(loc_id, kind, refuel, cap))
    kinds = {loc.id: loc.kind for loc in locations}

    def known(loc_id: Any, where: str) -> str:
        if loc_id not in kinds:
            raise InstanceError(f"{where}: unknown location {loc_id!r}")
        return loc_id

    distances: dict[tuple[str, str], int] = {}
    for i, raw in enumerate(_list(_field(doc, "distances", "instance"), "distances")):
        where = f"distances[{i}]"
        if not isinstance(raw, list) or len(raw) != 3:
            raise InstanceError(f"{where}: expected [idA, idB, d]")
        a, b = known(raw[0], where), known(raw[1], where)
        d = _int(raw[2], where)
        if a == b:
            if d != 0:
                raise InstanceError(f"{where}: self distance must be 0")
            continue
        if d == 0:
            raise InstanceError(f"{where}: distance between distinct locations must be positive")
        key = (a, b) if a < b else (b, a)
        if key in distances and distances[key] != d:
            raise InstanceError(f"{where}: asymmetric distance for {key}")
        distances[key] = d
    ids = sorted(kinds)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if (a, b) not in distances:
                raise InstanceError(f"distances: missing pair ({a}, {b})")

    raw_rates = _field(doc, "rates", "instance")
    rates = Rates(**{
        name: _int(raw_rates.get(name, 0), f"rates.{name}")
        if name.startswith("docking_cost") else _int(_field(raw_rates, name, "rates"), f"rates.{name}")
        for name in RATE_FIELDS
    })
    if rates.fuel_per_dist_loaded < rates.fuel_per_dist_empty:
        raise InstanceError("rates: loaded fuel rate below empty rate")

    raw_vessel = _field(doc, "vessel", "instance")
    wcap = _int(_field(raw_vessel, "weight_capacity", "vessel"), "vessel.weight_capacity", 1)
    fcap = _int(_field(raw_vessel, "fuel_capacity", "vessel"), "vessel.fuel_capacity", 1)
    initial = []
    for i, raw in enumerate(_list(_field(raw_vessel, "initial", "vessel"), "vessel.initial")):
        where = f"vessel.initial[{i}]"
        loc = known(_field(raw, "location", where), where)
        if kinds[loc] != WAITING:
            raise InstanceError(f"{where}: vessels must start at a waiting area")
        fuel = _int(_field(raw, "fuel", where), f"{where}.fuel")
        if fuel > fcap:
            raise InstanceError(f"{where}.fuel: exceeds fuel capacity")
        initial.append((loc, fuel))

    cargo = []
    for i, raw in enumerate(_list(_field(doc, "cargo", "instance"), "cargo")):
        where = f"cargo[{i}]"
        origin = known(_field(raw, "origin", where), f"{where}.origin")
        dest = known(_field(raw, "dest", where), f"{where}.dest")
        if kinds[origin] != PORT:
            raise InstanceError(f"{where}.origin: {origin!r} is not a port")
        if kinds[dest] != PLATFORM:
            raise InstanceError(f"{where}.dest: {dest!r} is not a platform")
        weight = _int(_field(raw, "weight", where), f"{where}.weight", 1)
        if weight > wcap:
            raise InstanceError(f"{where}.weight: exceeds vessel weight capacity")
        cargo.append(CargoItem(origin, dest, weight))

    inst = Instance(
        locations=tuple(locations),
        distances=distances,
        rates=rates,
        vessel=VesselSpec(wcap, fcap, tuple(initial)),
        cargo=tuple(cargo),
    )
    # shortcuts through intermediate locations are legal, so this is informational
    violations = triangle_violations(inst)
    if violations:
        a, b, c = violations[0]
        logger.info(
            "%d triangle inequality violations, e.g. d(%s,%s) > d(%s,%s) + d(%s,%s)",
            len(violations), a, c, a, b, b, c,
        )
    return inst


def load_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def dump_instance(inst: Instance) -> dict[str, Any]:
    """Inverse of :func:`parse_instance`; every field is written explicitly."""
    return {
        "locations": [
            {"id": loc.id, "kind": loc.kind, "refuel": loc.refuel, "dock_capacity": loc.dock_capacity}
            for loc in inst.locations
        ],
        "distances": [[a, b, d] for (a, b), d in sorted(inst.distances.items())],
        "rates": {name: getattr(inst.rates, name) for name in RATE_FIELDS},
        "vessel": {
            "weight_capacity": inst.vessel.weight_capacity,
            "fuel_capacity": inst.vessel.fuel_capacity,
            "initial": [{"location": loc, "fuel": fuel} for loc, fuel in inst.vessel.initial],
        },
        "cargo": [{"origin": c.origin, "dest": c.dest, "weight": c.weight} for c in inst.cargo],
    }


def triangle_violations(inst: Instance) -> list[tuple[str, str, str]]:
    """Triples (a, b, c) with d(a, c) > d(a, b) + d(b, c).  Informational only."""
    ids = [loc.id for loc in inst.locations]
    out = []
    for a in ids:
        for c in ids:
            if a >= c:
                continue
            for b in ids:
                if b not in (a, c) and inst.distance(a, c) > inst.distance(a, b) + inst.distance(b, c):
                    out.append((a, b, c))
    return out


def make_instance(
    locations: Iterable[Location],
    distances: Mapping[tuple[str, str], int],
    rates: Rates,
    vessel: VesselSpec,
    cargo: Iterable[CargoItem],
) -> Instance:
    """Validate programmatically built data by round-tripping through the parser."""
    inst = Instance(tuple(locations), dict(distances), rates, vessel, tuple(cargo))
    return parse_instance(dump_instance(inst))
