"""Independent checks: plan and schedule validators, a brute-force oracle, T1.

The validators replay actions against the instance data alone (distances and
rates), never trusting the planner's bookkeeping.  The oracle enumerates the
same trip-structured plan space as the planner without tables, bounds or
estimates, so agreement between the two checks the search machinery.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Any, Iterable, Mapping, Sequence

from . import actions as act
from .errors import Infeasible, SizeGuard
from .instance import PORT, WAITING, CargoItem, Instance, Location, Rates, VesselSpec, make_instance
from .route import plan_leg
from .scheduler import Schedule, action_duration, loaded_flags

FUEL_NEGATIVE = "fuel_negative"
RESERVE_BROKEN = "reserve_broken"
OVERWEIGHT = "overweight"
DOCK_CAPACITY = "dock_capacity"
UNDELIVERED = "undelivered"
WRONG_DESTINATION = "wrong_destination"
BAD_SEQUENCE = "bad_sequence"
END_LOCATION = "end_location"

ORACLE_MAX_CARGO = 6
ORACLE_MAX_VESSELS = 3
ORACLE_MAX_LOCATIONS = 8


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    vessel: str | None = None
    time: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "detail": self.detail, "vessel": self.vessel, "time": self.time}

    def __str__(self) -> str:
        where = f" [{self.vessel}]" if self.vessel else ""
        when = f" @t={self.time}" if self.time is not None else ""
        return f"{self.kind}{where}{when}: {self.detail}"


def t1_instance() -> Instance:
    """The three-location reference instance: one vessel, one cargo item."""
    locations = [
        Location("a1", WAITING),
        Location("p1", PORT, True, 2),
        Location("f1", "platform", False, 1),
    ]
    distances = {("a1", "p1"): 10, ("p1", "f1"): 20, ("a1", "f1"): 25}
    rates = Rates(
        fuel_per_dist_empty=1,
        fuel_per_dist_loaded=2,
        time_per_dist_empty=1,
        time_per_dist_loaded=2,
        dock_time=2,
        undock_time=2,
        refuel_time=5,
        handling_time_per_weight=1,
    )
    vessel = VesselSpec(weight_capacity=50, fuel_capacity=400, initial=(("a1", 400),))
    return make_instance(locations, distances, rates, vessel, [CargoItem("p1", "f1", 20)])


# -- plan validation -----------------------------------------------------

def validate_plan(
    inst: Instance, plans: Mapping[str, Sequence[act.Action]], final_leg: bool = True
) -> list[Violation]:
    """Replay every vessel's actions; an empty result means the plan is feasible."""
    out: list[Violation] = []
    cap_w = inst.vessel.weight_capacity
    cap_f = inst.vessel.fuel_capacity
    start = dict(zip(inst.vessel_ids, inst.vessel.initial))
    loaded_by: dict[str, str] = {}
    delivered: set[str] = set()

    for vid, plan in plans.items():
        if vid not in start:
            out.append(Violation(BAD_SEQUENCE, f"unknown vessel {vid}", vid))
            continue
        loc, fuel = start[vid]
        docked = False
        aboard: list[str] = []

        def bad(kind: str, detail: str) -> None:
            out.append(Violation(kind, detail, vid))

        for step, a in enumerate(plan):
            here = f"action {step} ({a})"
            if a.type == act.NAVIGATE:
                if docked:
                    bad(BAD_SEQUENCE, f"{here}: navigating while docked")
                if a.src != loc:
                    bad(BAD_SEQUENCE, f"{here}: vessel is at {loc}")
                if a.dst not in inst.by_id or a.src not in inst.by_id or a.src == a.dst:
                    bad(BAD_SEQUENCE, f"{here}: bad endpoints")
                    continue
                loaded = bool(aboard)
                cost = inst.leg_fuel(a.src, a.dst, loaded)
                if a.fuel_used is not None and a.fuel_used != cost:
                    bad(BAD_SEQUENCE, f"{here}: declared fuel {a.fuel_used}, actual {cost}")
                fuel -= cost
                loc = a.dst
                if fuel < 0:
                    bad(FUEL_NEGATIVE, f"{here}: fuel {fuel}")
                elif fuel < inst.nearest_refuel_cost(loc, loaded):
                    bad(RESERVE_BROKEN, f"{here}: fuel {fuel} below reserve at {loc}")
                continue

            if a.location != loc:
                bad(BAD_SEQUENCE, f"{here}: vessel is at {loc}")
                continue
            if a.type == act.DOCK:
                if docked or inst.kind(loc) == WAITING:
                    bad(BAD_SEQUENCE, f"{here}: cannot dock")
                docked = True
            elif a.type == act.UNDOCK:
                if not docked:
                    bad(BAD_SEQUENCE, f"{here}: not docked")
                docked = False
            elif not docked:
                bad(BAD_SEQUENCE, f"{here}: needs a docked vessel")
            elif a.type == act.REFUEL:
                if not inst.refuels(loc):
                    bad(BAD_SEQUENCE, f"{here}: no refuelling at {loc}")
                amount = cap_f - fuel if a.amount is None else a.amount
                if amount < 0 or fuel + amount > cap_f:
                    bad(BAD_SEQUENCE, f"{here}: refuel {amount} exceeds the tank")
                fuel = min(cap_f, fuel + max(amount, 0))
            elif a.type == act.LOAD:
                for cid in a.items:
                    item = inst.cargo_by_id.get(cid)
                    if item is None or cid in loaded_by:
                        bad(BAD_SEQUENCE, f"{here}: item {cid} unknown or already taken")
                        continue
                    if item.origin != loc:
                        bad(BAD_SEQUENCE, f"{here}: item {cid} waits at {item.origin}")
                        continue
                    loaded_by[cid] = vid
                    aboard.append(cid)
                weight = sum(inst.cargo_by_id[c].weight for c in aboard)
                if weight > cap_w:
                    bad(OVERWEIGHT, f"{here}: carrying {weight} > {cap_w}")
            elif a.type == act.UNLOAD:
                for cid in a.items:
                    if cid not in aboard:
                        bad(BAD_SEQUENCE, f"{here}: item {cid} not aboard")
                        continue
                    aboard.remove(cid)
                    if inst.cargo_by_id[cid].dest != loc:
                        bad(WRONG_DESTINATION, f"{here}: item {cid} is for {inst.cargo_by_id[cid].dest}")
                    else:
                        delivered.add(cid)

        if docked:
            bad(BAD_SEQUENCE, f"plan ends docked at {loc}")
        if aboard:
            bad(UNDELIVERED, f"plan ends with {aboard} aboard")
        if final_leg and inst.kind(loc) != WAITING:
            bad(END_LOCATION, f"plan ends at {loc}")

    for vid in inst.vessel_ids:
        if final_leg and vid not in plans and inst.kind(start[vid][0]) != WAITING:
            out.append(Violation(END_LOCATION, "idle vessel outside a waiting area", vid))
    for cid in inst.cargo_ids:
        if cid not in delivered:
            out.append(Violation(UNDELIVERED, f"item {cid} never delivered"))
    return out


# -- schedule validation -------------------------------------------------

def validate_schedule(inst: Instance, sched: Schedule, final_leg: bool = True) -> list[Violation]:
    """Timing checks plus a replay of the underlying plans."""
    out: list[Violation] = []
    by_vessel: dict[str, list] = {}
    for t in sched.actions:
        by_vessel.setdefault(t.vessel, []).append(t)

    spans: dict[str, list[tuple[int, int, str]]] = {}
    for vid, timed in by_vessel.items():
        flags = loaded_flags([t.action for t in timed])
        free = 0
        dock_start = None
        inner_free = 0
        inner_end = 0
        for t, loaded in zip(timed, flags):
            a = t.action
            if t.end - t.start != action_duration(inst, a, loaded and a.type == act.NAVIGATE):
                out.append(Violation(BAD_SEQUENCE, f"{a} lasts {t.end - t.start}", vid, t.start))
            if a.type == act.DOCK:
                if t.start < free:
                    out.append(Violation(BAD_SEQUENCE, f"{a} starts before {free}", vid, t.start))
                dock_start = t.start
                inner_free = inner_end = free = t.end
            elif a.type == act.UNDOCK:
                if t.start < max(free, inner_end):
                    out.append(Violation(BAD_SEQUENCE, f"{a} starts before its block ends", vid, t.start))
                if dock_start is not None:
                    spans.setdefault(a.location, []).append((dock_start, t.end, vid))
                dock_start = None
                free = t.end
            elif a.type == act.REFUEL and dock_start is not None:
                # refuelling may run beside loading and unloading
                if t.start < free:
                    out.append(Violation(BAD_SEQUENCE, f"{a} starts before {free}", vid, t.start))
                inner_end = max(inner_end, t.end)
            elif a.type in (act.LOAD, act.UNLOAD) and dock_start is not None:
                if t.start < inner_free:
                    out.append(Violation(BAD_SEQUENCE, f"{a} overlaps other handling", vid, t.start))
                inner_free = t.end
                inner_end = max(inner_end, t.end)
            else:
                if t.start < free:
                    out.append(Violation(BAD_SEQUENCE, f"{a} starts before {free}", vid, t.start))
                free = t.end

    for loc, intervals in spans.items():
        cap = inst.by_id[loc].dock_capacity
        if cap is None:
            continue
        events = sorted([(s, 1) for s, _, _ in intervals] + [(e, -1) for _, e, _ in intervals])
        level = 0
        for when, delta in events:
            level += delta
            if level > cap:
                out.append(Violation(DOCK_CAPACITY, f"{level} vessels docked at {loc}", time=when))
                break

    makespan = max((t.end for t in sched.actions), default=0)
    if sched.makespan != makespan:
        out.append(Violation(BAD_SEQUENCE, f"makespan {sched.makespan} but last action ends at {makespan}"))
    plans = {vid: [t.action for t in timed] for vid, timed in by_vessel.items()}
    out += validate_plan(inst, plans, final_leg)
    return out


# -- brute-force oracle --------------------------------------------------

Item = tuple[str, str, int]


class _Oracle:
    def __init__(self, inst: Instance, final_leg: bool) -> None:
        self.inst = inst
        self.final_leg = final_leg
        self.cap_w = inst.vessel.weight_capacity
        self.cap_f = inst.vessel.fuel_capacity

    def leg(self, src: str, dst: str, fuel: int, loaded: bool):
        return plan_leg(self.inst, src, dst, fuel, loaded)

    def loads(self, items: list[Item], free: int) -> list[tuple[Item, ...]]:
        """Distinct non-dominated load multisets among ``items``."""
        seen = set()
        out = []
        for r in range(1, len(items) + 1):
            for idx in combinations(range(len(items)), r):
                chosen = tuple(sorted(items[i] for i in idx))
                if chosen in seen:
                    continue
                seen.add(chosen)
                weight = sum(i[2] for i in chosen)
                if weight > free:
                    continue
                dests = {i[1] for i in chosen}
                rest = Counter(items) - Counter(chosen)
                if any(i[1] in dests and weight + i[2] <= free for i in rest):
                    continue
                out.append(chosen)
        return out

    def delivery(self, start: str, dests: set[str], targets: tuple[str, ...] | None):
        """Cheapest (fuel, visits) delivery over every visiting order."""
        best = None
        for order in permutations(sorted(dests)):
            loc, fuel, used, visits, ok = start, self.cap_f, 0, (), True
            for d in order:
                if d != loc:
                    leg = self.leg(loc, d, fuel, True)
                    if leg is None:
                        ok = False
                        break
                    used += leg.fuel_used
                    fuel = leg.fuel_after
                    visits += leg.stops
                    loc = d
                if self.inst.refuels(d):
                    fuel = self.cap_f
            if not ok:
                continue
            if targets is not None and loc not in targets:
                ends = []
                for t in targets:
                    leg = self.leg(loc, t, fuel, False)
                    if leg is not None:
                        ends.append((leg.fuel_used, leg.stops, t, leg.fuel_after))
                if not ends:
                    continue
                f, stops, t, after = min(ends)
                cand = (used + f, visits + stops, t, after)
            else:
                cand = (used, visits, loc, fuel)
            if best is None or cand[:2] < best[:2]:
                best = cand
        return best

    def park(self, fleet: tuple[tuple[str, int], ...]) -> float:
        if not self.final_leg:
            return 0
        total = 0
        for loc, fuel in fleet:
            if self.inst.kind(loc) == WAITING:
                continue
            costs = [
                leg.fuel_used
                for w in self.inst.waiting_ids
                if (leg := self.leg(loc, w, fuel, False)) is not None
            ]
            if not costs:
                return math.inf
            total += min(costs)
        return total

    def trips(self, cargo: tuple[Item, ...], fleet: tuple[tuple[str, int], ...]):
        """Every trip out of a state: (fuel, cargo after, fleet after)."""
        inst = self.inst
        ports = sorted({c[0] for c in cargo})
        for port in ports:
            vloc = min({v[0] for v in fleet}, key=lambda l: (inst.distance(l, port), l))
            vfuel = min(v[1] for v in fleet if v[0] == vloc)
            prefix = 0
            if vloc != port:
                leg = self.leg(vloc, port, vfuel, False)
                if leg is None:
                    continue
                prefix = leg.fuel_used
            for first in self.loads([c for c in cargo if c[0] == port], self.cap_w):
                free = self.cap_w - sum(i[2] for i in first)
                for extra, hop_fuel, last in self.extras(cargo, port, port, "", free):
                    taken = first + extra
                    left = list(cargo)
                    for item in taken:
                        left.remove(item)
                    left_t = tuple(sorted(left))
                    # relocate to a waiting area or to any port that still has cargo
                    choices = [None]
                    if self.final_leg:
                        choices = [tuple(inst.waiting_ids)] + [(p,) for p in sorted({c[0] for c in left})]
                    for targets in choices:
                        route = self.delivery(last, {i[1] for i in taken}, targets)
                        if route is None:
                            continue
                        fleet_after = list(fleet)
                        fleet_after.remove((vloc, vfuel))
                        fleet_after.append((route[2], route[3]))
                        yield prefix + hop_fuel + route[0], left_t, tuple(sorted(fleet_after))

    def extras(self, cargo, first: str, here: str, after: str, free: int):
        """Loads at further ports, visited in increasing id order."""
        yield (), 0, here
        for port in sorted({c[0] for c in cargo}):
            if port == first or port <= after:
                continue
            options = self.loads([c for c in cargo if c[0] == port], free)
            if not options:
                continue
            hop = self.leg(here, port, self.cap_f, True)
            if hop is None:
                continue
            for chosen in options:
                weight = sum(i[2] for i in chosen)
                for rest, f, last in self.extras(cargo, first, port, port, free - weight):
                    yield chosen + rest, hop.fuel_used + f, last

    def solve(self, cargo: tuple[Item, ...], fleet: tuple[tuple[str, int], ...], path=frozenset()) -> float:
        if not cargo:
            return self.park(fleet)
        key = (cargo, fleet)
        if key in path:
            return math.inf
        path = path | {key}
        best = math.inf
        for fuel, cargo_next, fleet_next in self.trips(cargo, fleet):
            best = min(best, fuel + self.solve(cargo_next, fleet_next, path))
        return best


def _guard(inst: Instance) -> None:
    if (
        len(inst.cargo) > ORACLE_MAX_CARGO
        or len(inst.vessel.initial) > ORACLE_MAX_VESSELS
        or len(inst.locations) > ORACLE_MAX_LOCATIONS
    ):
        raise SizeGuard(
            f"oracle accepts at most {ORACLE_MAX_CARGO} cargo, {ORACLE_MAX_VESSELS} vessels "
            f"and {ORACLE_MAX_LOCATIONS} locations"
        )


def oracle_completion(
    inst: Instance,
    cargo: Iterable[Item],
    fleet: Iterable[tuple[str, int]],
    final_leg: bool = True,
) -> float:
    """Exact remaining fuel from an arbitrary state; ``inf`` when stuck."""
    _guard(inst)
    return _Oracle(inst, final_leg).solve(tuple(sorted(cargo)), tuple(sorted(fleet)))


def oracle_solve(inst: Instance, final_leg: bool = True) -> int:
    """Minimum fuel by exhaustive enumeration; raises :class:`Infeasible`."""
    cargo = [(c.origin, c.dest, c.weight) for c in inst.cargo]
    best = oracle_completion(inst, cargo, inst.vessel.initial, final_leg)
    if math.isinf(best):
        raise Infeasible("no trip sequence delivers all cargo")
    return int(best)
