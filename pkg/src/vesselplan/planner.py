"""Top-level tabled search over delivery trips with branch-and-bound.

Every transition is a whole trip: bring the closest vessel to a cargo port,
refuel and load a cargo subset there, optionally load at further ports,
deliver along a min-fuel route and relocate empty.  The search is a
depth-first min-aggregation over canonical states.  With branch-and-bound,
the fuel consumed so far travels alongside the state (it is not part of the
memo key) and trips whose consumed fuel plus an admissible estimate of the
remaining fuel reach the incumbent are cut.
"""
from __future__ import annotations

import math
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Iterator

from . import actions as act
from .errors import Infeasible, SolveTimeout
from .instance import WAITING, Instance
from .memo import MemoTable, Verdict
from .route import Leg, RoutePlanner, RouteResult
from .state import (
    CanonicalFleet,
    CanonicalState,
    Item,
    Vessel,
    canonicalize,
    cargo_items,
    fleet_members,
    move_vessel,
    pending_destinations,
    port_cargo,
    ports_with_cargo,
    remove_cargo,
    state_key,
)

Load = tuple[str, tuple[tuple[str, int], ...]]


@dataclass(frozen=True)
class SolverOptions:
    tabling: bool = True
    bnb: bool = True
    # only meaningful together with bnb; ignored otherwise
    lookahead: bool = True
    final_leg: bool = True
    initial_bound: float = math.inf
    max_stops: int = 1
    # count the empty relocation leg of every future trip in the look-ahead
    relocation_bound: bool = True
    # search over the empty relocation target instead of taking the cheapest
    branch_relocation: bool = True
    timeout_ms: int | None = None
    max_expansions: int | None = None

    @property
    def uses_lookahead(self) -> bool:
        return self.bnb and self.lookahead

    def label(self) -> str:
        return "".join(
            name if flag else "-" for name, flag in
            (("T", self.tabling), ("B", self.bnb), ("L", self.lookahead))
        )


@dataclass(frozen=True)
class TripChoice:
    # None marks the closing move of an idle vessel back to a waiting area
    port: str | None
    vessel: Vessel
    loads: tuple[Load, ...]
    route: RouteResult
    fuel: int
    approach: Leg | None = None
    hops: tuple[Leg, ...] = ()

    @property
    def final(self) -> Vessel:
        return (self.route.final_loc, self.route.final_fuel)

    @property
    def items(self) -> list[Item]:
        return [(port, dest, w) for port, group in self.loads for dest, w in group]

    def signature(self) -> tuple:
        """Anonymous description used to compare plans across runs."""
        return (self.port, self.vessel, self.loads, self.final, self.fuel)

    def to_dict(self) -> dict[str, Any]:
        return {
            "port": self.port,
            "vessel": list(self.vessel),
            "loads": [[p, [list(i) for i in group]] for p, group in self.loads],
            "fuel": self.fuel,
            "final": list(self.final),
        }


def trip_actions(inst: Instance, trip: TripChoice) -> list[act.Action]:
    """Primitive actions of a trip; cargo items are (origin, dest, weight)."""
    cap = inst.vessel.fuel_capacity
    out: list[act.Action] = []
    if trip.port is None:
        return list(trip.route.actions)
    fuel = trip.vessel[1]
    if trip.approach is not None:
        out += trip.approach.actions
        fuel = trip.approach.fuel_after
    for i, (port, group) in enumerate(trip.loads):
        if i > 0:
            hop = trip.hops[i - 1]
            out += hop.actions
            fuel = hop.fuel_after
        items = tuple((port, dest, w) for dest, w in group)
        out += [act.dock(port), act.refuel(port, cap - fuel), act.load(port, items), act.undock(port)]
        fuel = cap
    by_dest: dict[str, list[Item]] = defaultdict(list)
    for item in trip.items:
        by_dest[item[1]].append(item)
    for a in trip.route.actions:
        if a.type == act.UNLOAD:
            a = act.unload(a.location, tuple(by_dest[a.location]))
        out.append(a)
    return out


def min_trips(weights: list[int], capacity: int) -> int:
    """Bin-packing lower bound on the number of trips needed for ``weights``."""
    if not weights:
        return 0
    heavy = sum(1 for w in weights if 2 * w > capacity)
    return max(-(-sum(weights) // capacity), heavy)


def select_vessel(fleet: CanonicalFleet, port: str, inst: Instance) -> Vessel:
    """Closest vessel to ``port``; the lowest fuel level among co-located ones."""
    loc, fuels = min(fleet, key=lambda group: (inst.distance(group[0], port), group[0]))
    return (loc, fuels[0])


def cargo_subsets(
    port_cargo: list[tuple[str, int]], capacity: int
) -> list[tuple[tuple[str, int], ...]]:
    """Non-dominated load choices at one port.

    Identical (dest, weight) items are treated as a multiset so each load is
    produced once.  A load is dropped when a left-behind item bound for one of
    its destinations would still fit: taking it costs no extra route fuel.
    Results are ordered heaviest first.
    """
    counts: dict[tuple[str, int], int] = defaultdict(int)
    for item in port_cargo:
        counts[item] += 1
    kinds = sorted(counts, key=lambda k: (k[0], -k[1]))
    out = []
    for choice in product(*(range(counts[k] + 1) for k in kinds)):
        total = sum(k[1] * n for k, n in zip(kinds, choice))
        if total == 0 or total > capacity:
            continue
        dests = {k[0] for k, n in zip(kinds, choice) if n}
        dominated = any(
            n < counts[k] and k[0] in dests and total + k[1] <= capacity
            for k, n in zip(kinds, choice)
        )
        if dominated:
            continue
        subset = tuple(k for k, n in zip(kinds, choice) for _ in range(n))
        out.append((-total, subset))
    out.sort()
    return [s for _, s in out]


@dataclass
class Solution:
    fuel: int
    trips: list[TripChoice]
    per_vessel_plans: dict[str, list[act.Action]]
    stats: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_stats: bool = False) -> dict[str, Any]:
        doc = {
            "fuel": self.fuel,
            "trips": [t.to_dict() for t in self.trips],
            "vessels": [
                {"id": vid, "actions": [a.to_dict() for a in plan]}
                for vid, plan in self.per_vessel_plans.items()
            ],
        }
        if include_stats:
            doc["stats"] = self.stats
        return doc


@dataclass(frozen=True)
class _Candidate:
    # lower bound on trip fuel after the approach, estimate of the rest included
    bound: float
    loads: tuple[Load, ...]
    hops: tuple[Leg, ...]
    hop_fuel: int
    dests: frozenset[str]
    h: float


def _close(tour: list[float], n: int) -> None:
    """Superset closure: a tour may visit more than it is asked to cover."""
    full = (1 << n) - 1
    for i in range(n):
        bit = 1 << i
        for mask in range(full + 1):
            if not mask & bit and tour[mask | bit] < tour[mask]:
                tour[mask] = tour[mask | bit]


def _split(tour: list[float], n: int, min_trips: int) -> float:
    """Cheapest split of all ``n`` destinations into at least ``min_trips`` tours."""
    full = (1 << n) - 1
    # parts[j][mask]: cheapest split of mask into exactly j tours
    parts = [[math.inf] * (full + 1) for _ in range(n + 1)]
    parts[0][0] = 0
    for j in range(1, n + 1):
        prev, cur = parts[j - 1], parts[j]
        for mask in range(1, full + 1):
            low = mask & -mask
            rest = mask ^ low
            best = math.inf
            sub = rest
            while True:
                t = sub | low
                v = tour[t] + prev[mask ^ t]
                if v < best:
                    best = v
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            cur[mask] = best
    # trips beyond the split still each fly a tour of some destination
    cheapest = min(tour[1:])
    return min(
        parts[j][full] + (cheapest * (min_trips - j) if min_trips > j else 0)
        for j in range(1, n + 1)
    )


class Planner:
    """One solver run: owns its memo tables, route planner and incumbent."""

    def __init__(self, inst: Instance, opts: SolverOptions = SolverOptions()) -> None:
        self.inst = inst
        self.opts = opts
        self.cap_weight = inst.vessel.weight_capacity
        self.cap_fuel = inst.vessel.fuel_capacity
        deadline = None
        if opts.timeout_ms is not None:
            deadline = time.monotonic() + opts.timeout_ms / 1000
        self.deadline = deadline
        self.routes = RoutePlanner(inst, opts.tabling, opts.max_stops, deadline)
        self.table = MemoTable()
        self.incumbent: float = opts.initial_bound
        self.expansions = 0
        self.prunes = 0
        self._h_cache: dict[tuple, float] = {}
        self._est_cache: dict[tuple, float] = {}
        self._subset_cache: dict[tuple, list] = {}
        self._cand_cache: dict[tuple, list[_Candidate]] = {}
        # (state, heuristic) pairs, filled only when instrumented
        self.trace: list[tuple[CanonicalState, float]] | None = None

    # -- heuristic -------------------------------------------------------
    def heuristic(self, state: CanonicalState) -> float:
        """Admissible estimate of the fuel still needed from ``state``.

        Every future trip ends with a loaded tour that leaves its last load
        port with a full tank and visits exactly that trip's destinations, so
        the pending destinations must be covered by such tours (priced with
        the weight-relaxed route bound).  Trips that load at a single port
        only serve that port's cargo; a trip loading at several ports pays at
        least one port-to-port hop.  The estimate is the smaller of the two
        cases: every trip single-port, or at least one multi-port trip.
        With ``relocation_bound`` each tour also pays its empty relocation leg.
        """
        if not state.cargo:
            return 0
        return self._estimate({p: tuple(port_cargo(state, p)) for p in ports_with_cargo(state)})

    def _estimate(self, pending: dict[str, tuple[tuple[str, int], ...]]) -> float:
        left = tuple((p, items) for p, items in sorted(pending.items()) if items)
        if not left:
            return 0
        if self.opts.tabling:
            try:
                return self._est_cache[left]
            except KeyError:
                pass
        ports = tuple(p for p, _ in left)
        targets = None
        if self.opts.final_leg and self.opts.relocation_bound:
            targets = tuple(sorted(set(self.inst.waiting_ids) | set(ports)))
        per_port = 0
        all_dests: set[str] = set()
        all_weights: list[int] = []
        for p, items in left:
            dests = tuple(sorted({d for d, _ in items}))
            weights = [w for _, w in items]
            all_dests.update(dests)
            all_weights += weights
            per_port += self._cover_bound((p,), dests, min_trips(weights, self.cap_weight), targets)
        value = per_port
        if len(ports) > 1:
            mixed = self._min_hop(ports) + self._cover_bound(
                ports, tuple(sorted(all_dests)), min_trips(all_weights, self.cap_weight), targets
            )
            value = min(per_port, mixed)
        if self.opts.tabling:
            self._est_cache[left] = value
        return value

    def _min_hop(self, ports: tuple[str, ...]) -> float:
        best = math.inf
        for a in ports:
            for b in ports:
                if a != b:
                    leg = self.routes.leg(a, b, self.cap_fuel, True)
                    if leg is not None and leg.fuel_used < best:
                        best = leg.fuel_used
        return best

    def _cover_bound(
        self,
        ports: tuple[str, ...],
        dests: tuple[str, ...],
        min_trips: int = 1,
        targets: tuple[str, ...] | None = None,
    ) -> float:
        """Cheapest cover of ``dests`` by at least ``min_trips`` tours from ``ports``."""
        if not dests:
            return 0
        key = (ports, dests, min_trips, targets)
        if self.opts.tabling and key in self._h_cache:
            return self._h_cache[key]
        n = len(dests)
        full = (1 << n) - 1
        tour = [math.inf] * (full + 1)
        tour[0] = 0
        for mask in range(1, full + 1):
            group = [dests[i] for i in range(n) if mask >> i & 1]
            tour[mask] = min(self.routes.route_lower_bound(p, group, targets) for p in ports)
        _close(tour, n)
        value = _split(tour, n, min_trips)
        if self.opts.tabling:
            self._h_cache[key] = value
        return value

    # -- trip enumeration -----------------------------------------------
    def _subsets(self, items: list[tuple[str, int]], capacity: int) -> list:
        if not self.opts.tabling:
            return cargo_subsets(items, capacity)
        key = (tuple(items), capacity)
        try:
            return self._subset_cache[key]
        except KeyError:
            out = self._subset_cache[key] = cargo_subsets(items, capacity)
            return out

    def _extra_loads(
        self, state: CanonicalState, first: str, here: str, after: str, free: int
    ) -> Iterator[tuple[tuple[Load, Leg], ...]]:
        yield ()
        for port in ports_with_cargo(state):
            if port == first or port <= after:
                continue
            subsets = self._subsets(port_cargo(state, port), free)
            if not subsets:
                continue
            hop = self.routes.leg(here, port, self.cap_fuel, True)
            if hop is None:
                continue
            for subset in subsets:
                weight = sum(w for _, w in subset)
                for rest in self._extra_loads(state, first, port, port, free - weight):
                    yield (((port, subset), hop),) + rest

    def _candidates(self, state: CanonicalState, port: str) -> list[_Candidate]:
        """Load choices for trips starting at ``port``, cheapest bound first.

        Nothing here depends on the fleet, so with tabling the list is kept
        per (cargo, port) and shared by every fleet arrangement.
        """
        key = (state.cargo, port)
        if self.opts.tabling:
            cached = self._cand_cache.get(key)
            if cached is not None:
                return cached
        bnb = self.opts.bnb
        look = self.opts.uses_lookahead
        ports = ports_with_cargo(state)
        pending = {p: tuple(port_cargo(state, p)) for p in ports}
        reach = None
        if self.opts.final_leg:
            reach = tuple(sorted(set(self.inst.waiting_ids) | set(ports)))
        out = []
        for subset in self._subsets(port_cargo(state, port), self.cap_weight):
            free = self.cap_weight - sum(w for _, w in subset)
            for extra in self._extra_loads(state, port, port, "", free):
                loads = ((port, subset),) + tuple(load for load, _ in extra)
                hops = tuple(hop for _, hop in extra)
                hop_fuel = sum(h.fuel_used for h in hops)
                dests = frozenset(d for _, group in loads for d, _ in group)
                bound = h = 0
                if bnb:
                    # every real relocation target is among ``reach``
                    bound = hop_fuel + self.routes.route_lower_bound(loads[-1][0], dests, reach)
                    if look:
                        h = self._bound_after(pending, loads)
                        bound += h
                out.append(_Candidate(bound, loads, hops, hop_fuel, dests, h))
        if bnb:
            out.sort(key=lambda c: c.bound)
        if self.opts.tabling:
            self._cand_cache[key] = out
        return out

    def expand(
        self, state: CanonicalState, consumed: float = 0
    ) -> Iterator[tuple[TripChoice, CanonicalState, int, float]]:
        """Trips out of ``state`` with pruning.

        Ports come in id order; within a port, load choices come cheapest
        lower bound first (enumeration order without branch-and-bound).
        Yields (trip, next state, trip fuel, estimate for the next state);
        the estimate is 0 without look-ahead.
        """
        inst = self.inst
        bnb = self.opts.bnb
        waiting = inst.waiting_ids
        for port in ports_with_cargo(state):
            vessel = select_vessel(state.fleet, port, inst)
            if vessel[0] == port:
                approach = None
                prefix = 0
            else:
                approach = self.routes.leg(vessel[0], port, vessel[1], False)
                if approach is None:
                    continue
                prefix = approach.fuel_used
            if bnb and consumed + prefix >= self.incumbent:
                self.prunes += 1
                continue
            cands = self._candidates(state, port)
            for i, cand in enumerate(cands):
                if bnb and consumed + prefix + cand.bound >= self.incumbent:
                    # sorted by bound: the rest cannot do better
                    self.prunes += len(cands) - i
                    break
                loads = cand.loads
                removed = [(p, d, w) for p, group in loads for d, w in group]
                cargo_next = remove_cargo(state.cargo, removed)
                if not self.opts.final_leg:
                    choices = [None]
                elif self.opts.branch_relocation:
                    # the cheapest waiting area, or any port that still has cargo
                    choices = [tuple(waiting)] + [(o,) for o, _ in cargo_next]
                else:
                    choices = [tuple(sorted(set(waiting) | {o for o, _ in cargo_next}))]
                for targets in choices:
                    route = self.routes.try_path_plan(loads[-1][0], self.cap_fuel, cand.dests, targets)
                    if route is None:
                        continue
                    trip_fuel = prefix + cand.hop_fuel + route.fuel
                    if bnb and consumed + trip_fuel + cand.h >= self.incumbent:
                        self.prunes += 1
                        continue
                    nxt = CanonicalState(
                        cargo_next,
                        move_vessel(state.fleet, vessel, (route.final_loc, route.final_fuel)),
                    )
                    yield (
                        TripChoice(port, vessel, loads, route, trip_fuel, approach, cand.hops),
                        nxt,
                        trip_fuel,
                        cand.h,
                    )

    def _bound_after(
        self, pending: dict[str, tuple[tuple[str, int], ...]], loads: tuple[Load, ...]
    ) -> float:
        """Heuristic value of the state left once ``loads`` are gone."""
        left = dict(pending)
        for port, group in loads:
            rest = list(left[port])
            for item in group:
                rest.remove(item)
            left[port] = tuple(rest)
        return self._estimate(left)

    def _park(self, state: CanonicalState) -> tuple[int, tuple] | None:
        """Send every vessel left outside a waiting area to the cheapest one."""
        if not self.opts.final_leg:
            return 0, None
        inst = self.inst
        total = 0
        moves = []
        for loc, fuel in fleet_members(state):
            if inst.kind(loc) == WAITING:
                continue
            best = None
            for w in inst.waiting_ids:
                leg = self.routes.leg(loc, w, fuel, False)
                if leg is not None and (best is None or (leg.fuel_used, leg.stops) < (best[0].fuel_used, best[0].stops)):
                    best = (leg, w)
            if best is None:
                return None
            leg, w = best
            route = RouteResult(w, leg.fuel_after, leg.fuel_used, leg.actions, leg.stops)
            moves.append(TripChoice(None, (loc, fuel), (), route, leg.fuel_used))
            total += leg.fuel_used
        payload = None
        for trip in reversed(moves):
            payload = (trip, payload)
        return total, payload

    # -- search ------------------------------------------------------------
    def _tick(self) -> None:
        self.expansions += 1
        # the cap covers search and routing nodes alike
        limit = self.opts.max_expansions
        if limit is not None and self.expansions + self.routes.expansions > limit:
            raise SolveTimeout("expansion limit reached")
        if self.deadline is not None and self.expansions & 63 == 0 and time.monotonic() > self.deadline:
            raise SolveTimeout("time limit reached")

    def _search(self, state: CanonicalState, consumed: float) -> tuple[int, Any] | None:
        budget = self.incumbent - consumed if self.opts.bnb else math.inf
        key = None
        if self.opts.tabling:
            key = state_key(state)
            verdict, entry = self.table.consult(key, budget)
            if verdict is Verdict.USE_EXACT:
                self._improve(consumed + entry.cost)
                return entry.cost, entry.payload
            if verdict is Verdict.FAIL_FAST:
                return None
        if self.trace is not None and self.opts.uses_lookahead:
            self.trace.append((state, self.heuristic(state)))

        if not state.cargo:
            result = self._park(state)
            if result is not None and key is not None:
                self.table.record_solved(key, result[0], result[1])
        else:
            self._tick()
            result = None
            for trip, nxt, trip_fuel, h in self.expand(state, consumed):
                if self.opts.bnb and consumed + trip_fuel + h >= self.incumbent:
                    self.prunes += 1
                    continue
                sub = self._search(nxt, consumed + trip_fuel)
                if sub is None:
                    continue
                total = trip_fuel + sub[0]
                if result is None or total < result[0]:
                    result = (total, (trip, sub[1]))

        if result is not None and not result[0] < budget:
            result = None
        if result is None:
            if key is not None:
                self.table.record_failed(key, budget)
            return None
        if key is not None:
            self.table.record_solved(key, result[0], result[1])
        self._improve(consumed + result[0])
        return result

    def _improve(self, total: float) -> None:
        if self.opts.bnb and total < self.incumbent:
            self.incumbent = total

    def initial_state(self) -> CanonicalState:
        return canonicalize(self.inst.cargo, self.inst.vessel.initial)

    def run(self) -> Solution:
        start = time.perf_counter()
        root = self.initial_state()
        found = self._search(root, 0)
        if found is None:
            if math.isinf(self.opts.initial_bound):
                raise Infeasible("some cargo cannot be delivered")
            raise Infeasible(f"no plan cheaper than bound {self.opts.initial_bound}")
        fuel, payload = found
        trips = []
        while payload is not None:
            trip, payload = payload
            trips.append(trip)
        plans = resolve_vessel_ids(self.inst, trips)
        stats = self.stats()
        stats["wall_time_ms"] = round((time.perf_counter() - start) * 1000, 3)
        return Solution(fuel, trips, plans, stats)

    def stats(self) -> dict[str, Any]:
        return {
            "expansions": self.expansions,
            "route_expansions": self.routes.expansions,
            "memo_hits": self.table.hits + self.routes.table.hits,
            "prunes": self.prunes,
            "peak_table_size": self.table.peak_size,
            "plan_table": self.table.stats(),
            "route_table": self.routes.stats(),
        }


def resolve_vessel_ids(inst: Instance, trips: list[TripChoice]) -> dict[str, list[act.Action]]:
    """Bind anonymous trips to concrete vessels and cargo ids.

    Trips are replayed in order; each picks the lowest-numbered vessel whose
    current (location, fuel) matches its signature, and each anonymous item
    the lowest-numbered undelivered cargo item with the same origin,
    destination and weight.
    """
    fleet = [list(v) for v in inst.vessel.initial]
    plans: dict[str, list[act.Action]] = {vid: [] for vid in inst.vessel_ids}
    free_items: dict[Item, list[str]] = defaultdict(list)
    for cid, c in zip(inst.cargo_ids, inst.cargo):
        free_items[(c.origin, c.dest, c.weight)].append(cid)
    for trip in trips:
        idx = next(
            (i for i, v in enumerate(fleet) if (v[0], v[1]) == tuple(trip.vessel)), None
        )
        if idx is None:
            raise RuntimeError(f"no vessel matches trip signature {trip.vessel}")
        taken: dict[Item, list[str]] = defaultdict(list)
        for item in trip.items:
            pool = free_items[item]
            if not pool:
                raise RuntimeError(f"no cargo item matches {item}")
            taken[item].append(pool.pop(0))
        for a in trip_actions(inst, trip):
            if a.type in (act.LOAD, act.UNLOAD):
                seen: Counter[Item] = Counter()
                ids = []
                for item in a.items:
                    ids.append(taken[item][seen[item]])
                    seen[item] += 1
                a = act.Action(a.type, location=a.location, items=tuple(ids))
            plans[inst.vessel_ids[idx]].append(a)
        fleet[idx] = [trip.final[0], trip.final[1]]
    return plans


def solve(inst: Instance, opts: SolverOptions = SolverOptions()) -> Solution:
    """Minimum-fuel plan within the trip-structured plan space."""
    return Planner(inst, opts).run()
