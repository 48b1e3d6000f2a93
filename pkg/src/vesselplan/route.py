"""Single legs with refuelling stops, and min-fuel delivery routes.

:func:`navigate` moves a vessel between two locations, inserting refuelling
stops only when the direct hop would break the fuel reserve.
:class:`RoutePlanner` finds the cheapest order to visit a set of delivery
destinations from a loaded vessel; answers are tabled on
``(location, fuel, destinations left, relocation targets)``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable

from . import actions as act
from .errors import NoRoute, SolveTimeout, Unreachable
from .instance import Instance
from .memo import MemoTable, Verdict


@dataclass(frozen=True)
class Leg:
    actions: tuple[act.Action, ...]
    fuel_used: int
    fuel_after: int
    time: int
    # every location navigated to: refuelling stops, then the destination
    stops: tuple[str, ...]


@dataclass(frozen=True)
class RouteResult:
    final_loc: str
    final_fuel: int
    fuel: int
    actions: tuple[act.Action, ...]
    visits: tuple[str, ...] = ()

    def sort_key(self) -> tuple[int, tuple[str, ...]]:
        return (self.fuel, self.visits)


def _hop_time(inst: Instance, a: str, b: str, loaded: bool) -> int:
    return inst.leg_time(a, b, loaded)


def plan_leg(
    inst: Instance, src: str, dst: str, fuel: int, loaded: bool, max_stops: int = 1
) -> Leg | None:
    """Like :func:`navigate` but returns ``None`` instead of raising."""
    cap = inst.vessel.fuel_capacity
    reserve = inst.nearest_refuel_cost(dst, loaded)
    direct = inst.leg_fuel(src, dst, loaded)
    if fuel - direct >= reserve:
        return Leg(
            (act.navigate(src, dst, direct),),
            direct,
            fuel - direct,
            _hop_time(inst, src, dst, loaded),
            (dst,),
        )

    # intermediate stations only: refuelling happens on docking, not mid-leg
    stations = [s for s in inst.refuel_ids if s not in (src, dst)]
    best: tuple[int, tuple[str, ...]] | None = None
    for n in range(1, max_stops + 1):
        for chain in permutations(stations, n):
            path = (src, *chain)
            level = fuel
            used = 0
            ok = True
            for a, b in zip(path, path[1:]):
                cost = inst.leg_fuel(a, b, loaded)
                if level - cost < 0:
                    ok = False
                    break
                used += cost
                level = cap
            if not ok:
                continue
            last = inst.leg_fuel(chain[-1], dst, loaded)
            if cap - last < reserve:
                continue
            cand = (used + last, chain)
            if best is None or cand < best:
                best = cand
    if best is None:
        return None

    total, chain = best
    rates = inst.rates
    steps: list[act.Action] = []
    level = fuel
    elapsed = 0
    here = src
    for s in chain:
        cost = inst.leg_fuel(here, s, loaded)
        steps.append(act.navigate(here, s, cost))
        elapsed += _hop_time(inst, here, s, loaded)
        level -= cost
        steps += [act.dock(s), act.refuel(s, cap - level), act.undock(s)]
        elapsed += rates.dock_time + rates.refuel_time + rates.undock_time
        level = cap
        here = s
    last = inst.leg_fuel(here, dst, loaded)
    steps.append(act.navigate(here, dst, last))
    elapsed += _hop_time(inst, here, dst, loaded)
    stops = chain + (dst,)
    return Leg(tuple(steps), total, cap - last, elapsed, stops)


def navigate(
    inst: Instance, src: str, dst: str, fuel: int, loaded: bool, max_stops: int = 1
) -> Leg:
    """One leg from ``src`` to ``dst`` that keeps the arrival fuel reserve.

    The direct hop is taken whenever the vessel arrives with at least the fuel
    needed to reach the nearest station.  Otherwise the cheapest chain of up to
    ``max_stops`` refuelling stations (refuel to full at each) is used, ties
    broken by station ids.
    """
    if src == dst:
        raise ValueError("navigate needs two distinct locations")
    leg = plan_leg(inst, src, dst, fuel, loaded, max_stops)
    if leg is None:
        raise Unreachable(f"{dst} unreachable from {src} with fuel {fuel}")
    return leg


class RoutePlanner:
    """Tabled delivery routing for one solver run."""

    def __init__(
        self,
        inst: Instance,
        tabling: bool = True,
        max_stops: int = 1,
        deadline: float | None = None,
    ) -> None:
        self.inst = inst
        self.tabling = tabling
        self.max_stops = max_stops
        self.deadline = deadline
        self.table = MemoTable()
        self.bound_table: dict[tuple, float] = {}
        self._legs: dict[tuple[str, str, int, bool], Leg | None] = {}
        self.expansions = 0

    def _check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SolveTimeout("route planning exceeded the time limit")

    def leg(self, src: str, dst: str, fuel: int, loaded: bool) -> Leg | None:
        if not self.tabling:
            return plan_leg(self.inst, src, dst, fuel, loaded, self.max_stops)
        key = (src, dst, fuel, loaded)
        try:
            return self._legs[key]
        except KeyError:
            leg = self._legs[key] = plan_leg(self.inst, src, dst, fuel, loaded, self.max_stops)
            return leg

    def path_plan(
        self,
        loc: str,
        fuel: int,
        to_visit: Iterable[str],
        targets: tuple[str, ...] | None = None,
    ) -> RouteResult:
        """Cheapest delivery route; raises :class:`NoRoute` when none exists.

        ``targets`` are the allowed end locations for the empty relocation
        leg after the last unload; ``None`` ends the route at the last
        delivery.
        """
        res = self._plan(loc, fuel, frozenset(to_visit), targets)
        if res is None:
            raise NoRoute(f"cannot deliver to {sorted(set(to_visit))} from {loc}")
        return res

    def try_path_plan(
        self, loc: str, fuel: int, to_visit: frozenset[str], targets: tuple[str, ...] | None
    ) -> RouteResult | None:
        return self._plan(loc, fuel, to_visit, targets)

    def _plan(
        self, loc: str, fuel: int, remaining: frozenset[str], targets: tuple[str, ...] | None
    ) -> RouteResult | None:
        if self.tabling:
            key = (loc, fuel, remaining, targets)
            verdict, entry = self.table.consult(key)
            if verdict is Verdict.USE_EXACT:
                return entry.payload
            if verdict is Verdict.FAIL_FAST:
                return None
        res = self._solve(loc, fuel, remaining, targets)
        if self.tabling:
            if res is None:
                self.table.record_failed(key, math.inf)
            else:
                self.table.record_solved(key, res.fuel, res)
        return res

    def _solve(
        self, loc: str, fuel: int, remaining: frozenset[str], targets: tuple[str, ...] | None
    ) -> RouteResult | None:
        self.expansions += 1
        if self.expansions & 1023 == 0:
            self._check_deadline()
        inst = self.inst

        if loc in remaining:
            cap = inst.vessel.fuel_capacity
            if inst.refuels(loc):
                block = (act.dock(loc), act.refuel(loc, cap - fuel), act.unload(loc), act.undock(loc))
                fuel = cap
            else:
                block = (act.dock(loc), act.unload(loc), act.undock(loc))
            rest = self._plan(loc, fuel, remaining - {loc}, targets)
            if rest is None:
                return None
            return RouteResult(rest.final_loc, rest.final_fuel, rest.fuel, block + rest.actions, rest.visits)

        if not remaining:
            if targets is None or loc in targets:
                return RouteResult(loc, fuel, 0, ())
            best = None
            for t in targets:
                leg = self.leg(loc, t, fuel, False)
                if leg is None:
                    continue
                cand = RouteResult(t, leg.fuel_after, leg.fuel_used, leg.actions, leg.stops)
                if best is None or cand.sort_key() < best.sort_key():
                    best = cand
            return best

        best = None
        for nxt in sorted(remaining):
            leg = self.leg(loc, nxt, fuel, True)
            if leg is None:
                continue
            if best is not None and leg.fuel_used > best.fuel:
                continue
            sub = self._plan(nxt, leg.fuel_after, remaining, targets)
            if sub is None:
                continue
            cand = RouteResult(
                sub.final_loc,
                sub.final_fuel,
                leg.fuel_used + sub.fuel,
                leg.actions + sub.actions,
                leg.stops + sub.visits,
            )
            if best is None or cand.sort_key() < best.sort_key():
                best = cand
        return best

    def route_lower_bound(
        self, port: str, dests: Iterable[str], targets: tuple[str, ...] | None = None
    ) -> float:
        """Fuel to deliver ``dests`` from ``port`` in one tour with a full tank.

        Weight limits play no part in routing, so this bounds any trip that
        leaves ``port`` refuelled with exactly these destinations on board.
        With ``targets`` the empty relocation leg is included.  ``inf`` when
        no such tour exists.
        """
        dests = frozenset(dests)
        if not dests:
            return 0
        key = (port, dests, targets)
        if self.tabling and key in self.bound_table:
            return self.bound_table[key]
        res = self._plan(port, self.inst.vessel.fuel_capacity, dests, targets)
        value = math.inf if res is None else res.fuel
        if self.tabling:
            self.bound_table[key] = value
        return value

    def stats(self) -> dict[str, int]:
        s = self.table.stats()
        s["expansions"] = self.expansions
        return s
