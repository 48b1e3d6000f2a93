"""Greedy earliest-start scheduling of per-vessel action lists.

Fuel is fixed by the plan; scheduling only decides when each action starts.
Vessels run independently except for dock slots, which are granted
first-come-first-served (ties by vessel order) for a whole docking block:
dock, then refuelling alongside the sequential loads/unloads, then undock.
A vessel that finds no free slot waits before docking.
"""
from __future__ import annotations

import csv
import heapq
import io
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import actions as act
from .instance import Instance


@dataclass(frozen=True)
class TimedAction:
    vessel: str
    action: act.Action
    start: int
    end: int

    def to_dict(self) -> dict[str, Any]:
        return {"vessel": self.vessel, "action": self.action.to_dict(), "start": self.start, "end": self.end}

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "TimedAction":
        return cls(doc["vessel"], act.Action.from_dict(doc["action"]), int(doc["start"]), int(doc["end"]))


@dataclass
class Schedule:
    actions: list[TimedAction] = field(default_factory=list)
    makespan: int = 0
    docking_cost: int = 0
    # location -> [(dock start, undock end, vessel)]
    occupancy: dict[str, list[tuple[int, int, str]]] = field(default_factory=dict)

    @property
    def fuel(self) -> int:
        return sum(t.action.fuel_used or 0 for t in self.actions if t.action.type == act.NAVIGATE)

    def for_vessel(self, vid: str) -> list[TimedAction]:
        return [t for t in self.actions if t.vessel == vid]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schedule": [t.to_dict() for t in self.actions],
            "makespan": self.makespan,
            "docking_cost": self.docking_cost,
            "fuel": self.fuel,
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "Schedule":
        timed = [TimedAction.from_dict(d) for d in doc["schedule"]]
        occupancy: dict[str, list[tuple[int, int, str]]] = {}
        for vid in dict.fromkeys(t.vessel for t in timed):
            start = None
            for t in timed:
                if t.vessel != vid:
                    continue
                if t.action.type == act.DOCK:
                    start = t.start
                elif t.action.type == act.UNDOCK and start is not None:
                    occupancy.setdefault(t.action.location, []).append((start, t.end, vid))
                    start = None
        for spans in occupancy.values():
            spans.sort()
        return cls(timed, int(doc.get("makespan", 0)), int(doc.get("docking_cost", 0)), occupancy)

    def gantt_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(("vessel", "action", "start", "end"))
        for t in self.actions:
            out.writerow((t.vessel, str(t.action), t.start, t.end))
        return buf.getvalue()


def action_duration(inst: Instance, a: act.Action, loaded: bool = False) -> int:
    """Duration of one action; ``loaded`` matters for navigation only."""
    rates = inst.rates
    if a.type == act.NAVIGATE:
        return inst.leg_time(a.src, a.dst, loaded)
    if a.type == act.DOCK:
        return rates.dock_time
    if a.type == act.UNDOCK:
        return rates.undock_time
    if a.type == act.REFUEL:
        return rates.refuel_time
    return rates.handling_time_per_weight * _items_weight(inst, a.items)


def _items_weight(inst: Instance, items: Sequence) -> int:
    total = 0
    for item in items:
        if isinstance(item, str):
            total += inst.cargo_by_id[item].weight
        else:
            total += item[-1]
    return total


def _block_times(inst: Instance, block: Sequence[act.Action], start: int) -> list[tuple[int, int]]:
    """Times for dock, inner actions, undock; refuel runs beside the handling."""
    t = start + action_duration(inst, block[0])
    times = [(start, t)]
    handling_end = t
    refuel_end = t
    for a in block[1:-1]:
        d = action_duration(inst, a)
        if a.type == act.REFUEL:
            times.append((t, t + d))
            refuel_end = max(refuel_end, t + d)
        else:
            times.append((handling_end, handling_end + d))
            handling_end += d
    undock_start = max(handling_end, refuel_end)
    times.append((undock_start, undock_start + action_duration(inst, block[-1])))
    return times


def _earliest_slot(spans: list[tuple[int, int, str]], ready: int, length: int, capacity: int) -> int:
    """Earliest start >= ready at which [start, start+length) stays under capacity."""
    candidates = sorted({ready} | {end for _, end, _ in spans if end > ready})
    for s in candidates:
        e = s + length
        overlapping = [(a, b) for a, b, _ in spans if a < e and s < b]
        points = [s] + [a for a, _ in overlapping if a > s]
        if all(sum(1 for a, b in overlapping if a <= p < b) < capacity for p in points):
            return s
    raise AssertionError("unreachable: the last candidate is after every span")


def loaded_flags(plan: Sequence[act.Action]) -> list[bool]:
    """Whether the vessel carries cargo during each action of ``plan``."""
    aboard = 0
    flags = []
    for a in plan:
        if a.type == act.LOAD:
            aboard += len(a.items)
        elif a.type == act.UNLOAD:
            aboard -= len(a.items)
        flags.append(aboard > 0)
    return flags


def _blocks(plan: Sequence[act.Action]) -> list[tuple[list[act.Action], bool]]:
    """Split a plan into single navigations and dock..undock blocks."""
    flags = loaded_flags(plan)
    out: list[tuple[list[act.Action], bool]] = []
    i = 0
    while i < len(plan):
        a = plan[i]
        if a.type == act.DOCK:
            j = i + 1
            while j < len(plan) and plan[j].type != act.UNDOCK:
                j += 1
            out.append((list(plan[i:j + 1]), False))
            i = j + 1
        else:
            out.append(([a], flags[i]))
            i += 1
    return out


def schedule(inst: Instance, plans: Mapping[str, Sequence[act.Action]]) -> Schedule:
    """Greedy earliest-start schedule; dock slots are first-come-first-served."""
    order = {vid: i for i, vid in enumerate(inst.vessel_ids)}
    blocks = {vid: _blocks(plan) for vid, plan in plans.items()}
    pos = {vid: 0 for vid in plans}
    timed: dict[str, list[TimedAction]] = {vid: [] for vid in plans}
    occupancy: dict[str, list[tuple[int, int, str]]] = {}
    cost = 0
    heap = [(0, order.get(vid, len(order)), vid) for vid, b in blocks.items() if b]
    heapq.heapify(heap)
    while heap:
        ready, rank, vid = heapq.heappop(heap)
        block, loaded = blocks[vid][pos[vid]]
        pos[vid] += 1
        if block[0].type == act.DOCK:
            loc = block[0].location
            length = _block_times(inst, block, 0)[-1][1]
            cap = inst.by_id[loc].dock_capacity
            spans = occupancy.setdefault(loc, [])
            start = ready if cap is None else _earliest_slot(spans, ready, length, cap)
            times = _block_times(inst, block, start)
            spans.append((start, start + length, vid))
            spans.sort()
            cost += length * inst.rates.docking_cost_rate(inst.kind(loc))
        else:
            times = [(ready, ready + action_duration(inst, block[0], loaded))]
        for a, (s, e) in zip(block, times):
            timed[vid].append(TimedAction(vid, a, s, e))
        if pos[vid] < len(blocks[vid]):
            heapq.heappush(heap, (times[-1][1], rank, vid))
    flat = [t for vid in plans for t in timed[vid]]
    makespan = max((t.end for t in flat), default=0)
    return Schedule(flat, makespan, cost, occupancy)


def metrics(inst: Instance, sched: Schedule, solution: Any = None) -> dict[str, int]:
    """Summary figures; fuel comes from the solution when given, else the schedule."""
    fuel = solution.fuel if solution is not None else sched.fuel
    return {
        "fuel": fuel,
        "vessels_used": len({t.vessel for t in sched.actions}),
        "makespan": sched.makespan,
        "docking_cost": sched.docking_cost,
        "num_actions": len(sched.actions),
    }
