"""Seeded instance generator and ablation benchmark harness."""
from __future__ import annotations

import csv
import io
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import Infeasible, SolveTimeout
from .instance import (
    CargoItem,
    Instance,
    Location,
    PLATFORM,
    PORT,
    Rates,
    VesselSpec,
    WAITING,
    make_instance,
)
from .planner import SolverOptions, solve
from .scheduler import metrics, schedule

# the fifteen cargo weights of the reference scenario, in manifest order
REFERENCE_WEIGHTS = (20, 30, 15, 10, 15, 25, 5, 40, 30, 20, 20, 15, 30, 20, 8)

GROUP_VESSELS = {"A": 3, "B": 10}
GROUP_PORTS = 2
GROUP_PLATFORMS = 10

CSV_HEADER = (
    "group", "cargo", "seed", "tabling", "bnb", "lookahead", "fuel", "vessels_used",
    "makespan", "docking_cost", "runtime_ms", "expansions", "memo_hits", "prunes", "timeout",
)

# tabling, bnb, lookahead: the four configurations of the ablation study
ABLATION_MATRIX = (
    (False, True, True),
    (True, False, False),
    (True, True, False),
    (True, True, True),
)

DEFAULT_RATES = Rates(
    fuel_per_dist_empty=1,
    fuel_per_dist_loaded=2,
    time_per_dist_empty=1,
    time_per_dist_loaded=2,
    dock_time=2,
    undock_time=2,
    refuel_time=5,
    handling_time_per_weight=1,
    docking_cost_rate_port=10,
    docking_cost_rate_platform=5,
)


def gen_instance(
    ports: int,
    platforms: int,
    vessels: int,
    cargo: int,
    seed: int,
    *,
    weight_capacity: int = 100,
    fuel_capacity: int = 400,
    initial_fuel: int | Sequence[int] | None = None,
    refuel_probability: float = 0.3,
    rates: Rates = DEFAULT_RATES,
) -> Instance:
    """Random instance with two waiting areas and planar integer distances.

    Locations are points in a 40x40 square; distances are rounded Euclidean
    distances clipped to [5, 50].  All ports refuel, platforms do so with
    ``refuel_probability``.  Cargo weights cycle through the reference
    manifest weights; origins and destinations are drawn from the seed.
    """
    if ports < 1 or platforms < 1 or vessels < 1 or cargo < 0:
        raise ValueError("need at least one port, platform and vessel, and cargo >= 0")
    rng = random.Random(seed)
    locs = [Location("a1", WAITING), Location("a2", WAITING)]
    locs += [Location(f"p{i + 1}", PORT, True, 2) for i in range(ports)]
    locs += [
        Location(f"f{i + 1}", PLATFORM, rng.random() < refuel_probability, 1)
        for i in range(platforms)
    ]
    points = {loc.id: (rng.uniform(0, 40), rng.uniform(0, 40)) for loc in locs}
    distances = {}
    for i, a in enumerate(locs):
        for b in locs[i + 1:]:
            d = math.dist(points[a.id], points[b.id])
            distances[(a.id, b.id)] = min(50, max(5, round(d)))

    port_ids = [loc.id for loc in locs if loc.kind == PORT]
    platform_ids = [loc.id for loc in locs if loc.kind == PLATFORM]
    items = []
    for k in range(cargo):
        weight = min(REFERENCE_WEIGHTS[k % len(REFERENCE_WEIGHTS)], weight_capacity)
        items.append(CargoItem(rng.choice(port_ids), rng.choice(platform_ids), weight))

    if initial_fuel is None:
        fuels = [fuel_capacity] * vessels
    elif isinstance(initial_fuel, int):
        fuels = [initial_fuel] * vessels
    else:
        fuels = list(initial_fuel)
    at_a1 = math.ceil(vessels * 0.6)
    initial = tuple(("a1" if v < at_a1 else "a2", fuels[v]) for v in range(vessels))
    return make_instance(
        locs, distances, rates, VesselSpec(weight_capacity, fuel_capacity, initial), items
    )


def group_instance(group: str, cargo: int, seed: int) -> Instance:
    return gen_instance(GROUP_PORTS, GROUP_PLATFORMS, GROUP_VESSELS[group], cargo, seed)


@dataclass(frozen=True)
class BenchRun:
    group: str
    cargo: int
    seed: int
    tabling: bool
    bnb: bool
    lookahead: bool
    timeout_ms: int | None


def run_one(run: BenchRun) -> dict:
    inst = group_instance(run.group, run.cargo, run.seed)
    opts = SolverOptions(
        tabling=run.tabling, bnb=run.bnb, lookahead=run.lookahead, timeout_ms=run.timeout_ms
    )
    row = {
        "group": run.group, "cargo": run.cargo, "seed": run.seed,
        "tabling": int(run.tabling), "bnb": int(run.bnb), "lookahead": int(run.lookahead),
        "fuel": "", "vessels_used": "", "makespan": "", "docking_cost": "",
        "runtime_ms": "", "expansions": "", "memo_hits": "", "prunes": "", "timeout": 0,
    }
    start = time.perf_counter()
    try:
        sol = solve(inst, opts)
    except SolveTimeout:
        row["timeout"] = 1
        row["runtime_ms"] = round((time.perf_counter() - start) * 1000, 1)
        return row
    except Infeasible:
        row["fuel"] = "infeasible"
        row["runtime_ms"] = round((time.perf_counter() - start) * 1000, 1)
        return row
    elapsed = round((time.perf_counter() - start) * 1000, 1)
    m = metrics(inst, schedule(inst, sol.per_vessel_plans), sol)
    row.update(
        fuel=m["fuel"], vessels_used=m["vessels_used"], makespan=m["makespan"],
        docking_cost=m["docking_cost"], runtime_ms=elapsed,
        expansions=sol.stats["expansions"] + sol.stats["route_expansions"],
        memo_hits=sol.stats["memo_hits"], prunes=sol.stats["prunes"],
    )
    return row


def run_bench(
    group: str,
    cargo_range: Iterable[int],
    seeds: Iterable[int],
    options_matrix: Sequence[tuple[bool, bool, bool]] = ABLATION_MATRIX,
    timeout_ms: int | None = 60_000,
    jobs: int = 1,
) -> list[dict]:
    """One row per (cargo count, seed, option set); timeouts are recorded, not raised."""
    if group not in GROUP_VESSELS:
        raise ValueError(f"unknown group {group!r}")
    runs = [
        BenchRun(group, n, seed, t, b, la, timeout_ms)
        for n in cargo_range
        for seed in seeds
        for t, b, la in options_matrix
    ]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(run_one, runs))
    return [run_one(r) for r in runs]


def rows_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
