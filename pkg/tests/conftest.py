"""Shared instance families, cached solves and the acceptance report hook."""
from __future__ import annotations

import functools
import random

import pytest
from hypothesis import settings

from vesselplan.bench import gen_instance
from vesselplan.errors import Infeasible
from vesselplan.instance import PLATFORM, PORT, WAITING, CargoItem, Location, Rates, VesselSpec, make_instance
from vesselplan.planner import Solution, SolverOptions, solve
from vesselplan.verify import oracle_solve

# reproducible property runs: same examples every time, no example database
settings.register_profile("repro", derandomize=True, database=None, deadline=None)
settings.load_profile("repro")

SMALL_SEEDS = range(60)

# every {tabling, bnb, lookahead} combination
ALL_OPTIONS = [
    SolverOptions(tabling=t, bnb=b, lookahead=la)
    for t in (True, False)
    for b in (True, False)
    for la in (True, False)
]


def small_instance(seed: int):
    """<= 6 cargo, <= 3 vessels, <= 8 locations; tight tanks force refuelling."""
    return gen_instance(
        1 + seed % 2,
        3 + (seed % 2 == 0),
        1 + seed % 3,
        3 + seed % 4,
        seed,
        fuel_capacity=(400, 160, 120)[seed % 3],
        weight_capacity=(100, 50)[seed % 2],
    )


@functools.lru_cache(maxsize=None)
def small_oracle(seed: int, final_leg: bool = True) -> int | None:
    try:
        return oracle_solve(small_instance(seed), final_leg)
    except Infeasible:
        return None


@functools.lru_cache(maxsize=None)
def small_solve(seed: int, opts: SolverOptions) -> Solution | None:
    try:
        return solve(small_instance(seed), opts)
    except Infeasible:
        return None


def chain_instance(seed: int, cargo: int):
    """Instance k+1 of a chain is instance k plus one cargo item."""
    return gen_instance(2, 6, 3, cargo, seed)


def permuted(inst, seed: int):
    """Same instance with cargo and vessel declarations shuffled."""
    rng = random.Random(seed)
    cargo = list(inst.cargo)
    vessels = list(inst.vessel.initial)
    rng.shuffle(cargo)
    rng.shuffle(vessels)
    spec = VesselSpec(inst.vessel.weight_capacity, inst.vessel.fuel_capacity, tuple(vessels))
    return make_instance(inst.locations, inst.distances, inst.rates, spec, cargo)


def reference_instance():
    """The fifteen-item, ten-vessel reference manifest on made-up distances."""
    platforms = ["f1", "f2", "f3", "f4", "f5", "f6", "g1", "g2", "g4"]
    locs = [Location("a1", WAITING), Location("a2", WAITING)]
    locs += [Location("p1", PORT, True, 2), Location("p2", PORT, True, 2)]
    locs += [Location(p, PLATFORM, False, 1) for p in platforms]
    rng = random.Random(3)
    ids = [loc.id for loc in locs]
    distances = {(a, b): rng.randint(5, 50) for i, a in enumerate(ids) for b in ids[i + 1:]}
    rates = Rates(1, 2, 1, 2, 2, 2, 5, 1, 10, 5)
    manifest = {
        "p1": [("f1", 20), ("f2", 30), ("f2", 15), ("f3", 10), ("f4", 15), ("f5", 25), ("f6", 5)],
        "p2": [("f1", 40), ("f2", 30), ("f3", 20), ("g1", 20), ("g1", 15), ("g2", 30), ("g2", 20), ("g4", 8)],
    }
    cargo = [CargoItem(port, d, w) for port, items in manifest.items() for d, w in items]
    initial = (("a1", 400),) * 6 + (("a2", 400),) * 4
    return make_instance(locs, distances, rates, VesselSpec(100, 400, initial), cargo)


# -- acceptance report ---------------------------------------------------

_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    _RESULTS[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
