"""Instance generator and ablation harness."""
from __future__ import annotations

import csv
import io

import pytest

from vesselplan.bench import ABLATION_MATRIX, BenchRun, gen_instance, group_instance, rows_to_csv, run_bench, run_one
from vesselplan.instance import PLATFORM, PORT, WAITING

from conftest import reference_instance

HEADER = (
    "group,cargo,seed,tabling,bnb,lookahead,fuel,vessels_used,makespan,"
    "docking_cost,runtime_ms,expansions,memo_hits,prunes,timeout"
)


def test_generator_deterministic():
    assert gen_instance(2, 10, 10, 15, 1) == gen_instance(2, 10, 10, 15, 1)
    assert gen_instance(2, 10, 10, 15, 1) != gen_instance(2, 10, 10, 15, 2)


def test_generator_shape():
    inst = gen_instance(2, 10, 3, 1, 7)
    assert len(inst.cargo) == 1 and len(inst.vessel.initial) == 3
    kinds = [loc.kind for loc in inst.locations]
    assert kinds.count(WAITING) == 2 and kinds.count(PORT) == 2 and kinds.count(PLATFORM) == 10
    assert all(5 <= d <= 50 for d in inst.distances.values())
    assert all(loc.refuel for loc in inst.locations if loc.kind == PORT)
    assert group_instance("A", 4, 3).vessel.initial == gen_instance(2, 10, 3, 4, 3).vessel.initial


def test_generator_weights_follow_reference_manifest():
    weights = sorted(c.weight for c in gen_instance(2, 10, 10, 15, 1).cargo)
    assert weights == sorted(c.weight for c in reference_instance().cargo)


def test_generator_rejects_bad_counts():
    with pytest.raises(ValueError):
        gen_instance(0, 3, 1, 1, 0)
    with pytest.raises(ValueError):
        gen_instance(1, 3, 0, 1, 0)


def test_ablation_cardinality():
    rows = run_bench("A", range(1, 13), [1], ABLATION_MATRIX, timeout_ms=100)
    assert len(rows) == 48
    assert {(r["tabling"], r["bnb"], r["lookahead"]) for r in rows} == {
        tuple(int(f) for f in cfg) for cfg in ABLATION_MATRIX
    }


def test_fuel_identical_across_terminating_options():
    rows = run_bench("B", range(1, 7), [1, 2], timeout_ms=30_000)
    by_case: dict[tuple, set] = {}
    for r in rows:
        if not r["timeout"]:
            by_case.setdefault((r["cargo"], r["seed"]), set()).add(r["fuel"])
    assert by_case and all(len(f) == 1 for f in by_case.values())
    # more cargo never costs less fuel on one seed
    for seed in (1, 2):
        fuels = [by_case[(n, seed)].pop() for n in range(1, 7)]
        assert fuels == sorted(fuels)


def test_csv_header_and_determinism():
    a = rows_to_csv(run_bench("A", range(1, 5), [3], timeout_ms=30_000))
    b = rows_to_csv(run_bench("A", range(1, 5), [3], timeout_ms=30_000))
    assert a.splitlines()[0] == HEADER
    strip = lambda text: [
        {k: v for k, v in row.items() if k != "runtime_ms"} for row in csv.DictReader(io.StringIO(text))
    ]
    assert strip(a) == strip(b)


def test_timeout_recorded_not_raised():
    row = run_one(BenchRun("B", 12, 1, False, True, True, 1))
    assert row["timeout"] == 1 and row["fuel"] == ""


def test_parallel_matches_serial():
    serial = run_bench("A", range(2, 4), [1], timeout_ms=30_000)
    parallel = run_bench("A", range(2, 4), [1], timeout_ms=30_000, jobs=2)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "runtime_ms"} for r in rows]
    assert strip(serial) == strip(parallel)


def test_tabling_faster_from_eight_cargo():
    for cargo in (8, 9):
        full = run_one(BenchRun("B", cargo, 1, True, True, True, 60_000))
        bare = run_one(BenchRun("B", cargo, 1, False, True, True, 60_000))
        assert full["timeout"] == 0
        assert bare["timeout"] == 1 or full["runtime_ms"] < bare["runtime_ms"]
        assert bare["timeout"] == 1 or full["expansions"] < bare["expansions"]


def test_unknown_group():
    with pytest.raises(ValueError):
        run_bench("C", [1], [1])
