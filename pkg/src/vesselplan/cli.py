"""Command-line entry point: solve, schedule, validate, oracle, gen, bench."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any, Sequence

from . import actions as act
from .bench import ABLATION_MATRIX, gen_instance, rows_to_csv, run_bench
from .errors import Infeasible, SizeGuard, SolveTimeout
from .instance import InstanceError, dump_instance, load_instance
from .planner import SolverOptions, solve
from .scheduler import Schedule, metrics, schedule
from .verify import oracle_solve, validate_plan, validate_schedule

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3

logger = logging.getLogger("vesselplan")


class UsageError(Exception):
    pass


def _env_timeout() -> int | None:
    raw = os.environ.get("PLANNER_TIMEOUT_MS")
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PLANNER_TIMEOUT_MS must be an integer, got {raw!r}") from None


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _dump(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def plans_from_doc(doc: Any) -> dict[str, list[act.Action]]:
    """Per-vessel action lists from a plan document."""
    try:
        return {
            v["id"]: [act.Action.from_dict(a) for a in v["actions"]]
            for v in doc["vessels"]
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"not a plan document: {exc}") from exc


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    opts = SolverOptions(
        tabling=not args.no_tabling,
        bnb=not args.no_bnb,
        lookahead=not args.no_lookahead,
        final_leg=args.final_leg == "on",
        initial_bound=float("inf") if args.bound is None else args.bound,
        timeout_ms=_env_timeout(),
    )
    sol = solve(inst, opts)
    doc = sol.to_dict(include_stats=args.stats)
    used = sum(1 for plan in sol.per_vessel_plans.values() if plan)
    print(f"fuel {sol.fuel}  trips {len(sol.trips)}  vessels used {used}")
    if args.stats:
        for key, value in sol.stats.items():
            if not isinstance(value, dict):
                print(f"  {key}: {value}")
    if args.out:
        _write(args.out, _dump(doc))
    else:
        print(_dump(doc), end="")
    return EXIT_OK


def _cmd_schedule(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    plans = plans_from_doc(_read_json(args.plan))
    sched = schedule(inst, plans)
    doc = sched.to_dict()
    doc["metrics"] = metrics(inst, sched)
    m = doc["metrics"]
    print(
        f"fuel {m['fuel']}  makespan {m['makespan']}  docking cost {m['docking_cost']}  "
        f"vessels used {m['vessels_used']}  actions {m['num_actions']}"
    )
    if args.gantt:
        _write(args.gantt, sched.gantt_csv())
    if args.out:
        _write(args.out, _dump(doc))
    else:
        print(_dump(doc), end="")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    doc = _read_json(args.document)
    final_leg = args.final_leg == "on"
    if isinstance(doc, dict) and "schedule" in doc:
        try:
            sched = Schedule.from_dict(doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"not a schedule document: {exc}") from exc
        found = validate_schedule(inst, sched, final_leg)
    else:
        found = validate_plan(inst, plans_from_doc(doc), final_leg)
    for v in found:
        print(v)
    if found:
        print(f"{len(found)} violation(s)")
        return EXIT_FAIL
    print("ok")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    print(f"fuel {oracle_solve(inst, args.final_leg == 'on')}")
    return EXIT_OK


def _cmd_gen(args: argparse.Namespace) -> int:
    inst = gen_instance(args.ports, args.platforms, args.vessels, args.cargo, args.seed)
    _write(args.out, _dump(dump_instance(inst)))
    print(f"wrote {args.out}: {len(inst.locations)} locations, {len(inst.cargo)} cargo items")
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.cargo_min < 0 or args.cargo_max < args.cargo_min:
        raise UsageError("need 0 <= cargo-min <= cargo-max")
    timeout = args.timeout_ms if args.timeout_ms is not None else _env_timeout()
    rows = run_bench(
        args.group,
        range(args.cargo_min, args.cargo_max + 1),
        range(1, args.seeds + 1),
        ABLATION_MATRIX,
        timeout,
        args.jobs,
    )
    text = rows_to_csv(rows)
    if args.out:
        _write(args.out, text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vesselplan", description="Fuel-optimal vessel delivery planning.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find a minimum-fuel plan")
    p.add_argument("instance")
    p.add_argument("--no-tabling", action="store_true")
    p.add_argument("--no-bnb", action="store_true")
    p.add_argument("--no-lookahead", action="store_true")
    p.add_argument("--final-leg", choices=("on", "off"), default="on")
    p.add_argument("--bound", type=int, help="only accept plans cheaper than this")
    p.add_argument("--out", help="write the plan document here")
    p.add_argument("--stats", action="store_true", help="include search counters")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("schedule", help="time a plan")
    p.add_argument("instance")
    p.add_argument("plan")
    p.add_argument("--out")
    p.add_argument("--gantt", help="write a vessel,action,start,end CSV here")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("validate", help="check a plan or schedule document")
    p.add_argument("instance")
    p.add_argument("document")
    p.add_argument("--final-leg", choices=("on", "off"), default="on")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("oracle", help="brute-force minimum fuel for small instances")
    p.add_argument("instance")
    p.add_argument("--final-leg", choices=("on", "off"), default="on")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("gen", help="write a seeded random instance")
    p.add_argument("--ports", type=int, required=True)
    p.add_argument("--platforms", type=int, required=True)
    p.add_argument("--vessels", type=int, required=True)
    p.add_argument("--cargo", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="run the ablation benchmark")
    p.add_argument("--group", choices=("A", "B"), required=True)
    p.add_argument("--cargo-min", type=int, default=1)
    p.add_argument("--cargo-max", type=int, default=15)
    p.add_argument("--seeds", type=int, default=1, help="seeds 1..k")
    p.add_argument("--timeout-ms", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)
    return parser


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, InstanceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (SolveTimeout, SizeGuard) as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
