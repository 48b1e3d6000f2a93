"""Fuel-minimising delivery planning for a fleet of supply vessels.

Typical use::

    from vesselplan import load_instance, solve, schedule, metrics

    inst = load_instance("instance.json")
    sol = solve(inst)
    sched = schedule(inst, sol.per_vessel_plans)
    print(metrics(inst, sched, sol))
"""
from .errors import Infeasible, NoRoute, PlanningError, SizeGuard, SolveTimeout, Unreachable
from .instance import Instance, InstanceError, dump_instance, load_instance, parse_instance
from .planner import Solution, SolverOptions, solve
from .scheduler import Schedule, metrics, schedule
from .verify import oracle_solve, t1_instance, validate_plan, validate_schedule

__all__ = [
    "Infeasible", "Instance", "InstanceError", "NoRoute", "PlanningError", "Schedule",
    "SizeGuard", "Solution", "SolveTimeout", "SolverOptions", "Unreachable", "dump_instance",
    "load_instance", "metrics", "oracle_solve", "parse_instance", "schedule", "solve",
    "t1_instance", "validate_plan", "validate_schedule",
]
