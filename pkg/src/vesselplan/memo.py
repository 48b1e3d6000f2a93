"""Min-cost answer tables that stay sound under a branch-and-bound budget.

An entry is either ``Exact(cost, payload)`` - the optimum of the subproblem -
or ``Failed(budget)`` - a proof that no completion cheaper than ``budget``
exists.  The second kind appears because a bounded search that fails below
its budget has still learned something reusable: any later query with an
equal or smaller budget can fail at once.

A failed bounded search only ever pruned branches whose admissible estimate
reached the incumbent, so a completion under the entry budget would have
survived pruning and been found.  That is what makes ``Failed(budget)``
safe to store.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Hashable


class MemoError(RuntimeError):
    """Two different optima recorded for one key: the search is not deterministic."""


@dataclass(frozen=True)
class Exact:
    cost: int
    payload: Any = None


@dataclass(frozen=True)
class Failed:
    budget: float


class Verdict(enum.Enum):
    USE_EXACT = "use_exact"
    FAIL_FAST = "fail_fast"
    MUST_SOLVE = "must_solve"


class MemoTable:
    def __init__(self) -> None:
        self.entries: dict[Hashable, Exact | Failed] = {}
        self.hits = 0
        self.misses = 0
        self.peak_size = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: Hashable) -> bool:
        return key in self.entries

    def get(self, key: Hashable) -> Exact | Failed | None:
        return self.entries.get(key)

    @property
    def consults(self) -> int:
        return self.hits + self.misses

    @property
    def failed_entries(self) -> int:
        return sum(isinstance(e, Failed) for e in self.entries.values())

    def consult(self, key: Hashable, budget: float = math.inf) -> tuple[Verdict, Exact | None]:
        entry = self.entries.get(key)
        if isinstance(entry, Exact):
            self.hits += 1
            if entry.cost < budget:
                return Verdict.USE_EXACT, entry
            return Verdict.FAIL_FAST, None
        if isinstance(entry, Failed) and budget <= entry.budget:
            self.hits += 1
            return Verdict.FAIL_FAST, None
        self.misses += 1
        return Verdict.MUST_SOLVE, None

    def record_solved(self, key: Hashable, cost: int, payload: Any = None) -> None:
        entry = self.entries.get(key)
        if isinstance(entry, Exact):
            if entry.cost != cost:
                raise MemoError(f"conflicting optima {entry.cost} and {cost} for one key")
            return
        self.entries[key] = Exact(cost, payload)
        self.peak_size = max(self.peak_size, len(self.entries))

    def record_failed(self, key: Hashable, budget: float) -> None:
        entry = self.entries.get(key)
        if isinstance(entry, Exact):
            return
        if isinstance(entry, Failed) and entry.budget >= budget:
            return
        self.entries[key] = Failed(budget)
        self.peak_size = max(self.peak_size, len(self.entries))

    def stats(self) -> dict[str, int]:
        return {
            "entries": len(self.entries),
            "hits": self.hits,
            "misses": self.misses,
            "failed_entries": self.failed_entries,
            "peak_size": self.peak_size,
        }
