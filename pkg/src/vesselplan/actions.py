"""Primitive vessel actions and their document form."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

NAVIGATE = "navigate"
DOCK = "dock"
UNDOCK = "undock"
LOAD = "load"
UNLOAD = "unload"
REFUEL = "refuel"
ACTION_TYPES = (NAVIGATE, DOCK, UNDOCK, LOAD, UNLOAD, REFUEL)


@dataclass(frozen=True)
class Action:
    type: str
    location: str | None = None
    src: str | None = None
    dst: str | None = None
    # cargo ids once resolved; (dest, weight) pairs while still anonymous
    items: tuple = ()
    fuel_used: int | None = None
    amount: int | None = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"type": self.type}
        if self.type == NAVIGATE:
            doc["from"] = self.src
            doc["to"] = self.dst
            doc["fuel_used"] = self.fuel_used
        else:
            doc["location"] = self.location
        if self.type in (LOAD, UNLOAD):
            doc["items"] = [list(i) if isinstance(i, tuple) else i for i in self.items]
        if self.type == REFUEL:
            doc["amount"] = self.amount
        return doc

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Action":
        kind = doc.get("type")
        if kind not in ACTION_TYPES:
            raise ValueError(f"unknown action type {kind!r}")
        items = tuple(tuple(i) if isinstance(i, list) else i for i in doc.get("items", ()))
        return cls(
            type=kind,
            location=doc.get("location"),
            src=doc.get("from"),
            dst=doc.get("to"),
            items=items,
            fuel_used=doc.get("fuel_used"),
            amount=doc.get("amount"),
        )

    def where(self) -> str | None:
        return self.dst if self.type == NAVIGATE else self.location

    def __str__(self) -> str:
        if self.type == NAVIGATE:
            return f"navigate {self.src}->{self.dst} (fuel {self.fuel_used})"
        extra = ""
        if self.items:
            extra = " " + ",".join(map(str, self.items))
        if self.type == REFUEL:
            extra = f" +{self.amount}"
        return f"{self.type} {self.location}{extra}"


def navigate(src: str, dst: str, fuel_used: int) -> Action:
    return Action(NAVIGATE, src=src, dst=dst, fuel_used=fuel_used)


def dock(loc: str) -> Action:
    return Action(DOCK, location=loc)


def undock(loc: str) -> Action:
    return Action(UNDOCK, location=loc)


def refuel(loc: str, amount: int) -> Action:
    return Action(REFUEL, location=loc, amount=amount)


def load(loc: str, items: tuple = ()) -> Action:
    return Action(LOAD, location=loc, items=items)


def unload(loc: str, items: tuple = ()) -> Action:
    return Action(UNLOAD, location=loc, items=items)
