from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import lcm, prod

from ..arith import valuation
from ..field import PureFieldParams, field_data


class BackendFailure(RuntimeError):
    """Raised whenever a backend cannot answer; never converted into a guess."""

    def __init__(self, msg: str = ""):
        super().__init__(f"backend failure: {msg}" if msg else "backend failure")


class Status(str, Enum):
    PRINCIPAL = "Principal"
    NOT_PRINCIPAL = "NotPrincipal"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ClassGroupData:
    field: PureFieldParams
    h: int
    invariants: tuple[int, ...]
    e: int
    r: int
    N: int
    source: str
    provenance: str = ""

    @classmethod
    def from_invariants(cls, fld: PureFieldParams, invariants, source: str, provenance: str = "") -> "ClassGroupData":
        inv = tuple(sorted(int(d) for d in invariants if int(d) != 1))
        if any(d < 1 for d in inv):
            raise ValueError("invariants must be positive")
        for a, b in zip(inv, inv[1:]):
            if b % a:
                raise ValueError(f"invariants {list(inv)} do not form a divisibility chain")
        e = lcm(*inv) if inv else 1
        r = valuation(e, fld.p)
        N = sum(1 for d in inv if valuation(d, fld.p) == r) if r > 0 else 0
        return cls(fld, prod(inv), inv, e, r, N, source, provenance)

    def check(self) -> None:
        """Recompute the derived fields and fail loudly on any mismatch."""
        fresh = ClassGroupData.from_invariants(self.field, self.invariants, self.source, self.provenance)
        if (fresh.h, fresh.e, fresh.r, fresh.N, fresh.invariants) != (self.h, self.e, self.r, self.N, self.invariants):
            raise ValueError("inconsistent class group data")
        if self.h % self.field.p == 0 and self.N < 1:
            raise ValueError("p | h but N = 0")

    def to_json(self) -> dict:
        return {
            "p": self.field.p,
            "c": self.field.c,
            "h": self.h,
            "invariants": list(self.invariants),
            "e": self.e,
            "r": self.r,
            "N": self.N,
            "source": self.source,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ClassGroupData":
        fld = field_data(int(d["p"]), int(d["c"]))
        obj = cls(fld, int(d["h"]), tuple(int(x) for x in d["invariants"]), int(d["e"]), int(d["r"]), int(d["N"]),
                  d.get("source", "unknown"), d.get("provenance", ""))
        obj.check()
        return obj


def _coord_to_json(x):
    return str(x) if isinstance(x, Fraction) and x.denominator != 1 else str(int(x))


def _coord_from_json(s):
    f = Fraction(s)
    return int(f) if f.denominator == 1 else f


@dataclass
class PrincipalityVerdict:
    status: Status
    generator: list | None = None  # power-basis coordinates
    class_order: int | None = None
    search_bound: float | None = None
    note: str = ""
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.status = Status(self.status)
        if self.status is Status.PRINCIPAL and self.generator is None:
            raise ValueError("Principal verdict requires a generator")
        if self.status is Status.NOT_PRINCIPAL and (self.class_order is None or self.class_order <= 1):
            raise ValueError("NotPrincipal verdict requires a class order > 1")

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "generator": None if self.generator is None else [_coord_to_json(x) for x in self.generator],
            "class_order": self.class_order,
            "search_bound": self.search_bound,
            "note": self.note,
        }

    @classmethod
    def from_json(cls, d: dict) -> "PrincipalityVerdict":
        gen = d.get("generator")
        return cls(
            Status(d["status"]),
            None if gen is None else [_coord_from_json(x) for x in gen],
            d.get("class_order"),
            d.get("search_bound"),
            d.get("note", ""),
        )
