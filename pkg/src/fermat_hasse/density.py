"""Exact densities of the locally unobstructed primes, and Chebotarev scans."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod

from .arith import euler_phi, prime_divisors, primes_up_to
from .classgroup.types import ClassGroupData
from .exceptional import ExceptionalSet
from .field import PureFieldParams, factor_shape, index_divisor
from .local import solvable_classes


class ConditionError(ValueError):
    """A hypothesis of the criterion fails; ``condition`` names it."""

    def __init__(self, condition: str, detail: str):
        super().__init__(f"condition {condition} fails: {detail}")
        self.condition = condition


def check_conditions(fld: PureFieldParams, cd: ClassGroupData) -> None:
    if not fld.wieferich_ok:
        raise ConditionError("wieferich_ok", f"c^(p-1) = 1 mod p^2 for p={fld.p}, c={fld.c}")
    if cd.h % fld.p:
        raise ConditionError("p_divides_h", f"p={fld.p} does not divide h={cd.h}")


@dataclass(frozen=True)
class LocalFactor:
    q: int
    modulus: int
    classes: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.classes)

    def to_json(self) -> dict:
        return {"q": self.q, "modulus": self.modulus, "N_q": self.count, "classes": list(self.classes)}

    @classmethod
    def from_json(cls, d: dict) -> "LocalFactor":
        lf = cls(int(d["q"]), int(d["modulus"]), tuple(int(t) for t in d["classes"]))
        if int(d["N_q"]) != lf.count:
            raise ValueError(f"N_q mismatch at q={lf.q}")
        return lf


@dataclass(frozen=True)
class DensityCertificate:
    p: int
    c: int
    modulus: int
    per_q: tuple[LocalFactor, ...]
    admissible_count: int
    d: Fraction
    threshold: Fraction
    passes: bool
    # primes q | c allowing every unit class; they are left out of M
    unrestricted: tuple[int, ...] = field(default=())

    def check(self) -> None:
        """Recompute the arithmetic identities tying the fields together."""
        if self.modulus != prod(f.modulus for f in self.per_q):
            raise ValueError("modulus is not the product of the local moduli")
        if self.admissible_count != prod(f.count for f in self.per_q):
            raise ValueError("admissible_count is not the product of the N_q")
        if self.d != Fraction(self.admissible_count, euler_phi(self.modulus)):
            raise ValueError("d != admissible_count / phi(M)")
        if self.passes != (self.d > self.threshold):
            raise ValueError("passes flag disagrees with d > threshold")
        for f in self.per_q:
            for t in f.classes:
                if gcd(t, f.modulus) != 1 or not 0 < t < f.modulus:
                    raise ValueError(f"class {t} mod {f.modulus} is not a unit residue")
                if f.q == self.p and t % self.p == 1:
                    raise ValueError(f"class {t} mod {f.modulus} is 1 mod p")

    def admits(self, ell: int) -> bool:
        return all(ell % f.modulus in f.classes for f in self.per_q)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "c": self.c,
            "modulus": self.modulus,
            "per_q": [f.to_json() for f in self.per_q],
            "unrestricted": list(self.unrestricted),
            "admissible_count": self.admissible_count,
            "phi_modulus": euler_phi(self.modulus),
            "d": str(self.d),
            "threshold": str(self.threshold),
            "passes": self.passes,
        }

    @classmethod
    def from_json(cls, d: dict) -> "DensityCertificate":
        cert = cls(
            int(d["p"]), int(d["c"]), int(d["modulus"]),
            tuple(LocalFactor.from_json(x) for x in d["per_q"]),
            int(d["admissible_count"]), Fraction(d["d"]), Fraction(d["threshold"]), bool(d["passes"]),
            tuple(int(q) for q in d.get("unrestricted", [])),
        )
        cert.check()
        return cert


def relevant_primes(p: int, c: int, exceptionals: ExceptionalSet) -> list[int]:
    out = [p]
    out += [q for q in prime_divisors(c) if q != p]
    out += [q for q in exceptionals.primes if q not in out]
    return out


def local_factor(p: int, c: int, q: int) -> LocalFactor:
    cls = solvable_classes(p, c, q)
    modulus = p * p if q == p else q
    return LocalFactor(q, modulus, tuple(sorted(r.value for r in cls)))


def density_certificate(fld: PureFieldParams, cd: ClassGroupData, exceptionals: ExceptionalSet) -> DensityCertificate:
    p, c = fld.p, fld.c
    if exceptionals.p != p:
        raise ValueError(f"exceptional set is for p={exceptionals.p}, not {p}")
    if cd.field.key != fld.key:
        raise ValueError("class data belongs to a different field")
    check_conditions(fld, cd)
    factors, free = [], []
    for q in relevant_primes(p, c, exceptionals):
        lf = local_factor(p, c, q)
        # a prime of c imposing nothing drops out of M; exceptional primes always stay
        if q != p and c % q == 0 and lf.count == euler_phi(lf.modulus):
            free.append(q)
            continue
        factors.append(lf)
    M = prod(f.modulus for f in factors)
    count = prod(f.count for f in factors)
    d = Fraction(count, euler_phi(M))
    threshold = Fraction(1, p**cd.N)
    cert = DensityCertificate(p, c, M, tuple(factors), count, d, threshold, d > threshold, tuple(free))
    cert.check()
    return cert


def replay_certificate(cert: DensityCertificate) -> bool:
    """Recompute every class list from the local solver and compare."""
    try:
        cert.check()
    except ValueError:
        return False
    return all(local_factor(cert.p, cert.c, f.q) == f for f in cert.per_q) and all(
        local_factor(cert.p, cert.c, q).count == euler_phi(q) for q in cert.unrestricted
    )


@dataclass(frozen=True)
class ChebotarevReport:
    p: int
    c: int
    X: int
    total: int
    split: int
    inert: int

    @property
    def split_fraction(self) -> Fraction:
        return Fraction(self.split, self.total)

    @property
    def inert_fraction(self) -> Fraction:
        return Fraction(self.inert, self.total)

    @property
    def expected(self) -> tuple[Fraction, Fraction]:
        return Fraction(1, self.p * (self.p - 1)), Fraction(1, self.p)

    def to_json(self) -> dict:
        return {
            "p": self.p, "c": self.c, "X": self.X, "total": self.total,
            "split_fraction": str(self.split_fraction),
            "inert_fraction": str(self.inert_fraction),
            "expected": [str(x) for x in self.expected],
        }


def empirical_chebotarev(fld: PureFieldParams, X: int) -> ChebotarevReport:
    """Count split and inert primes ell <= X with ell coprime to p*c*f."""
    if X < 1000:
        raise ValueError("X must be at least 1000")
    p, c = fld.p, fld.c
    total = split = inert = 0
    for ell in primes_up_to(X):
        if (p * c) % ell == 0 or index_divisor(ell, fld):
            continue
        shape = factor_shape(ell, fld)
        total += 1
        if shape == [(1, 1)] * p:
            split += 1
        elif shape == [(p, 1)]:
            inert += 1
    return ChebotarevReport(p, c, X, total, split, inert)
