"""Exceptional primes: q != p carrying a diagonal curve of exponent p with no F_q-point."""

from __future__ import annotations

import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .arith import is_prime, primes_in_progression
from .local import power_class_table

log = logging.getLogger(__name__)


@dataclass
class ExceptionalSet:
    p: int
    bound: int
    primes: list[int]
    witnesses: dict[int, tuple[int, int]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "bound": self.bound,
            "primes": self.primes,
            "witnesses": {str(q): list(w) for q, w in self.witnesses.items()},
        }

    @classmethod
    def from_json(cls, d: dict) -> "ExceptionalSet":
        return cls(
            p=int(d["p"]),
            bound=int(d["bound"]),
            primes=[int(q) for q in d["primes"]],
            witnesses={int(q): (int(w[0]), int(w[1])) for q, w in d["witnesses"].items()},
        )


def weil_bound(p: int) -> int:
    return ((p - 1) * (p - 2)) ** 2


def is_exceptional(q: int, p: int) -> tuple[bool, tuple[int, int] | None]:
    """(verdict, witness) where the witness (i, j) means 1*x^p + g^i y^p + g^j z^p has no F_q-point."""
    if q == p:
        raise ValueError("q must differ from p")
    if (q - 1) % p:
        return False, None
    table = power_class_table(p, q)
    g = table.g
    for i in range(p):
        gi = pow(g, i, q)
        for j in range(p):
            if table.count(1, gi, pow(g, j, q)) == 0:
                return True, (i, j)
    return False, None


def replay_witness(p: int, q: int, witness: tuple[int, int]) -> bool:
    from .local import count_points_fq

    table = power_class_table(p, q)
    i, j = witness
    return count_points_fq(p, q, (1, pow(table.g, i, q), pow(table.g, j, q))) == 0


def _test_one(args):
    q, p = args
    return q, is_exceptional(q, p)


def exceptional_primes(p: int, jobs: int = 1) -> ExceptionalSet:
    """All exceptional primes for p, scanning q = 1 (mod p) below the Weil bound."""
    if p < 3 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    bound = weil_bound(p)
    candidates = [(q, p) for q in primes_in_progression(1, p, 2, bound - 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_test_one, candidates, chunksize=8))
    else:
        results = [_test_one(a) for a in candidates]
    primes = sorted(q for q, (hit, _) in results if hit)
    witnesses = {q: w for q, (hit, w) in results if hit}
    return ExceptionalSet(p, bound, primes, witnesses)


def default_cache_dir() -> Path:
    return Path(os.environ.get("FERMAT_HASSE_CACHE", Path.home() / ".cache" / "fermat_hasse"))


def _atomic_write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    os.replace(tmp, path)


def verify_set(es: ExceptionalSet) -> bool:
    if es.bound != weil_bound(es.p):
        return False
    if sorted(es.primes) != es.primes or set(es.witnesses) != set(es.primes):
        return False
    for q in es.primes:
        if q >= es.bound or (q - 1) % es.p or q == es.p or not is_prime(q):
            return False
        if not replay_witness(es.p, q, es.witnesses[q]):
            return False
    return True


def cached_exceptional_primes(p: int, cache_dir: Path | None = None, refresh: bool = False, jobs: int = 1) -> ExceptionalSet:
    """Load ``exceptional_p<p>.json`` (verifying its witnesses) or regenerate it."""
    path = (cache_dir or default_cache_dir()) / f"exceptional_p{p}.json"
    if path.exists() and not refresh:
        try:
            es = ExceptionalSet.from_json(json.loads(path.read_text()))
            if es.p == p and verify_set(es):
                return es
            log.warning("cache %s failed verification, regenerating", path)
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("unreadable cache %s (%s), regenerating", path, exc)
    es = exceptional_primes(p, jobs=jobs)
    try:
        _atomic_write_json(path, es.to_json())
    except OSError as exc:
        log.warning("could not write cache %s: %s", path, exc)
    return es
