from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..arith import primes_up_to
from ..field import (
    FieldError,
    Ideal,
    PureFieldParams,
    elt_norm,
    ideal_pow,
    index_divisor,
    prime_above_deg1,
)
from .types import BackendFailure, ClassGroupData, PrincipalityVerdict, Status

log = logging.getLogger(__name__)

KINDS = ("declared", "oracle", "builtin")


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "declared"
    declared_path: str | None = None
    oracle_cmd: str | None = None
    oracle_pool: int = 1
    cache_dir: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown backend {self.kind!r}; expected one of {KINDS}")
        if self.kind == "oracle" and not self.oracle_cmd:
            raise ValueError("oracle backend needs an oracle command")

    def client(self):
        from .oracle import get_client

        if not self.oracle_cmd:
            raise BackendFailure("no oracle command configured")
        return get_client(self.oracle_cmd, self.oracle_pool, self.cache_dir)


# ------------------------------------------------------------------ declared


def _load_declared_file(path) -> dict:
    raw = json.loads(Path(path).read_text()) if not hasattr(path, "read_text") else json.loads(path.read_text())
    out = {}
    for entry in raw.get("fields", []):
        out[(int(entry["p"]), int(entry["c"]))] = (list(entry["invariants"]), entry.get("provenance", ""))
    return out


@lru_cache(maxsize=None)
def declared_table(path: str | None = None) -> dict:
    table = _load_declared_file(resources.files(__package__) / "declared_defaults.json")
    if path:
        table.update(_load_declared_file(path))
    return table


# ------------------------------------------------------------------ builtin access


def _builtin(fld: PureFieldParams):
    from .builtin import builtin_group

    try:
        return builtin_group(fld.p, fld.c)
    except BackendFailure:
        raise
    except Exception as exc:  # numerical or search breakdown
        raise BackendFailure(f"builtin computation failed: {exc}") from exc


def _certified_builtin(fld: PureFieldParams):
    G = _builtin(fld)
    if not G.certified:
        raise BackendFailure(f"builtin class group not certified for {fld.key} (h*R / Euler estimate = {G.ratio:.3f})")
    return G


# ------------------------------------------------------------------ operations


def class_data(fld: PureFieldParams, backend: BackendConfig) -> ClassGroupData:
    if backend.kind == "declared":
        table = declared_table(backend.declared_path)
        if fld.key not in table:
            raise BackendFailure(f"no declared class group for {fld.key}")
        inv, prov = table[fld.key]
        cd = ClassGroupData.from_invariants(fld, inv, "declared", prov)
    elif backend.kind == "oracle":
        inv = backend.client().class_group(fld.p, fld.c)
        cd = ClassGroupData.from_invariants(fld, inv, "oracle", backend.oracle_cmd or "")
    else:
        G = _certified_builtin(fld)
        cd = ClassGroupData.from_invariants(
            fld, G.invariants, "builtin",
            f"relations over the Minkowski factor base, h*R/Euler = {G.ratio:.5f}",
        )
    cd.check()
    return cd


def _power_coords_valid(gen, p):
    return isinstance(gen, (list, tuple)) and len(gen) == p


def verify_generator(I: Ideal, gen, fld: PureFieldParams) -> bool:
    """|N(gen)| = N(I) and gen lies in I (in O_K when gen has denominators)."""
    if not _power_coords_valid(gen, fld.p):
        return False
    fr = [Fraction(x) for x in gen]
    den = math.lcm(*(x.denominator for x in fr))
    num = [int(x * den) for x in fr]
    nrm = Fraction(elt_norm(num, fld.p, fld.c), den**fld.p)
    if abs(nrm) != I.norm:
        return False
    if den == 1:
        return I.contains(num)
    O = _order(fld.p, fld.c)
    try:
        x = O.from_power(num, den)
    except ValueError:
        return False
    J = O.zk_ideal_from_power(I.columns())
    from ..field import hnf_columns

    return hnf_columns(list(O.columns(J)) + [x], fld.p) == J


@lru_cache(maxsize=None)
def _order(p, c):
    from .builtin import PureOrder

    return PureOrder(p, c)


def _parse_generator(raw, p):
    if raw is None:
        return None
    out = []
    for s in raw:
        f = Fraction(str(s))
        out.append(int(f) if f.denominator == 1 else f)
    return out + [0] * (p - len(out))


def _order_by_powers(I: Ideal, fld, backend, cd: ClassGroupData | None) -> int:
    if cd is None:
        cd = class_data(fld, backend)
    divs = [d for d in range(2, cd.e + 1) if cd.e % d == 0]
    for d in divs:
        v = is_principal(ideal_pow(I, d), fld, backend, cd)
        if v.status is Status.PRINCIPAL:
            return d
    raise BackendFailure("class order does not divide the exponent; inconsistent backend data")


def is_principal(I: Ideal, fld: PureFieldParams, backend: BackendConfig, cd: ClassGroupData | None = None) -> PrincipalityVerdict:
    if (I.p, I.c) != fld.key:
        raise FieldError("ideal belongs to a different field")
    one = [1] + [0] * (fld.p - 1)
    if I.is_unit():
        return PrincipalityVerdict(Status.PRINCIPAL, one, 1, note="unit ideal")

    if backend.kind == "oracle":
        client = backend.client()
        tag = None
        if I.factors and len(I.factors) == 1:
            (ell, a), k = I.factors[0]
            tag = f"{ell}_{a}_{k}"
        resp = client.is_principal(fld.p, fld.c, I.hnf, tag)
        if resp["principal"]:
            gen = _parse_generator(resp.get("generator"), fld.p)
            if gen is None or not verify_generator(I, gen, fld):
                raise BackendFailure("oracle generator failed verification")
            return PrincipalityVerdict(Status.PRINCIPAL, gen, 1, note="oracle")
        if I.factors and len(I.factors) == 1:
            (ell, a), k = I.factors[0]
            m = client.ideal_class_order(fld.p, fld.c, ell, a)
            order = m // math.gcd(m, k)
        elif isinstance(resp.get("order"), int):
            order = resp["order"]
        else:
            order = _order_by_powers(I, fld, backend, cd)
        if order <= 1:
            raise BackendFailure("oracle says non-principal but the class order is 1")
        return PrincipalityVerdict(Status.NOT_PRINCIPAL, None, order, note="oracle")

    G = None
    if backend.kind == "builtin":
        try:
            G = _certified_builtin(fld)
        except BackendFailure as exc:
            log.info("falling back to plain search: %s", exc)
    if G is not None and I.factors:
        hnf = G.O.zk_ideal_from_power(I.columns())
        principal, x, order = G.is_principal(hnf, I.factors)
        if not principal:
            return PrincipalityVerdict(Status.NOT_PRINCIPAL, None, order, note="builtin class group")
        if x is not None:
            gen = G.O.power_coords(x)
            if verify_generator(I, gen, fld):
                return PrincipalityVerdict(Status.PRINCIPAL, gen, 1, note="builtin log-weighted search")
        return PrincipalityVerdict(Status.UNKNOWN, None, 1, search_bound=None,
                                   note="class is trivial but no generator was recovered")
    # declared backend, uncertified builtin, or ideal without a known factorization
    O = _order(fld.p, fld.c)
    from .builtin import plain_search

    hnf = O.zk_ideal_from_power(I.columns())
    x, bound = plain_search(O, hnf)
    if x is not None:
        gen = O.power_coords(x)
        if verify_generator(I, gen, fld):
            return PrincipalityVerdict(Status.PRINCIPAL, gen, None, note="short-vector search")
    return PrincipalityVerdict(Status.UNKNOWN, None, None, search_bound=bound, note="short-vector search exhausted")


@dataclass
class S0Evidence:
    ell: int
    root: int
    exponent: int  # e / p
    in_s0: bool | None
    class_order: int | None = None
    verdict: PrincipalityVerdict | None = None
    source: str = ""

    def to_json(self) -> dict:
        return {
            "ell": self.ell,
            "root": self.root,
            "exponent": self.exponent,
            "in_s0": self.in_s0,
            "class_order": self.class_order,
            "verdict": None if self.verdict is None else self.verdict.to_json(),
            "source": self.source,
        }

    @classmethod
    def from_json(cls, d: dict) -> "S0Evidence":
        v = d.get("verdict")
        return cls(int(d["ell"]), int(d["root"]), int(d["exponent"]), d["in_s0"], d.get("class_order"),
                   None if v is None else PrincipalityVerdict.from_json(v), d.get("source", ""))


def ideal_class_order(ell: int, fld: PureFieldParams, backend: BackendConfig) -> int | None:
    """Order of the class of the degree-1 prime above ell, or None when the backend cannot tell."""
    q = prime_above_deg1(ell, fld)
    if backend.kind == "oracle":
        return backend.client().ideal_class_order(fld.p, fld.c, ell, q.root)
    if backend.kind == "builtin":
        try:
            G = _certified_builtin(fld)
        except BackendFailure:
            return None
        vec, _, _ = G.ideal_class(q.factors)
        return G.order_of(vec)
    return None


def in_S0(ell: int, fld: PureFieldParams, cd: ClassGroupData, backend: BackendConfig) -> S0Evidence:
    """Is q^(e/p) non-principal, q the degree-1 prime above ell?  None means undecided."""
    p = fld.p
    if cd.e % p:
        raise ValueError("p does not divide the class number")
    k = cd.e // p
    q = prime_above_deg1(ell, fld)
    m = ideal_class_order(ell, fld, backend)
    if m is not None:
        if cd.e % m:
            raise BackendFailure(f"class order {m} does not divide the exponent {cd.e}")
        return S0Evidence(ell, q.root, k, k % m != 0, m, None, backend.kind)
    verdict = is_principal(ideal_pow(q, k), fld, backend, cd)
    status = {Status.PRINCIPAL: False, Status.NOT_PRINCIPAL: True, Status.UNKNOWN: None}[verdict.status]
    return S0Evidence(ell, q.root, k, status, verdict.class_order if status else None, verdict, backend.kind)


@dataclass
class DensityEstimate:
    estimate: Fraction
    expected: Fraction
    principal: int
    sample: int

    def relative_error(self) -> float:
        return abs(float(self.estimate - self.expected)) / float(self.expected)


def empirical_principal_density(fld: PureFieldParams, cd: ClassGroupData, X: int, backend: BackendConfig) -> DensityEstimate:
    """Share of admissible degree-1 primes of norm <= X whose (e/p)-th power is principal."""
    if backend.kind == "declared":
        raise ValueError("empirical density needs the oracle or builtin backend")
    p = fld.p
    if cd.e % p:
        raise ValueError("p does not divide the class number")
    k = cd.e // p
    hits = total = 0
    for ell in primes_up_to(X):
        if ell % p == 1 or ell == p or fld.c % ell == 0 or index_divisor(ell, fld):
            continue
        m = ideal_class_order(ell, fld, backend)
        if m is None:
            raise BackendFailure(f"no class order for the prime above {ell}")
        total += 1
        hits += k % m == 0
    if total == 0:
        raise ValueError("empty sample")
    return DensityEstimate(Fraction(hits, total), Fraction(1, p**cd.N), hits, total)
