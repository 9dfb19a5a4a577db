"""The pure field K = Q(theta), theta^p = c, and ideals of the order Z[theta].

Elements of Z[theta] are integer vectors in the power basis 1, theta, ...,
theta^(p-1).  Ideals are stored as column-style Hermite normal forms: column
j is a basis vector supported on coordinates 0..j, the diagonal is positive
and entries above it are reduced modulo the diagonal entry of their row.
All ideal arithmetic assumes ideals coprime to the index of Z[theta] in O_K.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

from . import polymod
from .arith import factorint, is_prime, is_pth_power_free, pth_root_mod


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class PureFieldParams:
    p: int
    c: int
    poly_disc: int
    wieferich_ok: bool

    @property
    def key(self) -> tuple[int, int]:
        return (self.p, self.c)

    def defining_poly(self, ell: int) -> polymod.Poly:
        return polymod.norm([-self.c] + [0] * (self.p - 1) + [1], ell)

    def to_json(self) -> dict:
        return {"p": self.p, "c": self.c, "poly_disc": str(self.poly_disc), "wieferich_ok": self.wieferich_ok}


def field_data(p: int, c: int) -> PureFieldParams:
    if p < 3 or not is_prime(p):
        raise FieldError(f"{p} is not an odd prime")
    if c < 2:
        raise FieldError("c must be >= 2")
    if not is_pth_power_free(c, p):
        raise FieldError("c not p-th-power-free")
    sign = -1 if (p * (p - 1) // 2) % 2 else 1
    disc = sign * p**p * c ** (p - 1)
    return PureFieldParams(p, c, disc, pow(c, p - 1, p * p) != 1)


# --------------------------------------------------------------------------
# Dedekind criterion and splitting


def dedekind_transcript(ell: int, fld: PureFieldParams) -> dict:
    """Dedekind's test at ell for X^p - c, with every intermediate polynomial.

    With F = prod g_i^e_i mod ell, t = prod g_i and h = F / t lifted to Z[X],
    ell divides the index iff gcd(G, t, h) != 1 mod ell where G = (t*h - F)/ell.
    """
    p, c = fld.p, fld.c
    F_int = [-c] + [0] * (p - 1) + [1]
    Fbar = fld.defining_poly(ell)
    parts = polymod.squarefree_decomposition(Fbar, ell)
    t: polymod.Poly = (1,)
    h: polymod.Poly = (1,)
    for g, m in parts:
        t = polymod.mul(t, g, ell)
        for _ in range(m - 1):
            h = polymod.mul(h, g, ell)
    th = [0] * (len(t) + len(h) - 1)
    for i, a in enumerate(t):
        for j, b in enumerate(h):
            th[i + j] += a * b
    diff = [(th[i] if i < len(th) else 0) - (F_int[i] if i < len(F_int) else 0) for i in range(max(len(th), len(F_int)))]
    if any(x % ell for x in diff):
        raise AssertionError("t*h must reduce to F")
    G = polymod.norm([x // ell for x in diff], ell)
    d = polymod.gcd(polymod.gcd(G, t, ell), h, ell) if G else polymod.gcd(t, h, ell)
    return {
        "ell": ell,
        "squarefree_parts": [[list(g), m] for g, m in parts],
        "t": list(t),
        "h": list(h),
        "G": list(G),
        "gcd": list(d),
        "divides_index": polymod.deg(d) > 0,
    }


def index_divisor(ell: int, fld: PureFieldParams) -> bool:
    """Whether ell divides the index f = [O_K : Z[theta]]."""
    if fld.c % ell and fld.p % ell:
        return False  # X^p - c is separable mod ell
    return dedekind_transcript(ell, fld)["divides_index"]


def check_transcript(tr: dict, fld: PureFieldParams) -> bool:
    """Replay a stored Dedekind transcript."""
    try:
        return dedekind_transcript(int(tr["ell"]), fld) == tr
    except (KeyError, TypeError, ValueError):
        return False


def factor_shape(ell: int, fld: PureFieldParams) -> list[tuple[int, int]]:
    """(residue degree, ramification) of the primes above ell, sorted."""
    p, c = fld.p, fld.c
    if index_divisor(ell, fld):
        raise FieldError("order not maximal at ell; shape undefined by this method")
    if c % ell and ell != p:
        if (ell - 1) % p == 0:
            if pow(c, (ell - 1) // p, ell) == 1:
                return [(1, 1)] * p
            return [(p, 1)]
        k = 1
        x = ell % p
        while x != 1:
            x = x * ell % p
            k += 1
        return sorted([(1, 1)] + [(k, 1)] * ((p - 1) // k))
    return polymod.shape(fld.defining_poly(ell), ell)


# --------------------------------------------------------------------------
# arithmetic in Z[theta]


def elt_mul(x: Sequence[int], y: Sequence[int], p: int, c: int) -> list[int]:
    out = [0] * p
    for i, a in enumerate(x):
        if a:
            for j, b in enumerate(y):
                if b:
                    k = i + j
                    if k >= p:
                        out[k - p] += a * b * c
                    else:
                        out[k] += a * b
    return out


def elt_norm(x: Sequence[int], p: int, c: int) -> int:
    """Norm to Q: determinant of multiplication by x (Bareiss, exact)."""
    cols = []
    e = [0] * p
    for k in range(p):
        e = [0] * p
        e[k] = 1
        cols.append(elt_mul(x, e, p, c))
    m = [[cols[j][i] for j in range(p)] for i in range(p)]
    return bareiss_det(m)


def bareiss_det(m: list[list[int]]) -> int:
    m = [row[:] for row in m]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def hnf_columns(vectors: Iterable[Sequence[int]], n: int, modulus: int | None = None) -> tuple[tuple[int, ...], ...]:
    """Column HNF (returned as a tuple of rows) of the lattice spanned by vectors.

    With ``modulus`` a multiple of the lattice determinant, the vectors
    modulus*e_j stay in the pool and coordinates are reduced modulo it.
    """
    pool = [list(v) for v in vectors]
    if modulus:
        pool = [[x % modulus for x in v] for v in pool]
        pool += [[modulus if i == j else 0 for i in range(n)] for j in range(n)]
    pool = [v for v in pool if any(v)]
    basis: list[list[int]] = [[] for _ in range(n)]
    for i in range(n - 1, -1, -1):
        with_i = [v for v in pool if v[i] != 0]
        rest = [v for v in pool if v[i] == 0]
        if not with_i:
            raise FieldError("lattice is not of full rank")
        piv = with_i[0]
        for v in with_i[1:]:
            a, b = piv[i], v[i]
            g, s, t = _xgcd(a, b)
            # unimodular 2x2 step: one vector keeps the gcd, the other loses coordinate i
            piv, other = (
                [s * x + t * y for x, y in zip(piv, v)],
                [(b // g) * x - (a // g) * y for x, y in zip(piv, v)],
            )
            if modulus:
                piv = [x % modulus if k < i else x for k, x in enumerate(piv)]
                other = [x % modulus for x in other]
            if any(other):
                rest.append(other)
        if piv[i] < 0:
            piv = [-x for x in piv]
        basis[i] = piv
        pool = [v for v in rest if any(v)]
    for j in range(n):
        for i in range(j - 1, -1, -1):
            q = basis[j][i] // basis[i][i]
            if q:
                basis[j] = [x - q * y for x, y in zip(basis[j], basis[i])]
    return tuple(tuple(basis[j][i] for j in range(n)) for i in range(n))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class Ideal:
    """Nonzero ideal of Z[theta] (coprime to the index) as a column HNF.

    ``factors`` optionally records a factorization into degree-1 primes as
    ((ell, root), exponent) pairs; it is carried through products.
    """

    p: int
    c: int
    hnf: tuple[tuple[int, ...], ...]
    factors: tuple[tuple[tuple[int, int], int], ...] | None = None

    @property
    def norm(self) -> int:
        out = 1
        for i in range(self.p):
            out *= self.hnf[i][i]
        return out

    def column(self, j: int) -> list[int]:
        return [self.hnf[i][j] for i in range(self.p)]

    def columns(self) -> list[list[int]]:
        return [self.column(j) for j in range(self.p)]

    def contains(self, v: Sequence[int]) -> bool:
        v = list(v)
        for i in range(self.p - 1, -1, -1):
            d = self.hnf[i][i]
            if v[i] % d:
                return False
            k = v[i] // d
            if k:
                col = self.column(i)
                v = [x - k * y for x, y in zip(v, col)]
        return not any(v)

    def is_unit(self) -> bool:
        return self.norm == 1

    def to_json(self) -> dict:
        d = {"p": self.p, "c": self.c, "hnf": [[str(x) for x in row] for row in self.hnf]}
        if self.factors is not None:
            d["factors"] = [[ell, a, e] for (ell, a), e in self.factors]
        return d


@dataclass(frozen=True)
class PrimeIdealHNF(Ideal):
    ell: int = 0
    root: int = 0

    @property
    def generators(self) -> tuple[int, list[int]]:
        """Two-element form (ell, theta - root)."""
        g = [0] * self.p
        g[0] = -self.root
        g[1] = 1
        return self.ell, g


def unit_ideal(fld: PureFieldParams) -> Ideal:
    p = fld.p
    return Ideal(p, fld.c, tuple(tuple(1 if i == j else 0 for j in range(p)) for i in range(p)), ())


def degree_one_ideal(fld: PureFieldParams, ell: int, a: int) -> PrimeIdealHNF:
    """HNF of (ell, theta - a); requires a^p = c mod ell."""
    p = fld.p
    if (pow(a, p, ell) - fld.c) % ell:
        raise FieldError("root is not a root of X^p - c mod ell")
    rows = [[0] * p for _ in range(p)]
    rows[0][0] = ell
    for k in range(1, p):
        rows[k][k] = 1
        rows[0][k] = (-pow(a, k, ell)) % ell
    return PrimeIdealHNF(p, fld.c, tuple(tuple(r) for r in rows), (((ell, a % ell), 1),), ell=ell, root=a % ell)


def prime_above_deg1(ell: int, fld: PureFieldParams) -> PrimeIdealHNF:
    """The unique degree-1 prime (ell, theta - a) above ell when ell != 1 mod p."""
    p = fld.p
    if not is_prime(ell) or ell == p or ell % p == 1 or fld.c % ell == 0 or index_divisor(ell, fld):
        raise FieldError("degree-1 prime not unique/defined")
    a = pth_root_mod(fld.c, p, ell).value
    return degree_one_ideal(fld, ell, a)


def ideal_from_generators(fld: PureFieldParams, gens: Iterable[Sequence[int]], modulus: int | None = None) -> Ideal:
    """Ideal generated (as a Z[theta]-module) by the given elements."""
    p, c = fld.p, fld.c
    vecs = []
    for g in gens:
        g = list(g) + [0] * (p - len(g))
        for k in range(p):
            e = [0] * p
            e[k] = 1
            vecs.append(elt_mul(g, e, p, c))
    return Ideal(p, c, hnf_columns(vecs, p, modulus))


def _same_field(I: Ideal, J: Ideal) -> None:
    if (I.p, I.c) != (J.p, J.c):
        raise FieldError("ideals live in different fields")


def _merge_factors(I: Ideal, J: Ideal):
    if I.factors is None or J.factors is None:
        return None
    acc: dict[tuple[int, int], int] = {}
    for k, e in I.factors + J.factors:
        acc[k] = acc.get(k, 0) + e
    return tuple(sorted(acc.items()))


def ideal_mul(I: Ideal, J: Ideal) -> Ideal:
    _same_field(I, J)
    p, c = I.p, I.c
    vecs = [elt_mul(u, v, p, c) for u in I.columns() for v in J.columns()]
    D = I.norm * J.norm
    return Ideal(p, c, hnf_columns(vecs, p, D), _merge_factors(I, J))


def ideal_pow(I: Ideal, k: int) -> Ideal:
    if k < 0:
        raise FieldError("negative powers are not integral ideals")
    p = I.p
    result = Ideal(p, I.c, tuple(tuple(1 if i == j else 0 for j in range(p)) for i in range(p)), ())
    base = I
    while k:
        if k & 1:
            result = ideal_mul(result, base)
        k >>= 1
        if k:
            base = ideal_mul(base, base)
    return result


def ideal_norm(I: Ideal) -> int:
    n = I.norm
    if n == 0:
        raise FieldError("zero ideal")
    return abs(n)


def ideal_from_json(d: dict) -> Ideal:
    hnf = tuple(tuple(int(x) for x in row) for row in d["hnf"])
    factors = d.get("factors")
    if factors is not None:
        factors = tuple(((int(a), int(b)), int(e)) for a, b, e in factors)
    return Ideal(int(d["p"]), int(d["c"]), hnf, factors)


def squarefree_kernel_primes(c: int) -> list[int]:
    return sorted(factorint(c))
