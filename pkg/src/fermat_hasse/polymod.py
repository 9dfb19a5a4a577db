"""Dense univariate polynomials over F_ell.

A polynomial is a tuple of coefficients, lowest degree first, reduced into
[0, ell), with no trailing zeros (the zero polynomial is ``()``).
"""

from __future__ import annotations

import random

Poly = tuple


def norm(f, ell: int) -> Poly:
    out = [c % ell for c in f]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def deg(f: Poly) -> int:
    return len(f) - 1


def add(f: Poly, g: Poly, ell: int) -> Poly:
    n = max(len(f), len(g))
    return norm([(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)], ell)


def sub(f: Poly, g: Poly, ell: int) -> Poly:
    n = max(len(f), len(g))
    return norm([(f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0) for i in range(n)], ell)


def mul(f: Poly, g: Poly, ell: int) -> Poly:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return norm(out, ell)


def scale(f: Poly, k: int, ell: int) -> Poly:
    return norm([c * k for c in f], ell)


def monic(f: Poly, ell: int) -> Poly:
    if not f:
        return f
    return scale(f, pow(f[-1], -1, ell), ell)


def divmod_(f: Poly, g: Poly, ell: int) -> tuple[Poly, Poly]:
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(f)
    q = [0] * max(len(f) - len(g) + 1, 0)
    inv = pow(g[-1], -1, ell)
    dg = len(g) - 1
    for i in range(len(r) - 1, dg - 1, -1):
        coef = r[i] * inv % ell
        if coef:
            q[i - dg] = coef
            for j in range(len(g)):
                r[i - dg + j] = (r[i - dg + j] - coef * g[j]) % ell
    return norm(q, ell), norm(r[:dg] if dg > 0 else [], ell)


def rem(f: Poly, g: Poly, ell: int) -> Poly:
    return divmod_(f, g, ell)[1]


def gcd(f: Poly, g: Poly, ell: int) -> Poly:
    while g:
        f, g = g, rem(f, g, ell)
    return monic(f, ell)


def powmod(f: Poly, e: int, m: Poly, ell: int) -> Poly:
    result: Poly = (1,)
    base = rem(f, m, ell)
    while e:
        if e & 1:
            result = rem(mul(result, base, ell), m, ell)
        base = rem(mul(base, base, ell), m, ell)
        e >>= 1
    return rem(result, m, ell)


def derivative(f: Poly, ell: int) -> Poly:
    return norm([i * f[i] for i in range(1, len(f))], ell)


def pth_root_poly(f: Poly, ell: int) -> Poly:
    """g with g(x)**ell == f(x), valid when f' == 0 in characteristic ell."""
    return norm([f[i] for i in range(0, len(f), ell)], ell)


def squarefree_decomposition(f: Poly, ell: int) -> list[tuple[Poly, int]]:
    """Pairs (g, m) with f = lc * prod g**m, each g squarefree, pairwise coprime."""
    f = monic(norm(f, ell), ell)
    out: dict[int, Poly] = {}

    def merge(g: Poly, m: int):
        if deg(g) > 0:
            out[m] = mul(out.get(m, (1,)), g, ell)

    def rec(f: Poly, mult: int):
        if deg(f) <= 0:
            return
        df = derivative(f, ell)
        if not df:
            rec(pth_root_poly(f, ell), mult * ell)
            return
        c = gcd(f, df, ell)
        w = divmod_(f, c, ell)[0]
        i = 1
        while deg(w) > 0:
            y = gcd(w, c, ell)
            merge(divmod_(w, y, ell)[0], i * mult)
            c = divmod_(c, y, ell)[0]
            w = y
            i += 1
        if deg(c) > 0:
            rec(pth_root_poly(c, ell), mult * ell)

    rec(f, 1)
    return sorted(((g, m) for m, g in out.items()), key=lambda t: t[1])


def distinct_degree(f: Poly, ell: int) -> list[tuple[Poly, int]]:
    """Distinct-degree factorization of a monic squarefree f: pairs (product, degree)."""
    out = []
    h: Poly = (0, 1)
    x: Poly = (0, 1)
    d = 1
    f = monic(f, ell)
    while deg(f) >= 2 * d:
        h = powmod(h, ell, f, ell)
        g = gcd(f, sub(h, x, ell), ell)
        if deg(g) > 0:
            out.append((g, d))
            f = divmod_(f, g, ell)[0]
            h = rem(h, f, ell)
        d += 1
    if deg(f) > 0:
        out.append((f, deg(f)))
    return out


def equal_degree(f: Poly, d: int, ell: int, rng: random.Random | None = None) -> list[Poly]:
    """Split a monic squarefree f whose irreducible factors all have degree d."""
    f = monic(f, ell)
    n = deg(f)
    if n == d:
        return [f]
    rng = rng or random.Random(n * 1000003 + ell)
    while True:
        a = norm([rng.randrange(ell) for _ in range(n)], ell)
        if deg(a) <= 0:
            continue
        if ell == 2:
            # trace map over F_{2^d}
            t = a
            acc = a
            for _ in range(d - 1):
                t = powmod(t, 2, f, ell)
                acc = add(acc, t, ell)
            b = acc
        else:
            b = sub(powmod(a, (ell**d - 1) // 2, f, ell), (1,), ell)
        g = gcd(f, b, ell)
        if 0 < deg(g) < n:
            h = divmod_(f, g, ell)[0]
            return equal_degree(g, d, ell, rng) + equal_degree(h, d, ell, rng)


def factor(f: Poly, ell: int) -> list[tuple[Poly, int]]:
    """Complete factorization into monic irreducibles with multiplicities."""
    out = []
    for g, m in squarefree_decomposition(f, ell):
        for part, d in distinct_degree(g, ell):
            for irr in equal_degree(part, d, ell):
                out.append((irr, m))
    return sorted(out, key=lambda t: (deg(t[0]), t[0], t[1]))


def shape(f: Poly, ell: int) -> list[tuple[int, int]]:
    """(degree, multiplicity) of each irreducible factor, without splitting."""
    out = []
    for g, m in squarefree_decomposition(f, ell):
        for part, d in distinct_degree(g, ell):
            out.extend([(d, m)] * (deg(part) // d))
    return sorted(out)


def evaluate(f: Poly, x: int, ell: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % ell
    return acc
