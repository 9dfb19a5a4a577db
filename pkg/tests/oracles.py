"""Brute-force reference implementations, deliberately naive and independent of the package."""

from __future__ import annotations

from itertools import product


def is_prime_naive(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def count_points_brute(p: int, q: int, coeffs) -> int:
    """Projective F_q-points of a x^p + b y^p + c z^p, by listing normalized representatives."""
    a, b, c = (k % q for k in coeffs)
    reps = [(1, y, z) for y in range(q) for z in range(q)]
    reps += [(0, 1, z) for z in range(q)]
    reps.append((0, 0, 1))
    return sum((a * pow(x, p, q) + b * pow(y, p, q) + c * pow(z, p, q)) % q == 0 for x, y, z in reps)


def _v(n: int, q: int) -> int:
    if n == 0:
        return 10**9
    k = 0
    while n % q == 0:
        n //= q
        k += 1
    return k


def qq_solvable_brute(q: int, p: int, coeffs, max_depth: int = 40, max_nodes: int = 400000):
    """Q_q-solvability of sum k_i x_i^p = 0 by lifting primitive solutions chart by chart.

    Charts cover the primitive triples: (1, u, v), (q u, 1, v), (q u, q v, 1)
    with u, v in Z_q.  A node (u, v) mod q^k survives when f = 0 mod q^k.
    Acceptance: some coordinate has v(df/dx_i) = s with v(f) >= 2s + 1 (Hensel
    in that coordinate alone).  Returns None if the node budget runs out.
    """
    a, b, c = coeffs

    def point(chart, u, v):
        if chart == 0:
            return (1, u, v)
        if chart == 1:
            return (q * u, 1, v)
        return (q * u, q * v, 1)

    def f(P):
        return a * P[0] ** p + b * P[1] ** p + c * P[2] ** p

    nodes = 0
    for chart in range(3):
        stack = [(1, u, v) for u in range(q) for v in range(q)]
        while stack:
            k, u, v = stack.pop()
            nodes += 1
            if nodes > max_nodes:
                return None
            P = point(chart, u, v)
            val = f(P)
            if _v(val, q) < k:
                continue
            for i, (coef, x) in enumerate(zip(coeffs, P)):
                s = _v(p * coef * x ** (p - 1), q)
                if s < 10**9 and _v(val, q) >= 2 * s + 1:
                    return True
            if k >= max_depth:
                return None
            qk = q**k
            for du, dv in product(range(q), repeat=2):
                stack.append((k + 1, u + du * qk, v + dv * qk))
    return False


def pth_root_brute(c: int, p: int, ell: int) -> list[int]:
    return [a for a in range(ell) if pow(a, p, ell) == c % ell]
