"""Lattice tools: integral LLL, Fincke-Pohst enumeration, Smith normal form."""

from __future__ import annotations

import math
from math import gcd
from typing import Iterator, Sequence


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis: Sequence[Sequence[int]], tags: Sequence[Sequence[int]] | None = None):
    """Integral LLL (delta = 3/4) on integer row vectors.

    ``tags`` are rows transformed alongside the basis (e.g. the coordinates of
    each vector in some other basis).  Returns (reduced, tags).  Rows must be
    linearly independent.
    """
    b = [None] + [list(r) for r in basis]
    t = [None] + [list(r) for r in tags] if tags is not None else None
    n = len(basis)
    if n == 0:
        return [], []
    d = [1] + [0] * n
    lam = [[0] * (n + 1) for _ in range(n + 1)]
    d[1] = _dot(b[1], b[1])
    if d[1] == 0:
        raise ValueError("zero vector in basis")
    k, kmax = 2, 1

    def red(k: int, l: int):
        if 2 * abs(lam[k][l]) > d[l]:
            q = (2 * lam[k][l] + d[l]) // (2 * d[l])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            if t is not None:
                t[k] = [x - q * y for x, y in zip(t[k], t[l])]
            lam[k][l] -= q * d[l]
            for i in range(1, l):
                lam[k][i] -= q * lam[l][i]

    def swap(k: int):
        b[k], b[k - 1] = b[k - 1], b[k]
        if t is not None:
            t[k], t[k - 1] = t[k - 1], t[k]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 2] * d[k] + lm * lm) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            tt = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lm * tt) // d[k - 1]
            lam[i][k - 1] = (B * tt + lm * lam[i][k]) // d[k]
        d[k - 1] = B

    # Cohen's indices: d[i] here is d_i of the first i vectors, with d_0 = 1;
    # lam[k][j] ~ d_j * mu_{k,j}.
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = _dot(b[k], b[j])
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k] = u
                    if u == 0:
                        raise ValueError("basis rows are linearly dependent")
        red(k, k - 1)
        if 4 * d[k] * d[k - 2] < 3 * d[k - 1] ** 2 - 4 * lam[k][k - 1] ** 2:
            swap(k)
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                red(k, l)
            k += 1
    return b[1:], (t[1:] if t is not None else None)


def gram_float(basis: Sequence[Sequence[float]]) -> list[list[float]]:
    return [[float(sum(x * y for x, y in zip(u, v))) for v in basis] for u in basis]


def fincke_pohst(gram: Sequence[Sequence[float]], bound: float, limit: int = 100000) -> Iterator[tuple[list[int], float]]:
    """Nonzero x (up to sign) with x^T G x <= bound, for a positive definite G.

    Yields (x, value).  Stops after ``limit`` vectors.
    """
    n = len(gram)
    # q[i][j]: Cholesky-style decomposition Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2
    q = [[float(gram[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    for i in range(n):
        if q[i][i] <= 0:
            raise ValueError("Gram matrix is not positive definite")
    x = [0] * n
    T = [0.0] * n
    U = [0.0] * n
    UB = [0] * n
    i = n - 1
    T[i] = bound
    U[i] = 0.0
    count = 0
    eps = 1e-9 * max(bound, 1.0)

    def bounds(i):
        z = math.sqrt(max(T[i], 0.0) / q[i][i] + 1e-12)
        UB[i] = math.floor(z - U[i])
        x[i] = math.ceil(-z - U[i]) - 1

    bounds(i)
    while True:
        x[i] += 1
        if x[i] > UB[i]:
            if i == n - 1:
                return
            i += 1
            continue
        if i > 0:
            T[i - 1] = T[i] - q[i][i] * (x[i] + U[i]) ** 2
            i -= 1
            U[i] = sum(q[i][j] * x[j] for j in range(i + 1, n))
            bounds(i)
            continue
        # the walk meets 0 halfway; everything after it is a negated repeat
        if all(v == 0 for v in x):
            return
        val = bound - T[0] + q[0][0] * (x[0] + U[0]) ** 2
        if val <= bound + eps:
            yield list(x), val
            count += 1
            if count >= limit:
                return


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(A: Sequence[Sequence[int]]):
    """Square integer matrix A -> (diag, U, V) with U*A*V = diag(d_1 | d_2 | ...).

    U and V are unimodular.  Diagonal entries are nonnegative and ordered by
    divisibility.
    """
    n = len(A)
    M = [list(r) for r in A]
    U = _identity(n)
    V = _identity(n)

    def row_op(i, j, a, b, c, d):
        # rows (i, j) <- (a*ri + b*rj, c*ri + d*rj)
        for mat in (M, U):
            ri, rj = mat[i], mat[j]
            mat[i] = [a * x + b * y for x, y in zip(ri, rj)]
            mat[j] = [c * x + d * y for x, y in zip(ri, rj)]

    def col_op(i, j, a, b, c, d):
        for mat in (M, V):
            for r in mat:
                xi, xj = r[i], r[j]
                r[i] = a * xi + b * xj
                r[j] = c * xi + d * xj

    for t in range(n):
        while True:
            # pivot: smallest nonzero entry in the trailing block
            best = None
            for i in range(t, n):
                for j in range(t, n):
                    if M[i][j] and (best is None or abs(M[i][j]) < abs(M[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return [M[i][i] for i in range(t)] + [0] * (n - t), U, V
            i, j = best
            if i != t:
                row_op(t, i, 0, 1, 1, 0)
            if j != t:
                col_op(t, j, 0, 1, 1, 0)
            done = True
            for i in range(t + 1, n):
                if M[i][t]:
                    g, s, u = xgcd(M[t][t], M[i][t])
                    a, b = M[t][t] // g, M[i][t] // g
                    row_op(t, i, s, u, -b, a)
                    done = False
            for j in range(t + 1, n):
                if M[t][j]:
                    g, s, u = xgcd(M[t][t], M[t][j])
                    a, b = M[t][t] // g, M[t][j] // g
                    col_op(t, j, s, u, -b, a)
                    done = False
            if not done:
                continue
            # divisibility condition on the trailing block
            bad = None
            for i in range(t + 1, n):
                for j in range(t + 1, n):
                    if M[i][j] % M[t][t]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_op(t, bad, 1, 1, 0, 1)
        if M[t][t] < 0:
            U[t] = [-x for x in U[t]]
            M[t] = [-x for x in M[t]]
    return [M[i][i] for i in range(n)], U, V


def mat_mul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def smith_mod_det(H: Sequence[Sequence[int]], D: int):
    """Smith form of Z^k / rowspace(H), where D is a multiple of |det H|.

    Works modulo D throughout, which is legitimate because D*Z^k lies in the
    row lattice.  Returns (diag, V) with diag[i] | D and the isomorphism
    w -> ((w V)_i mod diag[i]).  V is only meaningful modulo D.
    """
    k = len(H)
    M = [[x % D for x in row] for row in H]
    V = _identity(k)
    diag = [D] * k

    def rows(i, j, a, b, c, d):
        ri, rj = M[i], M[j]
        M[i] = [(a * x + b * y) % D for x, y in zip(ri, rj)]
        M[j] = [(c * x + d * y) % D for x, y in zip(ri, rj)]

    def cols(i, j, a, b, c, d):
        for mat in (M, V):
            for r in mat:
                xi, xj = r[i], r[j]
                r[i] = (a * xi + b * xj) % D
                r[j] = (c * xi + d * xj) % D

    for t in range(k):
        while True:
            M[t:] = [r for r in M[t:] if any(r)]
            best = None
            for i in range(t, len(M)):
                for j in range(t, k):
                    if M[i][j]:
                        g = gcd(M[i][j], D)
                        if best is None or g < best[0]:
                            best = (g, i, j)
            if best is None:
                return diag, V
            _, i, j = best
            if i != t:
                M[t], M[i] = M[i], M[t]
            if j != t:
                cols(t, j, 0, 1, 1, 0)
            a = M[t][t]
            g, s, _ = xgcd(a, D)
            if g != a:
                # unimodular on (row_t, D*e_t): keep both images
                M.append([(D // g) * x % D for x in M[t]])
                M[t] = [(s * x) % D for x in M[t]]
            clean = True
            for i in range(t + 1, len(M)):
                b = M[i][t]
                if b:
                    if b % g == 0:
                        q = b // g
                        M[i] = [(x - q * y) % D for x, y in zip(M[i], M[t])]
                    else:
                        g2, s2, u2 = xgcd(g, b)
                        rows(t, i, s2, u2, -(b // g2), g // g2)
                        clean = False
                        break
            if not clean:
                continue
            for j in range(t + 1, k):
                b = M[t][j]
                if b:
                    if b % g == 0:
                        cols(t, j, 1, 0, -(b // g), 1)
                    else:
                        g2, s2, u2 = xgcd(g, b)
                        cols(t, j, s2, u2, -(b // g2), g // g2)
                        clean = False
                        break
            if not clean:
                continue
            bad = next((i for i in range(t + 1, len(M)) for j in range(t + 1, k) if M[i][j] % g), None)
            if bad is None:
                diag[t] = g
                break
            rows(t, bad, 1, 1, 0, 1)
    return diag, V
