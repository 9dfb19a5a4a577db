"""Local solvability of diagonal curves a*x^p + b*y^p + c*z^p = 0.

Point counts over F_q use the cyclotomic-class table of q: with H the
subgroup of p-th powers in F_q^*, the number of affine solutions of
``a*u + b*v = -c`` with u, v in H depends only on the H-classes of the
coefficient ratios, and one O(q) table per q answers every triple.

Q_q-solvability first normalizes coefficient valuations (absorbing q^p into
the variables and rotating a forced-divisible variable), which leaves one of
three patterns.  For q != p the pattern is decided in closed form; for q = p a
breadth-first lift over primitive triples is run until a branch satisfies
the one-variable Hensel condition or every branch dies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np
from sympy.ntheory import nthroot_mod

from .arith import (
    Residue,
    is_prime,
    is_pth_power_mod,
    prime_divisors,
    primitive_root,
    valuation,
)


class LocalError(ValueError):
    pass


@dataclass(frozen=True)
class DiagonalCurve:
    p: int
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise LocalError(f"exponent {self.p} is not an odd prime")
        if self.a * self.b * self.c == 0:
            raise LocalError("coefficients must be nonzero")

    @property
    def coeffs(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def evaluate(self, point) -> int:
        return sum(k * x**self.p for k, x in zip(self.coeffs, point))

    def partial(self, point, i: int) -> int:
        return self.p * self.coeffs[i] * point[i] ** (self.p - 1)

    def to_json(self) -> dict:
        return {"p": self.p, "a": self.a, "b": self.b, "c": self.c}

    @classmethod
    def from_json(cls, d: dict) -> "DiagonalCurve":
        return cls(int(d["p"]), int(d["a"]), int(d["b"]), int(d["c"]))


@dataclass
class QqResult:
    """Verdict on C(Q_q) with replayable evidence.

    On success ``point`` is an integer triple P in the curve's own
    coordinates with ``v_q(f(P)) >= 2*deriv_val + 1`` where
    ``deriv_val = v_q(df/dx_coord (P))``.  On failure ``depth`` is the lift
    level at which the search ended and ``reason`` names the argument.
    """

    q: int
    solvable: bool
    method: str
    point: tuple[int, int, int] | None = None
    coord: int | None = None
    deriv_val: int | None = None
    depth: int | None = None
    reason: str | None = None

    def to_json(self) -> dict:
        d = {"q": self.q, "solvable": self.solvable, "method": self.method}
        if self.point is not None:
            d.update(point=[str(x) for x in self.point], coord=self.coord, deriv_val=self.deriv_val)
        if self.depth is not None:
            d["depth"] = self.depth
        if self.reason is not None:
            d["reason"] = self.reason
        return d

    @classmethod
    def from_json(cls, d: dict) -> "QqResult":
        point = d.get("point")
        return cls(
            q=int(d["q"]),
            solvable=bool(d["solvable"]),
            method=str(d["method"]),
            point=tuple(int(x) for x in point) if point is not None else None,
            coord=d.get("coord"),
            deriv_val=d.get("deriv_val"),
            depth=d.get("depth"),
            reason=d.get("reason"),
        )


@dataclass
class LocalReport:
    curve: DiagonalCurve
    checked_primes: list[int]
    obstructed_at: int | None
    witnesses: dict[int, QqResult] = field(default_factory=dict)

    @property
    def obstruction_free(self) -> bool:
        return self.obstructed_at is None

    def to_json(self) -> dict:
        return {
            "curve": self.curve.to_json(),
            "checked_primes": self.checked_primes,
            "obstructed_at": self.obstructed_at,
            "witnesses": {str(q): w.to_json() for q, w in self.witnesses.items()},
        }

    @classmethod
    def from_json(cls, d: dict) -> "LocalReport":
        return cls(
            curve=DiagonalCurve.from_json(d["curve"]),
            checked_primes=[int(q) for q in d["checked_primes"]],
            obstructed_at=d.get("obstructed_at"),
            witnesses={int(q): QqResult.from_json(w) for q, w in d.get("witnesses", {}).items()},
        )


# --------------------------------------------------------------------------
# point counting over F_q


class PowerClassTable:
    """p-th-power classes of F_q^* and the cyclotomic numbers of order p.

    ``cls[x]`` is the discrete log of x mod p (w.r.t. a fixed primitive root);
    ``D[i][j]`` counts X in F_q minus {0, 1} with cls(X) = i, cls(1 - X) = j.
    Only built when p divides q - 1.
    """

    def __init__(self, p: int, q: int):
        if (q - 1) % p:
            raise ValueError("table only needed when p | q - 1")
        self.p, self.q = p, q
        self.g = primitive_root(q)
        ind = np.zeros(q, dtype=np.int64)
        x = 1
        for k in range(q - 1):
            ind[x] = k
            x = x * self.g % q
        self.ind = ind
        self.cls = ind % p
        xs = np.arange(2, q)
        flat = np.bincount(self.cls[xs] * p + self.cls[(1 - xs) % q], minlength=p * p)
        self.D = flat.reshape(p, p)

    def klass(self, x: int) -> int:
        return int(self.cls[x % self.q])

    def count(self, a: int, b: int, c: int) -> int:
        p, q = self.p, self.q
        inv = lambda t: pow(t, -1, q)
        total = 0
        for u, v in ((a, b), (a, c), (b, c)):
            if self.klass(-v * inv(u)) == 0:
                total += p
        i = self.klass(-a * inv(c))
        j = self.klass(-b * inv(c))
        return total + p * p * int(self.D[i, j])


@lru_cache(maxsize=4096)
def power_class_table(p: int, q: int) -> PowerClassTable:
    return PowerClassTable(p, q)


def _check_fq_coeffs(q: int, coeffs) -> tuple[int, int, int]:
    a, b, c = (int(k) % q for k in coeffs)
    if a * b * c == 0:
        raise LocalError("not a diagonal curve over F_q")
    return a, b, c


def count_points_fq(p: int, q: int, coeffs) -> int:
    """Number of projective F_q-points of a*x^p + b*y^p + c*z^p = 0."""
    a, b, c = _check_fq_coeffs(q, coeffs)
    if (q - 1) % p:
        # x -> x^p is a bijection of F_q: the curve is a line
        return q + 1
    return power_class_table(p, q).count(a, b, c)


def count_points_fq_brute(p: int, q: int, coeffs) -> int:
    """Direct O(q^2) enumeration; debug oracle for :func:`count_points_fq`."""
    a, b, c = _check_fq_coeffs(q, coeffs)
    pw = [pow(x, p, q) for x in range(q)]
    n = 0
    for y in range(q):
        for z in range(q):
            if (a + b * pw[y] + c * pw[z]) % q == 0:
                n += 1
    for z in range(q):
        if (b + c * pw[z]) % q == 0:
            n += 1
    if c % q == 0:
        n += 1
    return n


def weil_guarantees_point(p: int, q: int) -> bool:
    """q + 1 > (p-1)(p-2) sqrt(q), decided in integers."""
    g2 = (p - 1) * (p - 2)
    return (q + 1) ** 2 > g2 * g2 * q


# --------------------------------------------------------------------------
# Q_q solvability


def _root_mod(x: int, p: int, q: int) -> int | None:
    """Some w with w^p = x (mod q), or None; x a unit mod q."""
    x %= q
    if math.gcd(p, q - 1) == 1:
        return pow(x, pow(p, -1, q - 1), q) if q > 2 else 1
    if not is_pth_power_mod(x, p, q):
        return None
    return int(nthroot_mod(x, p, q))


@dataclass
class _Normal:
    """Coefficients u_i * q^v_i with x_i(original) = q^shift_i * x_i(normal)."""

    units: list[int]
    vals: list[int]
    shift: list[int]


def _normalize(q: int, p: int, coeffs) -> _Normal | str:
    vals = [valuation(k, q) for k in coeffs]
    units = [k // q**v for k, v in zip(coeffs, vals)]
    shift = [0, 0, 0]
    for i in range(3):
        k, r = divmod(vals[i], p)
        # a q^(kp+r) x^p = a q^r (q^k x)^p ; new variable q^k x, so x = q^-k x'
        vals[i] = r
        shift[i] -= k
    m = min(vals)
    vals = [v - m for v in vals]
    zeros = [i for i in range(3) if vals[i] == 0]
    if len(zeros) == 1:
        i = zeros[0]
        others = [vals[j] for j in range(3) if j != i]
        if others[0] != others[1]:
            return "coefficient valuations distinct mod p"
        # x_i is forced divisible by q: x_i = q x_i'
        v = others[0]
        vals[i] = p
        shift[i] += 1
        vals = [t - v for t in vals]
    if len(set(vals)) == 3:
        return "coefficient valuations distinct mod p"
    return _Normal(units, vals, shift)


def _normal_coeffs(n: _Normal, q: int) -> list[int]:
    return [u * q**v for u, v in zip(n.units, n.vals)]


def _eval(coeffs, point, p: int) -> int:
    return sum(k * x**p for k, x in zip(coeffs, point))


def _newton_refine(coeffs, point, i: int, q: int, p: int, target: int) -> list[int]:
    """Raise v_q(f) at an approximate root satisfying the Hensel condition in x_i."""
    point = list(point)
    while True:
        f = _eval(coeffs, point, p)
        if f == 0:
            return point
        vf = valuation(f, q)
        d = p * coeffs[i] * point[i] ** (p - 1)
        s = valuation(d, q)
        if vf >= target:
            return point
        assert vf >= 2 * s + 1, "Newton step requires the Hensel condition"
        prec = 2 * vf + 2
        mod = q**prec
        step = (f // q**s) * pow(d // q**s, -1, mod) % mod
        point[i] = (point[i] - step) % (q ** (prec + 1))


def _to_original(n: _Normal, q: int, p: int, coeffs, npoint, i: int) -> tuple[list[int], int]:
    """Map a normalized Hensel witness to integer coordinates of the input curve."""
    ncoeffs = _normal_coeffs(n, q)
    s_norm = valuation(p * ncoeffs[i], q)  # x_i is a unit in the normal form
    extra = 0
    while True:
        # original x_j = q^shift_j x'_j, cleared to integers by q^t
        t = -min(n.shift)
        target = 2 * s_norm + 1 + extra
        refined = _newton_refine(ncoeffs, npoint, i, q, p, target)
        pt = [x * q ** (sh + t) for x, sh in zip(refined, n.shift)]
        f = _eval(coeffs, pt, p)
        d = p * coeffs[i] * pt[i] ** (p - 1)
        s = valuation(d, q)
        if f == 0 or valuation(f, q) >= 2 * s + 1:
            return pt, s
        extra += 2 * s + 1 - valuation(f, q)


def kmax_bound(p: int, q: int) -> int:
    """Depth by which every branch is accepted or dead."""
    return 2 * (1 if q == p else 0) + 2 * (p - 1) + 1


def _bfs(q: int, p: int, n: _Normal, k_max: int) -> tuple[tuple | None, int, int]:
    """Lift primitive zeros of the normal form level by level.

    A node at level m is a triple mod q^m; since every partial derivative has
    valuation >= w = v_q(p), f mod q^(m+w) only depends on the node, and the
    node stays alive while that residue is 0.  Returns (point, coord, depth).
    """
    coeffs = _normal_coeffs(n, q)
    w = 1 if q == p else 0
    unit_positions = [i for i in range(3) if n.vals[i] == 0]
    seen: set = set()
    for i in unit_positions:
        free = [j for j in range(3) if j != i]
        live = {(0, 0)}
        m = 0
        while live:
            m += 1
            if m + w > k_max:
                break
            qm = q**m
            mod = q ** (m + w)
            step = q ** (m - 1)
            nxt = set()
            for (y0, z0) in live:
                for dy in range(q):
                    y = y0 + dy * step
                    for dz in range(q):
                        z = z0 + dz * step
                        key = (i, m, y, z)
                        if key in seen:
                            continue
                        seen.add(key)
                        pt = [0, 0, 0]
                        pt[i], pt[free[0]], pt[free[1]] = 1, y, z
                        if _eval(coeffs, pt, p) % mod:
                            continue
                        s = w + n.vals[i]
                        if 2 * s + 1 <= m + w:
                            return tuple(pt), i, m
                        nxt.add((y % qm, z % qm))
            live = nxt
    return None, -1, m


def solvable_qq(q: int, curve: DiagonalCurve, witness: bool = True) -> QqResult:
    """Decide whether the curve has a Q_q-point."""
    p = curve.p
    coeffs = curve.coeffs
    n = _normalize(q, p, coeffs)
    if isinstance(n, str):
        return QqResult(q, False, "valuation", depth=1, reason=n)
    units = n.units
    zero = [i for i in range(3) if n.vals[i] == 0]

    if q != p and len(zero) == 2:
        i, j = zero
        w = _root_mod(-units[j] * pow(units[i], -1, q), p, q)
        if w is None:
            return QqResult(q, False, "binary-residue", depth=1, reason="-u_j/u_i is not a p-th power mod q")
        if not witness:
            return QqResult(q, True, "binary-residue")
        npoint = [0, 0, 0]
        npoint[i], npoint[j] = w, 1
        return _witnessed(q, p, n, coeffs, npoint, i, "binary-residue")

    if q != p:
        # all three coefficients are q-units: smooth reduction, Hensel from any F_q point
        if (q - 1) % p:
            method = "bijective-power-map"
        elif weil_guarantees_point(p, q):
            method = "weil"
        elif count_points_fq(p, q, units) == 0:
            return QqResult(q, False, "fq-count", depth=1, reason="no F_q-point on the smooth reduction")
        else:
            method = "fq-count"
        if not witness:
            return QqResult(q, True, method)
        npoint, i = _smooth_point(q, p, units)
        return _witnessed(q, p, n, coeffs, npoint, i, method)

    point, i, depth = _bfs(q, p, n, kmax_bound(p, q))
    if point is None:
        return QqResult(q, False, "lift-search", depth=depth, reason="all branches died")
    if not witness:
        return QqResult(q, True, "lift-search", depth=depth)
    res = _witnessed(q, p, n, coeffs, list(point), i, "lift-search")
    res.depth = depth
    return res


def _witnessed(q, p, n, coeffs, npoint, i, method) -> QqResult:
    pt, s = _to_original(n, q, p, coeffs, npoint, i)
    return QqResult(q, True, method, point=tuple(pt), coord=i, deriv_val=s)


def _smooth_point(q: int, p: int, units) -> tuple[list[int], int]:
    """An F_q-point of a smooth diagonal curve with a unit partial derivative."""
    a, b, c = (u % q for u in units)
    for (i, j, k) in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        w = _root_mod(-units[j] * pow(units[i], -1, q), p, q)
        if w is not None:
            pt = [0, 0, 0]
            pt[i], pt[j] = w, 1
            return pt, i
    inv_a = pow(a, -1, q)
    for y in range(1, q):
        r = -(b * pow(y, p, q) + c) * inv_a % q
        if r == 0:
            return [0, y, 1], 1
        w = _root_mod(r, p, q)
        if w is not None:
            return [w, y, 1], 0
    raise AssertionError("smooth curve with points but none found")


def replay_witness(curve: DiagonalCurve, res: QqResult) -> bool:
    """Re-derive a verdict from its evidence."""
    q = res.q
    if not res.solvable:
        again = solvable_qq(q, curve, witness=False)
        return not again.solvable
    if res.point is None or res.coord is None:
        return solvable_qq(q, curve, witness=False).solvable
    pt = res.point
    i = res.coord
    if pt[i] == 0:
        return False
    d = curve.partial(pt, i)
    if d == 0:
        return False
    s = valuation(d, q)
    if s != res.deriv_val:
        return False
    f = curve.evaluate(pt)
    return f == 0 or valuation(f, q) >= 2 * s + 1


# --------------------------------------------------------------------------
# residue classes of ell


def solvable_classes(p: int, c: int, q: int) -> set[Residue]:
    """Unit classes t such that x^p + t*y^p + c*z^p = 0 is Q_q-solvable.

    The modulus is p^2 when q = p (classes t = 1 mod p left out), else q.
    """
    if q != p and c % q != 0:
        from .exceptional import is_exceptional

        if not is_exceptional(q, p)[0]:
            raise LocalError(f"q={q} is neither p, a divisor of c, nor exceptional for p={p}")
    modulus = p * p if q == p else q
    out = set()
    for t in range(1, modulus):
        if t % q == 0:
            continue
        if q == p and t % p == 1:
            continue
        if solvable_qq(q, DiagonalCurve(p, 1, t, c), witness=False).solvable:
            out.add(Residue(t, modulus))
    return out


def mandatory_primes(p: int, ell: int, c: int, exceptionals: Iterable[int]) -> list[int]:
    out = [p]
    for q in prime_divisors(c):
        if q not in out:
            out.append(q)
    if ell not in out:
        out.append(ell)
    for q in exceptionals:
        if q not in out:
            out.append(q)
    return out


def obstruction_report(p: int, ell: int, c: int, exceptionals: Iterable[int], witness: bool = True) -> LocalReport:
    """Q_q checks for the curve x^p + ell*y^p + c*z^p at every prime that can obstruct."""
    if not is_prime(ell) or c % ell == 0 or ell == p or ell % p == 1:
        raise LocalError("ell outside hunt domain")
    curve = DiagonalCurve(p, 1, ell, c)
    primes = mandatory_primes(p, ell, c, exceptionals)
    witnesses: dict[int, QqResult] = {}
    obstructed = None
    for q in primes:
        res = solvable_qq(q, curve, witness=witness)
        witnesses[q] = res
        if not res.solvable:
            obstructed = q
            break
    return LocalReport(curve, primes, obstructed, witnesses)


def local_report_for_curve(curve: DiagonalCurve, primes: Iterable[int]) -> LocalReport:
    """Like :func:`obstruction_report` but for an arbitrary triple; checks every prime."""
    primes = list(primes)
    witnesses = {q: solvable_qq(q, curve) for q in primes}
    bad = [q for q in primes if not witnesses[q].solvable]
    return LocalReport(curve, primes, bad[0] if bad else None, witnesses)
