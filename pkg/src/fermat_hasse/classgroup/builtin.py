"""Class groups of pure fields from relations over a Minkowski factor base.

Prime ideals of norm up to the Minkowski bound generate Cl_K.  Each
factor-base prime above a small "core" is expressed through smaller primes by
one element of small T2-norm, so every further smooth element becomes a
relation on the core alone.  Relations that vanish on the core are units.
The result is accepted only when h*R agrees with a truncated Euler product
for the residue of zeta_K at s = 1; since the relation lattice can only be
too small, agreement within a factor < 2 pins both h and R.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import mpmath
import numpy as np

from .. import polymod
from ..arith import is_prime, primes_up_to, valuation
from ..field import elt_mul, elt_norm, factor_shape, field_data, hnf_columns
from .lattice import fincke_pohst, gram_float, lll_reduce, smith_mod_det, xgcd
from .types import BackendFailure

log = logging.getLogger(__name__)

DPS = 60
EULER_BOUND = 2 * 10**6
ACCEPT_RATIO = 1.5
CORE_NORM = 30
MAX_FACTOR_BASE = 4000


def _inverse(W):
    n = len(W)
    M = [[Fraction(W[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def _poly_xgcd(a, b, ell):
    """(s, t) with s*a + t*b = 1 over F_ell, for coprime a, b."""
    r0, r1 = polymod.norm(a, ell), polymod.norm(b, ell)
    s0, s1, t0, t1 = (1,), (), (), (1,)
    while r1:
        q, r = polymod.divmod_(r0, r1, ell)
        r0, r1 = r1, r
        s0, s1 = s1, polymod.sub(s0, polymod.mul(q, s1, ell), ell)
        t0, t1 = t1, polymod.sub(t0, polymod.mul(q, t1, ell), ell)
    if len(r0) != 1:
        raise ValueError("polynomials are not coprime")
    inv = pow(r0[0], -1, ell)
    return polymod.scale(s0, inv, ell), polymod.scale(t0, inv, ell)


def _zmul(f, g):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return out


def _zrem_monic(f, g, mod):
    """f mod g over Z/mod for monic g."""
    r = [v % mod for v in f]
    dg = len(g) - 1
    for i in range(len(r) - 1, dg - 1, -1):
        k = r[i]
        if k:
            for j in range(dg + 1):
                r[i - dg + j] = (r[i - dg + j] - k * g[j]) % mod
    return r[:dg]


def hensel_lift(F, g, ell: int, K: int):
    """Monic G over Z/ell^K with G = g mod ell and G | F (F monic, separable mod ell)."""
    g = polymod.monic(polymod.norm(g, ell), ell)
    h = polymod.divmod_(polymod.norm(F, ell), g, ell)[0]
    _, t = _poly_xgcd(g, h, ell)
    G, H = list(g), list(h)
    pk = ell
    for _ in range(1, K):
        prod_ = _zmul(G, H)
        diff = [(F[i] if i < len(F) else 0) - (prod_[i] if i < len(prod_) else 0) for i in range(max(len(F), len(prod_)))]
        if any(v % pk for v in diff):
            raise AssertionError("Hensel invariant broken")
        e = polymod.norm([v // pk for v in diff], ell)
        dG = polymod.rem(polymod.mul(t, e, ell), g, ell)
        dH = polymod.divmod_(polymod.sub(e, polymod.mul(dG, h, ell), ell), g, ell)[0]
        G = [a + pk * (dG[i] if i < len(dG) else 0) for i, a in enumerate(G)]
        H = [a + pk * (dH[i] if i < len(dH) else 0) for i, a in enumerate(H)]
        pk *= ell
    return tuple(v % pk for v in G), pk


@dataclass
class LocalPrime:
    ell: int
    e: int
    f: int
    gen: tuple  # second generator, O_K coordinates
    kind: str  # single | hensel | index
    factor: tuple | None = None  # irreducible factor mod ell (hensel)
    sympy_prime: object = None
    fb: int = -1
    hnf: tuple | None = None

    @property
    def norm(self) -> int:
        return self.ell**self.f


class _Echelon:
    """Upper-triangular integer basis of the core relation lattice, each row tagged with a log vector."""

    def __init__(self, k: int):
        self.k = k
        self.rows: list = [None] * k

    def insert(self, w, lam):
        """Add a relation; returns the leftover log vector when it reduces to zero on the core."""
        w = list(w)
        lam = list(lam)
        for i in range(self.k):
            if w[i] == 0:
                continue
            piv = self.rows[i]
            if piv is None:
                if w[i] < 0:
                    w = [-x for x in w]
                    lam = [-x for x in lam]
                self.rows[i] = (w, lam)
                return None
            pw, pl = piv
            a, b = pw[i], w[i]
            if b % a == 0:
                q = b // a
                w = [x - q * y for x, y in zip(w, pw)]
                lam = [x - q * y for x, y in zip(lam, pl)]
                continue
            g, s, t = xgcd(a, b)
            new_w = [s * x + t * y for x, y in zip(pw, w)]
            new_l = [s * x + t * y for x, y in zip(pl, lam)]
            ag, bg = a // g, b // g
            w = [ag * y - bg * x for x, y in zip(pw, w)]
            lam = [ag * y - bg * x for x, y in zip(pl, lam)]
            self.rows[i] = (new_w, new_l)
        return lam

    def full_rank(self) -> bool:
        return all(r is not None for r in self.rows)

    def matrix(self):
        return [list(r[0]) for r in self.rows]

    def solve(self, w):
        """Integer k with w = sum k_i row_i, or None if w is not in the lattice."""
        w = list(w)
        coeffs = [0] * self.k
        for i in range(self.k):
            if w[i] == 0:
                continue
            pw = self.rows[i][0]
            if w[i] % pw[i]:
                return None
            q = w[i] // pw[i]
            coeffs[i] = q
            w = [x - q * y for x, y in zip(w, pw)]
        return coeffs if not any(w) else None


class _UnitLattice:
    """Z-span of unit log vectors (complex places, weight 2), grown by rational recovery."""

    def __init__(self, rank: int, ctx):
        self.rank = rank
        self.ctx = ctx
        self.basis: list = []
        self.rejected = 0

    def _coords(self, v):
        mp = self.ctx
        k = len(self.basis)
        G = mp.matrix(k, k)
        rhs = mp.matrix(k, 1)
        for i in range(k):
            for j in range(k):
                G[i, j] = mp.fsum(a * b for a, b in zip(self.basis[i], self.basis[j]))
            rhs[i] = mp.fsum(a * b for a, b in zip(self.basis[i], v))
        x = mp.lu_solve(G, rhs)
        resid = [v[t] - mp.fsum(x[i] * self.basis[i][t] for i in range(k)) for t in range(len(v))]
        return [x[i] for i in range(k)], mp.sqrt(mp.fsum(r * r for r in resid))

    def insert(self, v) -> bool:
        mp = self.ctx
        size = mp.sqrt(mp.fsum(x * x for x in v))
        tol = mp.mpf(10) ** (-(mp.dps // 2))
        if size < tol:
            return False
        if not self.basis:
            self.basis.append(list(v))
            return True
        x, resid = self._coords(v)
        if resid > tol * (1 + size):
            if len(self.basis) >= self.rank:
                self.rejected += 1
                return False
            self.basis.append(list(v))
            self._lll()
            return True
        fr = []
        for xi in x:
            f = Fraction(int(mp.nint(xi * 2**200)), 2**200).limit_denominator(10**9)
            if abs(xi - mp.mpf(f.numerator) / f.denominator) > tol * (1 + abs(xi)):
                self.rejected += 1
                return False
            fr.append(f)
        if all(f.denominator == 1 for f in fr):
            return False
        L = lcm(*(f.denominator for f in fr))
        k = len(self.basis)
        gens = [[L if i == j else 0 for i in range(k)] for j in range(k)]
        gens.append([int(f * L) for f in fr])
        H = hnf_columns(gens, k)
        new = []
        for j in range(k):
            new.append([mp.fsum(mp.mpf(H[i][j]) * self.basis[i][t] for i in range(k)) / L for t in range(len(v))])
        self.basis = new
        self._lll()
        return True

    def _lll(self):
        mp = self.ctx
        k = len(self.basis)
        if k < 2:
            return
        scale = mp.mpf(2) ** 120
        ints = [[int(mp.nint(x * scale)) for x in b] for b in self.basis]
        tags = [[int(i == j) for j in range(k)] for i in range(k)]
        _, T = lll_reduce(ints, tags)
        self.basis = [[mp.fsum(T[r][i] * self.basis[i][t] for i in range(k)) for t in range(len(self.basis[0]))] for r in range(k)]

    def regulator(self):
        mp = self.ctx
        if len(self.basis) < self.rank:
            return None
        if self.rank == 0:
            return mp.mpf(1)
        return abs(mp.det(mp.matrix(self.basis)))

    def reduce(self, v):
        """v minus the nearest lattice vector (Babai rounding in the current basis)."""
        if not self.basis:
            return list(v)
        x, _ = self._coords(v)
        out = list(v)
        for xi, b in zip(x, self.basis):
            k = int(self.ctx.nint(xi))
            out = [a - k * c for a, c in zip(out, b)]
        return out


class PureOrder:
    """O_K for K = Q(c^(1/p)) with embeddings, prime decomposition and valuations."""

    def __init__(self, p: int, c: int):
        from sympy import Poly, symbols
        from sympy.polys.numberfields.basis import round_two

        self.p = self.n = p
        self.c = c
        self.fld = field_data(p, c)
        x = symbols("x")
        self.T = Poly(x**p - c, x)
        self.ZK, dK = round_two(self.T)
        self.disc = int(dK)
        M = self.ZK.matrix.to_Matrix()
        self.W = [[int(M[i, j]) for j in range(p)] for i in range(p)]
        self.D = int(self.ZK.denom)
        self.trivial = self.D == 1 and all(self.W[i][j] == int(i == j) for i in range(p) for j in range(p))
        self.Winv = _inverse(self.W)
        self.index = math.isqrt(abs(self.fld.poly_disc // self.disc))
        self.r2 = (p - 1) // 2
        self.ctx = mpmath.MPContext()
        self.ctx.dps = DPS
        mp = self.ctx
        rho = mp.root(mp.mpf(c), p)
        self.places = [rho * mp.expjpi(mp.mpf(2 * k) / p) for k in range(self.r2 + 1)]
        self.place_pows = [[z**i for i in range(p)] for z in self.places]
        emb = np.zeros((p, p))
        rho_f = float(rho)
        for i in range(p):
            emb[0, i] = rho_f**i
            for k in range(1, self.r2 + 1):
                z = complex(self.places[k]) ** i
                emb[2 * k - 1, i] = math.sqrt(2) * z.real
                emb[2 * k, i] = math.sqrt(2) * z.imag
        self.emb_f = emb
        self._local: dict[int, list[LocalPrime]] = {}
        self._lifts: dict = {}

    # element arithmetic in O_K coordinates
    def to_power(self, x):
        if self.trivial:
            return list(x)
        return [sum(self.W[i][j] * x[j] for j in range(self.n)) for i in range(self.n)]

    def from_power(self, pw, den: int = 1):
        if self.trivial and den == 1:
            return tuple(int(v) for v in pw) + (0,) * (self.n - len(pw))
        pw = list(pw) + [0] * (self.n - len(pw))
        out = []
        for i in range(self.n):
            v = sum(self.Winv[i][j] * pw[j] for j in range(self.n)) * self.D / den
            if v.denominator != 1:
                raise ValueError("element is not integral")
            out.append(int(v))
        return tuple(out)

    def power_coords(self, x):
        """Power-basis coordinates as exact rationals (ints when integral)."""
        pw = self.to_power(x)
        out = [Fraction(v, self.D) for v in pw]
        return [int(v) if v.denominator == 1 else v for v in out]

    def mul(self, x, y):
        if self.trivial:
            return tuple(elt_mul(x, y, self.p, self.c))
        return self.from_power(elt_mul(self.to_power(x), self.to_power(y), self.p, self.c), self.D * self.D)

    def unit_vec(self, j):
        return tuple(int(i == j) for i in range(self.n))

    def norm(self, x) -> int:
        v = elt_norm(self.to_power(x), self.p, self.c)
        den = self.D**self.n
        if v % den:
            raise AssertionError("norm of an integral element is not an integer")
        return v // den

    def embed(self, x, weights=None):
        if weights is None:
            return self.emb_f @ np.array(self.to_power(x), dtype=float) / self.D
        mp = self.ctx
        pw = self.to_power(x)
        out = []
        for k, pows in enumerate(self.place_pows):
            z = mp.fsum(a * b for a, b in zip(pw, pows)) / self.D * weights[k]
            if k == 0:
                out.append(mp.re(z))
            else:
                out.append(mp.sqrt(2) * mp.re(z))
                out.append(mp.sqrt(2) * mp.im(z))
        return out

    def logvec(self, x):
        mp = self.ctx
        pw = self.to_power(x)
        return [mp.log(abs(mp.fsum(a * b for a, b in zip(pw, pows)))) - mp.log(self.D) for pows in self.place_pows]

    # ideals
    def ideal_hnf(self, gens, modulus: int | None = None):
        vecs = []
        for g in gens:
            for j in range(self.n):
                vecs.append(self.mul(g, self.unit_vec(j)))
        return hnf_columns(vecs, self.n, modulus)

    @staticmethod
    def columns(hnf):
        n = len(hnf)
        return [tuple(hnf[i][j] for i in range(n)) for j in range(n)]

    @staticmethod
    def hnf_norm(hnf) -> int:
        return math.prod(hnf[i][i] for i in range(len(hnf)))

    def ideal_mul(self, A, B):
        gens = [self.mul(a, b) for a in self.columns(A) for b in self.columns(B)]
        vecs = [g for g in gens]
        return hnf_columns(vecs, self.n, self.hnf_norm(A) * self.hnf_norm(B))

    def zk_ideal_from_power(self, power_columns):
        """Extend an ideal of Z[theta] given by power-basis generators to O_K."""
        gens = [self.from_power(col) for col in power_columns]
        return self.ideal_hnf(gens)

    def short_elements(self, hnf, factor: float, weights=None, limit: int = 2000):
        """Elements of the ideal with (weighted) T2 below factor * (shortest basis norm), or below factor when weighted."""
        cols = self.columns(hnf)
        mp = self.ctx
        # covolume of the (weighted) T2 embedding: sqrt|d| N(I) w_0 prod w_k^2
        logcov = 0.5 * math.log(abs(self.disc)) + math.log(self.hnf_norm(hnf))
        if weights is not None:
            logcov += float(mp.log(weights[0]) + 2 * mp.fsum(mp.log(w) for w in weights[1:]))
        unit = math.exp(logcov / self.n)
        big = max(abs(v) for col in cols for v in col) > 2**30
        if weights is None and not big:
            scale = 2.0**55 / unit
            ints = [[int(round(float(v) * scale)) for v in self.embed(x)] for x in cols]
        else:
            w = weights or [mp.mpf(1)] * (self.r2 + 1)
            scale = mp.mpf(2) ** 55 / mp.mpf(unit)
            ints = [[int(mp.nint(v * scale)) for v in self.embed(x, w)] for x in cols]
        _, red = lll_reduce(ints, [list(x) for x in cols])
        E = [[float(v) for v in self.embed(tuple(r), weights)] for r in red]
        G = gram_float(E)
        base = min(G[i][i] for i in range(self.n))
        for coeffs, val in fincke_pohst(G, factor * base if weights is None else factor, limit):
            x = tuple(sum(coeffs[i] * red[i][j] for i in range(self.n)) for j in range(self.n))
            yield x, val

    # primes
    def local(self, ell: int) -> list[LocalPrime]:
        if ell in self._local:
            return self._local[ell]
        p, c, n = self.p, self.c, self.n
        out = []
        if self.index % ell == 0:
            from sympy.polys.numberfields.primes import prime_decomp

            for P in prime_decomp(ell, self.T, dK=self.disc, ZK=self.ZK):
                a = P.alpha
                gen = self.from_power([int(v) for v in a.coeffs], int(a.denom))
                if not any(gen):
                    gen = self.from_power([ell])
                out.append(LocalPrime(ell, P.e, P.f, gen, "index", sympy_prime=P))
        elif c % ell == 0:
            out.append(LocalPrime(ell, p, 1, self.from_power([0, 1]), "single"))
        elif ell == p:
            out.append(LocalPrime(ell, p, 1, self.from_power([-c, 1]), "single"))
        else:
            F = self.fld.defining_poly(ell)
            facs = polymod.factor(F, ell)
            if len(facs) == 1:
                out.append(LocalPrime(ell, 1, p, self.from_power([ell]), "single"))
            else:
                for g, m in facs:
                    assert m == 1
                    out.append(LocalPrime(ell, 1, len(g) - 1, self.from_power(list(g)), "hensel", factor=g))
        for lp in out:
            lp.hnf = self.ideal_hnf([self.from_power([ell]), lp.gen], lp.norm)
        self._local[ell] = out
        return out

    def _lift(self, lp: LocalPrime):
        key = (lp.ell, lp.factor)
        if key not in self._lifts:
            K = max(8, int(450 / math.log2(lp.ell)) + 2)
            F = [-self.c] + [0] * (self.p - 1) + [1]
            self._lifts[key] = hensel_lift(F, lp.factor, lp.ell, K) + (K,)
        return self._lifts[key]

    def valuations_above(self, ell: int, x, vN: int):
        """[(LocalPrime, v)] for the primes above ell, given v_ell(N(x)) = vN."""
        lps = self.local(ell)
        if len(lps) == 1:
            lp = lps[0]
            if vN % lp.f:
                raise AssertionError("norm valuation not divisible by residue degree")
            return [(lp, vN // lp.f)]
        if lps[0].kind == "index":
            from sympy.polys.numberfields.modules import to_col

            pw = self.to_power(x)
            el = self.ZK.parent(to_col(pw), denom=self.D)
            I = self.ZK * el
            out = [(lp, int(lp.sympy_prime.valuation(I))) for lp in lps]
        else:
            pw = self.to_power(x)
            out = []
            for lp in lps:
                G, mod, K = self._lift(lp)
                if vN >= K:
                    raise BackendFailure("valuation exceeds Hensel precision")
                dinv = pow(self.D, -1, mod)
                r = _zrem_monic([v * dinv for v in pw], list(G), mod)
                v = min((valuation(a, lp.ell) if a else K) for a in r) if r else K
                out.append((lp, v))
        if sum(lp.f * v for lp, v in out) != vN:
            raise AssertionError("local valuations do not add up to the norm valuation")
        return out


class BuiltinClassGroup:
    """Relation-based class group of a pure field; see the module docstring."""

    def __init__(self, p: int, c: int, seed: int = 1, euler_bound: int = EULER_BOUND, time_budget: float = 600.0):
        t0 = time.time()
        self.O = O = PureOrder(p, c)
        self.p, self.c, self.n = p, c, p
        self.rng = random.Random(seed)
        self.time_budget = time_budget
        self.t0 = t0
        mp = O.ctx
        self.minkowski = math.factorial(p) / p**p * (4 / math.pi) ** O.r2 * math.sqrt(abs(O.disc))
        self.bound = int(self.minkowski)
        self.fb: list[LocalPrime] = []
        self.fb_ells = [ell for ell in primes_up_to(max(self.bound, 2))]
        for ell in self.fb_ells:
            for lp in O.local(ell):
                if lp.norm <= self.bound:
                    self.fb.append(lp)
            if len(self.fb) > MAX_FACTOR_BASE:
                raise BackendFailure("builtin factor base too large for this field")
        self.fb.sort(key=lambda lp: (lp.norm, lp.ell, lp.gen))
        for i, lp in enumerate(self.fb):
            lp.fb = i
        self.zero = [mp.mpf(0)] * (O.r2 + 1)
        self._build()
        self.hR_estimate = self._euler_hR(euler_bound)
        self.ratio = float(self.h_upper * self.regulator / self.hR_estimate) if self.regulator else float("inf")
        self.certified = self.regulator is not None and 1 / ACCEPT_RATIO < self.ratio < ACCEPT_RATIO
        self.elapsed = time.time() - t0
        log.info("builtin (%d,%d): fb=%d core=%d h'=%d R'=%s ratio=%.4f in %.1fs", p, c, len(self.fb), self.ncore,
                 self.h_upper, mpmath.nstr(self.regulator, 12) if self.regulator else None, self.ratio, self.elapsed)

    # ---------------------------------------------------------------- relations
    def smooth_valuations(self, x, skip_ell: int | None = None):
        """{fb index: v} if (x) factors over the factor base (after removing one factor of skip_ell)."""
        N = abs(self.O.norm(x))
        if N == 0:
            return None
        if skip_ell is not None:
            if valuation(N, skip_ell) != 1:
                return None
            N //= skip_ell
        vals = {}
        for ell in self.fb_ells:
            if N == 1:
                break
            if N % ell:
                continue
            v = 0
            while N % ell == 0:
                N //= ell
                v += 1
            for lp, k in self.O.valuations_above(ell, x, v):
                if k:
                    if lp.fb < 0:
                        return None
                    vals[lp.fb] = k
        if N != 1:
            return None
        return vals

    def short_elements(self, hnf, factor: float, weights=None, limit: int = 2000):
        return self.O.short_elements(hnf, factor, weights, limit)

    def _expired(self) -> bool:
        return time.time() - self.t0 > self.time_budget

    def _build(self):
        O = self.O
        fb = self.fb
        k = len(fb)
        core_of: dict[int, int] = {}
        cv: list = [None] * k  # sparse dict core -> coeff
        L: list = [None] * k
        extra: dict = {}

        def log_minus(x, vals, exclude=None):
            lam = O.logvec(x)
            for j, v in vals.items():
                if j != exclude and L[j] is not None:
                    lam = [a - v * b for a, b in zip(lam, L[j])]
            return lam

        for P in fb:
            i = P.fb
            found = None
            if P.norm > CORE_NORM:
                for factor in (2.0, 6.0, 20.0):
                    for x, _ in self.short_elements(P.hnf, factor, limit=400):
                        vals = self.smooth_valuations(x)
                        if vals is None:
                            continue
                        extra[x] = vals
                        if vals.get(i) == 1 and all(j < i for j in vals if j != i):
                            found = (x, vals)
                            break
                    if found:
                        break
            if found is None:
                core_of[i] = len(core_of)
                cv[i] = {core_of[i]: 1}
                L[i] = list(self.zero)
            else:
                x, vals = found
                vec: dict = {}
                for j, v in vals.items():
                    if j == i:
                        continue
                    for cidx, a in cv[j].items():
                        vec[cidx] = vec.get(cidx, 0) - v * a
                cv[i] = {a: b for a, b in vec.items() if b}
                L[i] = log_minus(x, vals, exclude=i)
                extra.pop(x, None)
        self.ncore = len(core_of)
        self.core_of = core_of
        self.cv = cv
        self.L = L
        self.echelon = _Echelon(self.ncore)
        self.units = _UnitLattice(O.r2, O.ctx)
        self.relations_used = 0

        for x, vals in extra.items():
            self._add_relation(x, vals)
        # elements of O_K of small norm
        unit_hnf = tuple(tuple(int(i == j) for j in range(self.n)) for i in range(self.n))
        for x, _ in self.short_elements(unit_hnf, 30.0, limit=3000):
            vals = self.smooth_valuations(x)
            if vals is not None:
                self._add_relation(x, vals)
        rounds = 0
        core_primes = [fb[i] for i in core_of]
        while rounds < 400:
            rounds += 1
            if self.echelon.full_rank() and self.units.regulator() is not None and rounds > 3:
                if self._current_ratio_ok():
                    break
            if self._expired():
                break
            # random products of core primes and one random factor-base prime
            I = fb[self.rng.randrange(k)].hnf
            for _ in range(self.rng.randint(1, 3)):
                I = O.ideal_mul(I, self.rng.choice(core_primes).hnf)
            for x, _ in self.short_elements(I, 8.0, limit=60):
                vals = self.smooth_valuations(x)
                if vals is not None:
                    self._add_relation(x, vals)
        self._finish()

    def _add_relation(self, x, vals):
        w = [0] * self.ncore
        lam = self.O.logvec(x)
        for j, v in vals.items():
            for cidx, a in self.cv[j].items():
                w[cidx] += v * a
            lam = [a - v * b for a, b in zip(lam, self.L[j])]
        left = self.echelon.insert(w, lam)
        self.relations_used += 1
        if left is not None:
            self.units.insert([2 * t for t in left[1:]])

    def _current_ratio_ok(self) -> bool:
        if not hasattr(self, "_hR_quick"):
            self._hR_quick = self._euler_hR(10**5)
        h = math.prod(self.echelon.rows[i][0][i] for i in range(self.ncore))
        R = self.units.regulator()
        return float(h * R / self._hR_quick) < 1.3

    def _finish(self):
        if not self.echelon.full_rank():
            raise BackendFailure("builtin relation search did not reach full rank")
        H = self.echelon.matrix()
        self.h_upper = math.prod(H[i][i] for i in range(self.ncore))
        diag, V = smith_mod_det(H, self.h_upper)
        self.snf = diag
        self.V = V
        self.invariants = tuple(sorted(d for d in diag if d != 1))
        self.regulator = self.units.regulator()

    def _euler_hR(self, X: int):
        """Truncated Euler product for Res_{s=1} zeta_K, converted to an estimate of h*R."""
        O = self.O
        s = 0.0
        for ell in primes_up_to(X):
            if self.c % ell == 0 or ell == self.p:
                shape = [(lp.f, lp.e) for lp in O.local(ell)]
            else:
                shape = factor_shape(ell, O.fld)
            s += math.log1p(-1.0 / ell)
            for f, _e in shape:
                s -= math.log1p(-(float(ell) ** -f))
        res = math.exp(s)
        r1, r2 = 1, O.r2
        w = 2
        return res * w * math.sqrt(abs(O.disc)) / (2**r1 * (2 * math.pi) ** r2)

    # ---------------------------------------------------------------- queries
    def class_vector(self, w):
        dense = [0] * self.ncore
        for i, a in w.items():
            dense[i] += a
        img = [sum(dense[i] * self.V[i][j] for i in range(self.ncore)) for j in range(self.ncore)]
        return tuple(img[j] % self.snf[j] if self.snf[j] else img[j] for j in range(self.ncore) if self.snf[j] != 1)

    def order_of(self, vec) -> int:
        ds = [d for d in self.snf if d != 1]
        out = 1
        for a, d in zip(vec, ds):
            out = lcm(out, d // gcd(a, d))
        return out

    def _find_prime(self, ell: int, gen_hnf):
        for lp in self.O.local(ell):
            if lp.hnf == gen_hnf:
                return lp
        return None

    def prime_data(self, ell: int, root: int):
        """(core vector, log vector) for the degree-1 prime (ell, theta - root)."""
        O = self.O
        key = (ell, root % ell)
        cache = self.__dict__.setdefault("_prime_cache", {})
        if key in cache:
            return cache[key]
        gen = O.from_power([-root, 1])
        hnf = O.ideal_hnf([O.from_power([ell]), gen], ell)
        if O.hnf_norm(hnf) != ell:
            raise ValueError("not a degree-1 prime ideal")
        lp = self._find_prime(ell, hnf) if ell <= self.bound else None
        if lp is not None and lp.fb >= 0:
            out = (dict(self.cv[lp.fb]), list(self.L[lp.fb]))
            cache[key] = out
            return out
        for factor in (2.0, 6.0, 20.0, 60.0):
            for x, _ in self.short_elements(hnf, factor, limit=800):
                vals = self.smooth_valuations(x, skip_ell=ell)
                if vals is None:
                    continue
                vec: dict = {}
                lam = O.logvec(x)
                for j, v in vals.items():
                    for cidx, a in self.cv[j].items():
                        vec[cidx] = vec.get(cidx, 0) - v * a
                    lam = [a - v * b for a, b in zip(lam, self.L[j])]
                out = ({a: b for a, b in vec.items() if b}, lam)
                cache[key] = out
                return out
        raise BackendFailure(f"no smooth element found in the prime above {ell}")

    def ideal_class(self, factors):
        """Class vector, core vector and log vector of a product of degree-1 primes."""
        w: dict = {}
        lam = list(self.zero)
        for (ell, root), e in factors:
            cvq, Lq = self.prime_data(ell, root)
            for i, a in cvq.items():
                w[i] = w.get(i, 0) + e * a
            lam = [a + e * b for a, b in zip(lam, Lq)]
        return self.class_vector(w), w, lam

    def generator_from_logs(self, hnf, lam):
        """Search I for an element whose embedding sizes match a known generator log vector."""
        O = self.O
        mp = O.ctx
        nI = O.hnf_norm(hnf)
        target = mp.log(nI) / self.n
        u = [2 * (t - target) for t in lam[1:]]
        red = self.units.reduce(u)
        mu = [target + t / 2 for t in red]
        mu0 = mp.log(nI) - 2 * mp.fsum(mu)
        logs = [mu0] + mu
        weights = [mp.exp(-t) for t in logs]
        for factor in (self.n * 1.0001 + 1e-6, self.n * 1.5, self.n * 4):
            for x, _ in self.short_elements(hnf, factor, weights=weights, limit=200):
                if abs(O.norm(x)) == nI:
                    return x
        return None

    def is_principal(self, hnf, factors):
        """(principal, generator in O_K coordinates, class order)."""
        vec, w, lam = self.ideal_class(factors)
        order = self.order_of(vec)
        if order > 1:
            return False, None, order
        dense = [0] * self.ncore
        for i, a in w.items():
            dense[i] = a
        k = self.echelon.solve(dense)
        if k is None:
            raise AssertionError("class vector vanishes but the core vector is not a relation")
        mu = list(lam)
        for ki, row in zip(k, self.echelon.rows):
            if ki:
                mu = [a + ki * b for a, b in zip(mu, row[1])]
        return True, self.generator_from_logs(hnf, mu), 1


def plain_search(O: PureOrder, hnf, bound_factors=(2.0, 8.0, 32.0)):
    """Principality by unweighted enumeration only: (generator or None, last bound factor)."""
    nI = O.hnf_norm(hnf)
    for factor in bound_factors:
        for x, _ in O.short_elements(hnf, factor, limit=5000):
            if abs(O.norm(x)) == nI:
                return x, factor
    return None, bound_factors[-1]


_INSTANCES: dict = {}


def builtin_group(p: int, c: int) -> BuiltinClassGroup:
    key = (p, c)
    if key not in _INSTANCES:
        _INSTANCES[key] = BuiltinClassGroup(p, c)
    return _INSTANCES[key]
