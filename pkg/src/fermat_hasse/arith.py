"""Integer, modular and exact-rational primitives.

Densities everywhere in the package are :class:`fractions.Fraction` values;
``ExactRational`` is an alias kept for readability at call sites.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

ExactRational = Fraction

# Miller-Rabin bases that are deterministic for n < 3.3 * 10**24.
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_DETERMINISTIC_LIMIT = 3317044064679887385961981
# Extra pseudo-random rounds above the deterministic range; error < 4**-32.
PROBABILISTIC_ROUNDS = 32
_MR_SEED = 0x5E1_3E2

DEFAULT_SEGMENT = 1 << 20


class ArithmeticError_(ValueError):
    """Precondition failure in an arithmetic primitive."""


@dataclass(frozen=True, order=True)
class Residue:
    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus <= 0:
            raise ValueError("modulus must be positive")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"{self.value} is not reduced modulo {self.modulus}")

    @classmethod
    def of(cls, value: int, modulus: int) -> "Residue":
        return cls(value % modulus, modulus)

    def __int__(self) -> int:
        return self.value


def _miller_rabin(n: int, a: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Primality test, deterministic below 3.3e24 and probabilistic above."""
    if n < 2:
        return False
    for r in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if n % r == 0:
            return n == r
    if n < 43 * 43:
        return True
    if not all(_miller_rabin(n, a) for a in _DETERMINISTIC_BASES):
        return False
    if n < _DETERMINISTIC_LIMIT:
        return True
    rng = random.Random(_MR_SEED ^ n.bit_length())
    return all(_miller_rabin(n, rng.randrange(2, n - 1)) for _ in range(PROBABILISTIC_ROUNDS))


def next_prime(n: int) -> int:
    n = max(n + 1, 2)
    while not is_prime(n):
        n += 1
    return n


def valuation(n: int, q: int) -> int:
    """q-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    n = abs(n)
    while n % q == 0:
        n //= q
        v += 1
    return v


def factorint(n: int, bound: int | None = None) -> dict[int, int]:
    """Trial-division factorization of ``|n|``.

    With ``bound`` set, primes above it are not searched; an unfactored
    cofactor > 1 is returned under its own key (it may be composite).
    """
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor zero")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n and (bound is None or d <= bound):
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_divisors(n: int) -> list[int]:
    return sorted(factorint(n))


def euler_phi(n: int) -> int:
    result = n
    for q in factorint(n):
        result -= result // q
    return result


def primitive_root(q: int) -> int:
    """Smallest primitive root modulo the prime q."""
    if q == 2:
        return 1
    factors = prime_divisors(q - 1)
    g = 2
    while True:
        if all(pow(g, (q - 1) // r, q) != 1 for r in factors):
            return g
        g += 1


def multiplicative_order(a: int, n: int) -> int:
    if math.gcd(a, n) != 1:
        raise ValueError("not a unit")
    order = euler_phi(n)
    for r, e in factorint(order).items():
        for _ in range(e):
            if pow(a, order // r, n) == 1:
                order //= r
            else:
                break
    return order


def is_pth_power_free(c: int, p: int) -> bool:
    return all(e < p for e in factorint(c).values())


def pth_root_mod(c: int, p: int, ell: int) -> Residue:
    """The unique ``a`` mod ell with ``a**p == c`` when p-th powering is bijective.

    Requires ell prime, ell not dividing c, ell != p and ell != 1 (mod p).
    """
    if ell == p or c % ell == 0 or (ell - 1) % p == 0:
        raise ArithmeticError_("root not unique or undefined")
    if ell == 2:
        return Residue(1, 2)
    e = pow(p, -1, ell - 1)
    return Residue(pow(c % ell, e, ell), ell)


def is_pth_power_mod(x: int, p: int, q: int) -> bool:
    """Whether the unit x is a p-th power in F_q (q prime)."""
    x %= q
    if x == 0:
        raise ValueError("zero is not a unit")
    d = math.gcd(p, q - 1)
    return d == 1 or pow(x, (q - 1) // d, q) == 1


def simple_sieve(n: int) -> np.ndarray:
    """All primes <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for r in range(2, math.isqrt(n) + 1):
        if flags[r]:
            flags[r * r :: r] = False
    return np.nonzero(flags)[0].astype(np.int64)


def primes_up_to(n: int) -> list[int]:
    return [int(x) for x in simple_sieve(n)]


def primes_in_progression(
    a: int, modulus: int, lo: int, hi: int, segment: int = DEFAULT_SEGMENT
) -> Iterator[int]:
    """Stream the primes ell in [lo, hi] with ell = a (mod modulus), ascending.

    The sieve runs over the progression index k (ell = a0 + k*modulus) one
    segment of ``segment`` indices at a time.
    """
    if modulus <= 0:
        raise ValueError("modulus must be positive")
    if lo > hi:
        raise ValueError("empty range: lo > hi")
    if math.gcd(a, modulus) != 1:
        raise ArithmeticError_("empty progression beyond finitely many primes")
    a0 = a % modulus
    lo = max(lo, 2)
    if hi < lo:
        return
    k_lo = max(0, -(-(lo - a0) // modulus))
    k_hi = (hi - a0) // modulus
    if k_hi < k_lo:
        return
    base = [int(r) for r in simple_sieve(math.isqrt(hi))]
    sieving = [r for r in base if modulus % r != 0]
    inv = {r: pow(modulus, -1, r) for r in sieving}
    k = k_lo
    while k <= k_hi:
        k_end = min(k + segment, k_hi + 1)
        n_seg = k_end - k
        flags = np.ones(n_seg, dtype=bool)
        for r in sieving:
            # a0 + j*modulus == 0 (mod r)  <=>  j == -a0 * modulus^-1 (mod r)
            j0 = (-a0 * inv[r]) % r
            first = k + ((j0 - k) % r)
            # never strike r itself
            if a0 + first * modulus == r:
                first += r
            if first < k_end:
                flags[first - k :: r] = False
        for idx in np.nonzero(flags)[0]:
            ell = a0 + (k + int(idx)) * modulus
            if ell >= 2:
                yield ell
        k = k_end
