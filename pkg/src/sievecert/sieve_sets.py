"""Exact sifted counts over finite integer intervals.

S(C_d, z) counts m with lo <= m*d <= hi and no prime factor below z. The
counts come from a segmented sieve, so the Buchstab identity can be checked
as an exact integer equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_HI = 10**9
_CHUNK = 10**7


@dataclass(frozen=True)
class SievedInterval:
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if not (isinstance(self.lo, (int, np.integer)) and isinstance(self.hi, (int, np.integer))):
            raise TypeError("interval endpoints must be integers")
        if not 2 <= self.lo <= self.hi <= MAX_HI:
            raise ValueError(f"need 2 <= lo <= hi <= {MAX_HI}, got [{self.lo}, {self.hi}]")


@lru_cache(maxsize=None)
def _small_primes(limit: int) -> np.ndarray:
    """Primes <= limit by the sieve of Eratosthenes."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    out = np.flatnonzero(flags).astype(np.int64)
    out.setflags(write=False)
    return out


def primes_below(limit: int) -> np.ndarray:
    """Primes p < limit."""
    pr = _small_primes(max(1, int(limit)))
    return pr[pr < limit]


def primes_in_range(lo: int, hi: int) -> np.ndarray:
    """Primes in [lo, hi] by a segmented sieve."""
    lo = max(lo, 2)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    base = _small_primes(math.isqrt(hi))
    found = []
    for start in range(lo, hi + 1, _CHUNK):
        stop = min(hi, start + _CHUNK - 1)
        flags = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, -(-start // p) * p)
            if first > stop:
                continue
            flags[first - start :: p] = False
        found.append(np.flatnonzero(flags) + start)
    return np.concatenate(found).astype(np.int64)


def psi(n: int, z: float) -> int:
    """1 if every prime factor of n is >= z, else 0. psi(1, z) = 1."""
    if n < 1:
        raise ValueError("psi needs n >= 1")
    m = int(n)
    p = 2
    while p < z and p * p <= m:
        if m % p == 0:
            return 0
        p += 1 if p == 2 else 2
    # what is left is 1 or a prime
    if m > 1 and m < z and p < z:
        # every factor up to sqrt(m) was tested, so m itself is a prime < z
        return 0
    return 1


def sifted_count(c: SievedInterval, d: int, z: float) -> int:
    """#{m : lo <= m*d <= hi, psi(m, z) = 1}."""
    if d < 1:
        raise ValueError("d must be >= 1")
    m_lo = -(-c.lo // d)
    m_hi = c.hi // d
    if m_lo > m_hi:
        return 0
    root = math.isqrt(m_hi)
    strike = primes_below(min(z, root + 1))
    # beyond sqrt(m_hi) an unstruck m > 1 is prime; drop those below z as well
    drop_primes_below = z if z > root + 1 else None
    total = 0
    for start in range(m_lo, m_hi + 1, _CHUNK):
        stop = min(m_hi, start + _CHUNK - 1)
        keep = np.ones(stop - start + 1, dtype=bool)
        for p in strike:
            p = int(p)
            first = -(-start // p) * p
            if first <= stop:
                keep[first - start :: p] = False
        if drop_primes_below is not None:
            upper = min(stop, math.ceil(drop_primes_below) - 1)
            lower = max(start, 2)
            if upper >= lower:
                keep[lower - start : upper - start + 1] = False
        total += int(keep.sum())
    return total


def buchstab_identity_check(c: SievedInterval, d: int, z1: float, z2: float) -> bool:
    """Check S(C_d, z2) = S(C_d, z1) - sum_{z1 <= p < z2} S(C_{dp}, p) exactly."""
    if not 2 <= z1 < z2:
        raise ValueError("need 2 <= z1 < z2")
    lhs = sifted_count(c, d, z2)
    p_lo = math.ceil(z1)
    p_hi = min(math.ceil(z2) - 1, c.hi // d)
    rhs = sifted_count(c, d, z1)
    for p in primes_in_range(p_lo, p_hi):
        p = int(p)
        if p >= z2:
            continue
        rhs -= sifted_count(c, d * p, p)
    return lhs == rhs


def legendre_count(c: SievedInterval, d: int, z: float) -> int:
    """S(C_d, z) by inclusion-exclusion over squarefree products of primes < z."""
    primes = [int(p) for p in primes_below(z)]
    hi, lo_minus = c.hi // d, (c.lo - 1) // d
    total = 0
    stack = [(0, 1, 1)]
    while stack:
        start, prod, sign = stack.pop()
        total += sign * (hi // prod - lo_minus // prod)
        for i in range(start, len(primes)):
            nxt = prod * primes[i]
            if nxt > hi:
                break
            stack.append((i + 1, nxt, -sign))
    return total
