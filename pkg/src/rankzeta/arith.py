"""Integer and quadratic-character arithmetic.

Prime sieving (plain and segmented), the Kronecker symbol and fundamental
discriminants.  Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import DomainError, ResourceError

#: Upper bound on the bytes a single sieve result may occupy.
MEMORY_BUDGET = 1 << 30

#: Default number of integers per segment of the segmented sieve.
DEFAULT_SEGMENT = 1 << 20


@dataclass(frozen=True)
class PrimeTable:
    """Ascending primes ``p`` with ``lower < p <= limit``."""

    limit: int
    primes: np.ndarray = field(repr=False)
    lower: int = 0

    def __post_init__(self):
        self.primes.setflags(write=False)

    def __len__(self):
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes.tolist())

    def __contains__(self, n):
        i = np.searchsorted(self.primes, n)
        return i < len(self.primes) and self.primes[i] == n


def _simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    # odd-only: index i stands for 2*i + 1
    size = (limit - 1) // 2 + 1
    is_odd_prime = np.ones(size, dtype=bool)
    is_odd_prime[0] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if is_odd_prime[i]:
            p = 2 * i + 1
            is_odd_prime[p * p // 2::p] = False
    odd = 2 * np.flatnonzero(is_odd_prime).astype(np.int64) + 1
    return np.concatenate(([2], odd))


def _segmented_sieve(lower: int, limit: int, segment: int) -> np.ndarray:
    """Primes in ``(lower, limit]`` sieved one segment at a time."""
    base = _simple_sieve(math.isqrt(limit))
    chunks = []
    lo = lower + 1
    while lo <= limit:
        hi = min(lo + segment, limit + 1)  # exclusive
        mask = np.ones(hi - lo, dtype=bool)
        for p in base.tolist():
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            mask[start - lo::p] = False
        if lo <= 1:
            mask[: 2 - lo] = False
        chunks.append(np.flatnonzero(mask).astype(np.int64) + lo)
        lo = hi
    if not chunks:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(chunks)


def sieve_primes(limit: int, lower: int = 0, *, segmented: bool | None = None,
                 segment: int = DEFAULT_SEGMENT) -> PrimeTable:
    """Return all primes ``p`` with ``lower < p <= limit``.

    The plain sieve is used for windows starting at zero; windows at an offset
    (or ``segmented=True``) are sieved in segments of ``segment`` integers so
    memory stays bounded regardless of how large ``limit`` is.
    """
    limit = int(limit)
    lower = int(lower)
    if limit < 2 and lower == 0:
        raise DomainError(f"sieve limit must be >= 2, got {limit}")
    if lower < 0 or lower >= limit:
        raise DomainError(f"empty or invalid window ({lower}, {limit}]")
    span = limit - lower
    expected = span / max(math.log(limit), 1.0) * 1.3 + 16
    if 8 * expected > MEMORY_BUDGET:
        raise ResourceError(
            f"window ({lower}, {limit}] would hold ~{int(expected)} primes, "
            f"over the {MEMORY_BUDGET} byte budget")
    if segmented is None:
        segmented = lower > 0 or limit > 64 * segment
    if segmented:
        primes = _segmented_sieve(lower, limit, segment)
    else:
        primes = _simple_sieve(limit)
        if lower:
            primes = primes[primes > lower]
    return PrimeTable(limit=limit, primes=primes, lower=lower)


def primes_upto(limit: int) -> np.ndarray:
    """Shorthand for ``sieve_primes(limit).primes`` (empty below 2)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    return sieve_primes(limit).primes


def smallest_prime_factors(n: int) -> np.ndarray:
    """``spf[k]`` is the least prime factor of ``k`` (``spf[0] = spf[1] = 0``)."""
    return _spf(int(n))


@numba.njit(cache=True)
def _spf(n):
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, n + 1):
        if spf[i] == 0:
            spf[i] = i
            if i * i <= n:
                for j in range(i * i, n + 1, i):
                    if spf[j] == 0:
                        spf[j] = i
    return spf


# ---------------------------------------------------------------------------
# Kronecker symbol

_TAB2 = (0, 1, 0, -1, 0, -1, 0, 1)


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol ``(d/n)`` for arbitrary-precision integers."""
    a, b = int(d), int(n)
    if b == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and b % 2 == 0:
        return 0
    v = (b & -b).bit_length() - 1
    b >>= v
    k = 1 if v % 2 == 0 else _TAB2[a & 7]
    if b < 0:
        b = -b
        if a < 0:
            k = -k
    while True:
        if a == 0:
            return k if b == 1 else 0
        v = (a & -a).bit_length() - 1
        a >>= v
        if v % 2:
            k *= _TAB2[b & 7]
        if a & b & 2:
            k = -k
        r = abs(a)
        a, b = b % r, r


@numba.njit(cache=True)
def _kronecker64(d, n):
    a = d
    b = n
    if b == 0:
        return 1 if (a == 1 or a == -1) else 0
    if a % 2 == 0 and b % 2 == 0:
        return 0
    v = 0
    while b % 2 == 0:
        b //= 2
        v += 1
    k = 1
    if v % 2 == 1:
        r8 = a & 7
        if r8 == 3 or r8 == 5:
            k = -1
    if b < 0:
        b = -b
        if a < 0:
            k = -k
    while True:
        if a == 0:
            return k if b == 1 else 0
        v = 0
        while a % 2 == 0:
            a //= 2
            v += 1
        if v % 2 == 1:
            r8 = b & 7
            if r8 == 3 or r8 == 5:
                k = -k
        if a & b & 2:
            k = -k
        r = a if a > 0 else -a
        a = b % r
        b = r


@numba.njit(cache=True)
def _kronecker_range(d, m):
    out = np.zeros(m + 1, dtype=np.int8)
    for n in range(1, m + 1):
        out[n] = _kronecker64(d, n)
    return out


def character_values(d: int, m: int) -> np.ndarray:
    """Array ``chi[n] = (d/n)`` for ``0 <= n <= m`` (``chi[0]`` is 0 unless |d| = 1)."""
    if abs(d) >= 1 << 62:
        return np.array([kronecker(d, n) for n in range(m + 1)], dtype=np.int8)
    out = _kronecker_range(np.int64(d), np.int64(m))
    out[0] = 1 if abs(d) == 1 else 0
    return out


# ---------------------------------------------------------------------------
# Fundamental discriminants

def is_squarefree(n: int) -> bool:
    n = abs(int(n))
    if n == 0:
        return False
    if n % 4 == 0:
        return False
    if n % 2 == 0:
        n //= 2
    p = 3
    # after removing primes up to n^(1/3) the cofactor is 1, q, q*r or q^2
    while p * p * p <= n:
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
        p += 2
    r = math.isqrt(n)
    return not (r > 1 and r * r == n)


def is_fundamental_discriminant(d: int) -> bool:
    """True iff ``d`` is the discriminant of a quadratic field (or ``d = 1``)."""
    d = int(d)
    if d == 0:
        raise DomainError("0 is not a discriminant")
    r = d % 4
    if r == 1:
        return is_squarefree(d)
    if r == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def _squarefree_mask(lo: int, hi: int) -> np.ndarray:
    """Boolean mask over ``lo <= n < hi`` (``lo >= 1``) marking squarefree n."""
    mask = np.ones(hi - lo, dtype=bool)
    if hi <= lo:
        return mask
    for p in _simple_sieve(math.isqrt(hi - 1)).tolist():
        q = p * p
        start = -(-lo // q) * q
        mask[start - lo::q] = False
    return mask


def _fundamental_positive(lo: int, hi: int, segment: int) -> np.ndarray:
    """Fundamental discriminants ``d`` with ``lo <= |d| < hi`` in both signs.

    Returns a signed array (unsorted); ``lo >= 1``.
    """
    out = []
    start = lo
    while start < hi:
        stop = min(start + segment, hi)
        n = np.arange(start, stop, dtype=np.int64)
        sqf = _squarefree_mask(start, stop)
        # 4m with m = n // 4: sieve m separately
        mlo, mhi = max(start // 4, 1), (stop - 1) // 4 + 1
        msqf = _squarefree_mask(mlo, mhi)
        m = n // 4
        m_ok = np.zeros(len(n), dtype=bool)
        sel = (n % 4 == 0) & (m >= mlo)
        m_ok[sel] = msqf[m[sel] - mlo]
        # d = +n
        pos = ((n % 4 == 1) & sqf) | ((n % 4 == 0) & np.isin(m % 4, (2, 3)) & m_ok)
        # d = -n: -n = 1 mod 4  <=>  n = 3 mod 4; -n = 4(-m) with -m = 2,3 mod 4 <=> m = 2,1 mod 4
        neg = ((n % 4 == 3) & sqf) | ((n % 4 == 0) & np.isin(m % 4, (1, 2)) & m_ok)
        out.append(n[pos])
        out.append(-n[neg])
        start = stop
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def enumerate_fundamental_discriminants(lo: int, hi: int, sign: str = "both", *,
                                        include_one: bool = False,
                                        segment: int = DEFAULT_SEGMENT) -> np.ndarray:
    """Fundamental discriminants ``d`` with ``lo < d < hi``, ascending.

    ``sign`` is ``"both"``, ``"positive"`` or ``"negative"``.  The trivial
    discriminant ``d = 1`` is left out unless ``include_one`` is set.
    """
    if sign not in ("both", "positive", "negative"):
        raise DomainError(f"unknown sign filter {sign!r}")
    lo, hi = int(lo), int(hi)
    if hi - lo <= 1:
        return np.zeros(0, dtype=np.int64)
    parts = []
    # positive part: |d| in (max(lo,0), hi)
    if sign in ("both", "positive") and hi > 1:
        a, b = max(lo, 0) + 1, hi
        if b > a:
            v = _fundamental_positive(a, b, segment)
            parts.append(v[v > 0])
    if sign in ("both", "negative") and lo < -1:
        a, b = max(-hi, 0) + 1, -lo
        if b > a:
            v = _fundamental_positive(a, b, segment)
            parts.append(v[v < 0])
    res = np.sort(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)
    if not include_one:
        res = res[res != 1]
    return res


def prime_discriminants(lo: int, hi: int) -> np.ndarray:
    """Fundamental discriminants ``d`` with ``|d|`` prime and ``lo < |d| < hi``.

    Every odd prime ``p`` gives exactly one such ``d``, namely ``p`` when
    ``p = 1 (mod 4)`` and ``-p`` otherwise.
    """
    both = np.concatenate([
        enumerate_fundamental_discriminants(lo, hi, "positive"),
        enumerate_fundamental_discriminants(-hi, -lo, "negative"),
    ])
    absd = np.abs(both)
    table = sieve_primes(int(absd.max()), int(absd.min()) - 1) if len(both) else None
    if table is None:
        return both
    keep = np.isin(absd, table.primes)
    return np.sort(both[keep])
