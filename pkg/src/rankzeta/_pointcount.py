"""Compiled kernels for counting points on elliptic curves over F_p.

All kernels work with residues held in int64; primes must stay below 2**31 so
that products of two residues fit.
"""
import numba
import numpy as np

#: Returned by :func:`bsgs_ap` when the group order cannot be pinned down.
AMBIGUOUS = 1 << 40


@numba.njit(cache=True)
def powmod(b, e, p):
    r = 1
    b %= p
    while e > 0:
        if e & 1:
            r = r * b % p
        b = b * b % p
        e >>= 1
    return r


@numba.njit(cache=True)
def invmod(a, p):
    a %= p
    r0, r1 = p, a
    s0, s1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return s0 % p


@numba.njit(cache=True)
def legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if powmod(a, (p - 1) // 2, p) == 1 else -1


@numba.njit(cache=True)
def sqrtmod(a, p):
    """Square root of a quadratic residue ``a`` modulo odd prime ``p``."""
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return powmod(a, (p + 1) // 4, p)
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m = s
    c = powmod(z, q, p)
    t = powmod(a, q, p)
    r = powmod(a, (q + 1) // 2, p)
    while t != 1:
        i = 0
        t2 = t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = c
        for _ in range(m - i - 1):
            b = b * b % p
        m = i
        c = b * b % p
        t = t * c % p
        r = r * b % p
    return r


@numba.njit(cache=True)
def reduced_invariants(a1, a2, a3, a4, a6, p):
    """(c4, c6, disc) of the model, reduced mod p (p < 2**30)."""
    b2 = (a1 * a1 % p + 4 * a2) % p
    b4 = (2 * a4 + a1 * a3 % p) % p
    b6 = (a3 * a3 % p + 4 * a6) % p
    b8 = (a1 * a1 % p * a6 % p + 4 * a2 % p * a6 % p - a1 * a3 % p * a4 % p
          + a2 * a3 % p * a3 % p - a4 * a4 % p) % p
    b22 = b2 * b2 % p
    c4 = (b22 - 24 * b4) % p
    c6 = (-(b22 * b2 % p) + 36 * b2 % p * b4 % p - 216 * b6 % p) % p
    disc = (-(b22 * b8 % p) - 8 * (b4 * b4 % p) % p * b4 % p
            - 27 * (b6 * b6 % p) % p + 9 * (b2 * b4 % p) % p * b6 % p) % p
    return c4, c6, disc


@numba.njit(cache=True)
def count_points_naive(a1, a2, a3, a4, a6, p):
    """Projective points of the (possibly singular) cubic, by double loop."""
    n = 1
    for x in range(p):
        rhs = ((x * x % p + a2 * x) % p * x + a4 * x + a6) % p
        for y in range(p):
            lhs = (y * y + (a1 * x + a3) % p * y) % p
            if lhs == rhs:
                n += 1
    return n


@numba.njit(cache=True)
def _fill_chi(chi, p):
    for i in range(p):
        chi[i] = -1
    chi[0] = 0
    sq = 0
    # (x+1)^2 = x^2 + 2x + 1
    for x in range(1, (p - 1) // 2 + 1):
        sq += 2 * x - 1
        if sq >= p:
            sq -= p
            if sq >= p:
                sq %= p
        chi[sq] = 1


@numba.njit(cache=True)
def _cubic_start(A, B, p, j, k):
    """f(x) = x^3 + Ax + B on x = j, j+k, j+2k: value and first two differences."""
    x1 = j + k
    x2 = j + 2 * k
    g0 = ((j * j % p) * j + A * j + B) % p
    g1 = ((x1 * x1 % p) * x1 + A * x1 + B) % p
    g2 = ((x2 * x2 % p) * x2 + A * x2 + B) % p
    return g0, (g1 - g0) % p, (g2 - 2 * g1 + g0) % p


@numba.njit(cache=True)
def _charsum(A, B, p, chi):
    """-sum_x chi(x^3 + A x + B) over F_p.

    The cubic is stepped by finite differences along four residue classes
    x = 4k + j at once; the independent chains keep the table lookups
    overlapping instead of serialising on one add-and-reduce chain.
    """
    f0, e0, h0 = _cubic_start(A, B, p, 0, 4)
    f1, e1, h1 = _cubic_start(A, B, p, 1, 4)
    f2, e2, h2 = _cubic_start(A, B, p, 2, 4)
    f3, e3, h3 = _cubic_start(A, B, p, 3, 4)
    d3 = 384 % p                     # 6 * 4^3
    s = 0
    n = p // 4
    for _ in range(n):
        s += chi[f0] + chi[f1] + chi[f2] + chi[f3]
        f0 += e0
        f0 -= p if f0 >= p else 0
        f1 += e1
        f1 -= p if f1 >= p else 0
        f2 += e2
        f2 -= p if f2 >= p else 0
        f3 += e3
        f3 -= p if f3 >= p else 0
        e0 += h0
        e0 -= p if e0 >= p else 0
        e1 += h1
        e1 -= p if e1 >= p else 0
        e2 += h2
        e2 -= p if e2 >= p else 0
        e3 += h3
        e3 -= p if e3 >= p else 0
        h0 += d3
        h0 -= p if h0 >= p else 0
        h1 += d3
        h1 -= p if h1 >= p else 0
        h2 += d3
        h2 -= p if h2 >= p else 0
        h3 += d3
        h3 -= p if h3 >= p else 0
    for x in range(4 * n, p):
        s += chi[((x * x % p) * x + A * x + B) % p]
    return -s


@numba.njit(cache=True)
def ap_charsum_short(A, B, p):
    chi = np.empty(p, dtype=np.int8)
    _fill_chi(chi, p)
    return _charsum(A, B, p, chi)


@numba.njit(cache=True)
def ap_charsum_multi(A, B, primes):
    """Character sums for several short models sharing one residue table.

    ``A`` and ``B`` have shape (curves, primes) and hold residues mod p.
    """
    k, n = A.shape
    out = np.zeros((k, n), dtype=np.int64)
    if n == 0:
        return out
    chi = np.empty(primes[n - 1] + 1, dtype=np.int8)
    for j in range(n):
        p = primes[j]
        _fill_chi(chi, p)
        for i in range(k):
            out[i, j] = _charsum(A[i, j], B[i, j], p, chi)
    return out


# ---------------------------------------------------------------------------
# baby-step / giant-step on y^2 = x^3 + A x + B

@numba.njit(cache=True)
def _add(x1, y1, o1, x2, y2, o2, A, p):
    if o1:
        return x2, y2, o2
    if o2:
        return x1, y1, o1
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return 0, 0, True
        lam = (3 * (x1 * x1 % p) + A) % p * invmod(2 * y1, p) % p
    else:
        lam = (y2 - y1) % p * invmod((x2 - x1) % p, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return x3, y3, False


@numba.njit(cache=True)
def _mul(k, x, y, o, A, p):
    rx, ry, ro = 0, 0, True
    if k < 0:
        k = -k
        y = (p - y) % p
    while k > 0:
        if k & 1:
            rx, ry, ro = _add(rx, ry, ro, x, y, o, A, p)
        x, y, o = _add(x, y, o, x, y, o, A, p)
        k >>= 1
    return rx, ry, ro


@numba.njit(cache=True)
def _isqrt(n):
    r = int(np.sqrt(n))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@numba.njit(cache=True)
def _candidates(A, p, px, py, out):
    """All a in the Hasse interval with a*P == (p+1)*P; returns how many.

    Returns -1 when more than ``len(out)`` candidates exist.
    """
    bound = _isqrt(4 * p)
    m = _isqrt(bound) + 1
    xs = np.empty(m, dtype=np.int64)
    ys = np.empty(m, dtype=np.int64)
    cx, cy, co = px, py, False
    for j in range(m):
        if co:                 # order of P divides j: flag with x = -1
            xs[j] = -1
            ys[j] = 0
        else:
            xs[j] = cx
            ys[j] = cy
        cx, cy, co = _add(cx, cy, co, px, py, False, A, p)
    order = np.argsort(xs)
    sx = xs[order]
    step = 2 * m + 1
    gx, gy, go = _mul(step, px, py, False, A, p)
    ngy = (p - gy) % p
    imax = (bound + m) // step + 1
    qx, qy, qo = _mul(p + 1, px, py, False, A, p)
    # R_i = Q - i*G, start at i = -imax
    rx, ry, ro = qx, qy, qo
    sx_, sy_, so_ = _mul(imax, gx, gy, go, A, p)
    rx, ry, ro = _add(rx, ry, ro, sx_, sy_, so_, A, p)
    count = 0
    for i in range(-imax, imax + 1):
        base = i * step
        if ro:
            a = base
            if -bound <= a <= bound:
                if count >= len(out):
                    return -1
                out[count] = a
                count += 1
        else:
            pos = np.searchsorted(sx, rx)
            while pos < m and sx[pos] == rx:
                j = order[pos]
                jj = j + 1       # xs[j] holds (j+1)*P
                for sgn in (1, -1):
                    yy = ys[j] if sgn == 1 else (p - ys[j]) % p
                    if yy == ry:
                        a = base + sgn * jj
                        if -bound <= a <= bound:
                            dup = False
                            for t in range(count):
                                if out[t] == a:
                                    dup = True
                            if not dup:
                                if count >= len(out):
                                    return -1
                                out[count] = a
                                count += 1
                pos += 1
        rx, ry, ro = _add(rx, ry, ro, gx, ngy, go, A, p)
    return count


@numba.njit(cache=True)
def bsgs_ap(A, B, p, max_points):
    """a(p) of y^2 = x^3 + A x + B by baby-step/giant-step, or AMBIGUOUS."""
    cand = np.empty(64, dtype=np.int64)
    keep = np.empty(64, dtype=np.int64)
    nkeep = -1
    x = (p // 3 + 17) % p
    tried = 0
    while tried < max_points:
        x = (x + 1) % p
        f = ((x * x % p) * x + A * x + B) % p
        if f == 0 or legendre(f, p) != 1:
            continue
        y = sqrtmod(f, p)
        tried += 1
        n = _candidates(A, p, x, y, cand)
        if n <= 0:
            continue
        if nkeep < 0:
            for t in range(n):
                keep[t] = cand[t]
            nkeep = n
        else:
            m = 0
            for t in range(nkeep):
                for u in range(n):
                    if keep[t] == cand[u]:
                        keep[m] = keep[t]
                        m += 1
                        break
            nkeep = m
        if nkeep == 1:
            return keep[0]
    return AMBIGUOUS


@numba.njit(cache=True)
def ap_kernel(r1, r2, r3, r4, r6, nmod, primes, use_bsgs, threshold, max_points):
    """a(p) for every prime in ``primes``.

    ``r*`` are the Weierstrass coefficients reduced mod each prime and ``nmod``
    the conductor mod each prime (or -1 where no conductor is known).  Returns
    ``(ap, flags)`` with flag 0 = good, 1 = bad, 2 = non-minimal suspicion
    (p divides the discriminant but not the conductor), 3 = BSGS fell back.
    """
    n = len(primes)
    ap = np.zeros(n, dtype=np.int64)
    flags = np.zeros(n, dtype=np.int8)
    maxp = 0
    for j in range(n):
        if primes[j] > maxp:
            maxp = primes[j]
    chi = np.empty(maxp + 1 if not use_bsgs else min(maxp, threshold) + 1, dtype=np.int8)
    for j in range(n):
        p = primes[j]
        a1, a2, a3, a4, a6 = r1[j], r2[j], r3[j], r4[j], r6[j]
        c4, c6, disc = reduced_invariants(a1, a2, a3, a4, a6, p)
        bad = disc == 0
        if nmod[j] >= 0:
            if bad and nmod[j] != 0:
                flags[j] = 2
            bad = nmod[j] == 0
        if bad:
            flags[j] = 1
        if p <= 3:
            ap[j] = p + 1 - count_points_naive(a1, a2, a3, a4, a6, p)
            continue
        if bad:
            if c4 == 0:
                ap[j] = 0
            else:
                ap[j] = legendre(p - c6, p)
            continue
        A = (-27 * c4) % p
        B = (-54 * c6) % p
        if use_bsgs and p > threshold:
            a = bsgs_ap(A, B, p, max_points)
            if a != AMBIGUOUS:
                ap[j] = a
                continue
            flags[j] = 3
            ap[j] = ap_charsum_short(A, B, p)
        else:
            _fill_chi(chi, p)
            ap[j] = _charsum(A, B, p, chi)
    return ap, flags
