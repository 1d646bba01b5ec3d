"""The Riemann zeta function by Euler-Maclaurin summation, and its zeros.

zeta(s) and its first two derivatives are summed together as second-order
jets, so zeta'/zeta and its derivative cost one pass.  Zeros on the critical
line are located as sign changes of Hardy's Z and certified against the
argument-principle count.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
from scipy import integrate, optimize
from scipy.special import bernoulli

from .errors import (ConsistencyError, DomainError, IncompletenessError, PoleError)
from .special import EPS, ComplexEval, _loggamma, loggamma_array, trigamma

log = logging.getLogger(__name__)

#: Largest |Im s| accepted by :func:`zeta`.
MAX_HEIGHT = 1e6

_K = 20
_B = np.array(bernoulli(2 * _K + 2), dtype=float)
_FACT = np.array([math.factorial(k) for k in range(2 * _K + 3)], dtype=float)
_RATIO = 0.4


_TWO_PI_HI = 6.283185307179586
_TWO_PI_LO = 2.4492935982947064e-16
_SPLIT = 134217729.0

_log_hi = np.zeros(1)
_log_lo = np.zeros(1)


def _log_tables(n):
    """log k for 0 <= k <= n as a double-double (hi, lo) pair from long double logs."""
    global _log_hi, _log_lo
    if len(_log_hi) <= n:
        size = max(n + 1, 2 * len(_log_hi), 4096)
        k = np.arange(size, dtype=np.longdouble)
        k[0] = 1
        full = np.log(k)
        _log_hi = full.astype(float)
        _log_lo = (full - _log_hi.astype(np.longdouble)).astype(float)
    return _log_hi, _log_lo


@numba.njit(cache=True)
def _two_prod(a, b):
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    p = a * b
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@numba.njit(cache=True)
def _cis(t, hi, lo):
    """(cos, sin) of t (hi + lo), reduced mod 2 pi in double-double."""
    ph, pl = _two_prod(t, hi)
    pl += t * lo
    k = math.floor(ph / _TWO_PI_HI + 0.5)
    qh, ql = _two_prod(k, _TWO_PI_HI)
    r = (ph - qh) - ql + pl - k * _TWO_PI_LO
    return math.cos(r), math.sin(r)


@numba.njit(cache=True)
def _jmul(a0, a1, a2, b0, b1, b2):
    return a0 * b0, a1 * b0 + a0 * b1, a2 * b0 + 2 * a1 * b1 + a0 * b2


@numba.njit(cache=True)
def _terms_for(s, ratio):
    return max(10, int(math.ceil((abs(s) + 2 * _K + 1) / (2 * math.pi * ratio))))


@numba.njit(cache=True)
def _zeta_jet(s, n_terms, ratio, lhi, llo):
    """(zeta, zeta', zeta'', error bound for zeta) at s.  ``n_terms`` <= 0 picks N.

    ``lhi``/``llo`` hold log n to double-double accuracy for n <= N.
    """
    N = n_terms if n_terms > 0 else _terms_for(s, ratio)
    t = s.imag
    sig = s.real
    z0 = 0j
    z1 = 0j
    z2 = 0j
    absum = 0.0
    for n in range(1, N):
        L = lhi[n]
        c, sn = _cis(t, L, llo[n])
        m = math.exp(-sig * L)
        v = complex(m * c, -m * sn)
        z0 += v
        z1 -= L * v
        z2 += L * L * v
        absum += m
    LN = lhi[N]
    c, sn = _cis(t, LN, llo[N])
    vN = math.exp(-sig * LN) * complex(c, -sn)
    # N^(1-s) / (s-1)
    a = vN * N
    b = 1.0 / (s - 1.0)
    t0, t1, t2 = _jmul(a, -LN * a, LN * LN * a, b, -b * b, 2 * b * b * b)
    z0 += t0 + 0.5 * vN
    z1 += t1 - 0.5 * LN * vN
    z2 += t2 + 0.5 * LN * LN * vN
    # Bernoulli corrections; p carries the jet of s(s+1)...(s+2k-2)
    p0, p1, p2 = 1.0 + 0j, 0j, 0j
    w = vN * N            # N^(-s-2k+1) at k = 0
    for k in range(1, _K + 1):
        if k == 1:
            p0, p1, p2 = _jmul(p0, p1, p2, s, 1.0 + 0j, 0j)
        else:
            p0, p1, p2 = _jmul(p0, p1, p2, s + (2 * k - 3), 1.0 + 0j, 0j)
            p0, p1, p2 = _jmul(p0, p1, p2, s + (2 * k - 2), 1.0 + 0j, 0j)
        w = w / (N * N)
        c = _B[2 * k] / _FACT[2 * k]
        e0, e1, e2 = _jmul(p0, p1, p2, w, -LN * w, LN * LN * w)
        z0 += c * e0
        z1 += c * e1
        z2 += c * e2
    # remainder bound for order 0, widened for the derivatives
    poch = 1.0
    for j in range(2 * _K + 1):
        poch *= abs(s + j)
    rem = (poch * abs(_B[2 * _K + 2]) / _FACT[2 * _K + 2] * N ** (-sig - 2 * _K - 1)
           * abs(s + 2 * _K + 1) / max(sig + 2 * _K + 1, 1e-300))
    err = rem + 8 * EPS * (absum + abs(t0) + abs(z0))
    return z0, z1, z2, err


@numba.njit(cache=True)
def _zeta_many(s, order, n_terms, ratio, lhi, llo):
    out = np.empty(len(s), dtype=np.complex128)
    for i in range(len(s)):
        z0, z1, z2, _ = _zeta_jet(s[i], n_terms, ratio, lhi, llo)
        out[i] = z0 if order == 0 else (z1 if order == 1 else z2)
    return out


def _check_s(s):
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if abs(s.imag) > MAX_HEIGHT:
        raise DomainError(f"|Im s| = {abs(s.imag):g} exceeds the supported height {MAX_HEIGHT:g}")


def _tables_for(s, terms=0):
    """Log tables long enough for every point of ``s``."""
    big = float(np.max(np.abs(s))) if np.size(s) else 0.0
    return _log_tables(max(terms, _terms_for(complex(big), _RATIO)) + 1)


def zeta(s, derivative: int = 0, *, terms: int | None = None) -> ComplexEval:
    """zeta(s), zeta'(s) or zeta''(s) with an absolute error bound.

    ``terms`` overrides the number of directly summed terms (the default is
    chosen from |s| so that the Euler-Maclaurin remainder is negligible).
    """
    if derivative not in (0, 1, 2):
        raise ValueError("derivative order must be 0, 1 or 2")
    s = complex(s)
    _check_s(s)
    jet = _zeta_jet(s, terms or 0, _RATIO, *_tables_for(s, terms or 0))
    # each derivative order costs at most a factor ~log N in the error
    widen = (4.0 * (1.0 + math.log(terms or _terms_for(s, _RATIO)))) ** derivative
    return ComplexEval(complex(jet[derivative]), float(jet[3]) * widen)


def zeta_array(s, derivative: int = 0) -> np.ndarray:
    """Vectorised :func:`zeta` (values only)."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s == 1):
        raise PoleError("zeta has a pole at s = 1")
    return _zeta_many(s, derivative, 0, _RATIO, *_tables_for(s))


def zeta_logderiv(s) -> ComplexEval:
    """zeta'/zeta(s)."""
    s = complex(s)
    _check_s(s)
    z0, z1, _, err = _zeta_jet(s, 0, _RATIO, *_tables_for(s))
    if abs(z0) <= err:
        raise PoleError(f"zeta vanishes at {s} to working precision")
    w = 4.0 * (1.0 + math.log(_terms_for(s, _RATIO)))
    return ComplexEval(complex(z1), err * w) / ComplexEval(complex(z0), err)


def zeta_logderiv_prime(s) -> ComplexEval:
    """(zeta'/zeta)'(s) = zeta''/zeta - (zeta'/zeta)^2."""
    s = complex(s)
    _check_s(s)
    z0, z1, z2, err = _zeta_jet(s, 0, _RATIO, *_tables_for(s))
    if abs(z0) <= err:
        raise PoleError(f"zeta vanishes at {s} to working precision")
    w = 4.0 * (1.0 + math.log(_terms_for(s, _RATIO)))
    f = ComplexEval(complex(z0), err)
    g = ComplexEval(complex(z1), err * w) / f
    return ComplexEval(complex(z2), err * w * w) / f - g * g


@numba.njit(cache=True)
def _logderiv_many(s, which, lhi, llo):
    out = np.empty(len(s), dtype=np.complex128)
    for i in range(len(s)):
        z0, z1, z2, _ = _zeta_jet(s[i], 0, _RATIO, lhi, llo)
        g = z1 / z0
        out[i] = g if which == 0 else z2 / z0 - g * g
    return out


def zeta_logderiv_array(s, derivative: bool = False) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    return _logderiv_many(s, 1 if derivative else 0, *_tables_for(s))


# ---------------------------------------------------------------------------
# Hardy Z

def riemann_siegel_theta(t):
    """theta(t) = arg Gamma(1/4 + it/2) - (t/2) log pi, continuous with theta(0) = 0."""
    t = np.asarray(t, dtype=float)
    return loggamma_array(0.25 + 0.5j * t).imag - 0.5 * t * math.log(math.pi)


def hardy_Z_zeta(t: float) -> float:
    """Z(t) = exp(i theta(t)) zeta(1/2 + it), real for real t."""
    t = float(t)
    z = zeta(0.5 + 1j * t)
    th = float(riemann_siegel_theta(t))
    v = complex(np.exp(1j * th)) * z.value
    tol = 1e-10 + 16 * EPS * (abs(th) + 1.0) * abs(z.value) + z.error
    if abs(v.imag) > tol:
        raise ConsistencyError(f"Z({t}) has imaginary part {v.imag:.3g}")
    return v.real


def hardy_Z_zeta_array(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = 0.5 + 1j * t
    z = _zeta_many(s, 0, 0, _RATIO, *_tables_for(s))
    return (np.exp(1j * riemann_siegel_theta(t)) * z).real


# ---------------------------------------------------------------------------
# zero counting

def zeta_arg_change(T: float, sigma_start: float = 3.0) -> float:
    """Continuous arg zeta(sigma + iT) followed from sigma_start down to 1/2."""
    T = float(T)
    n = 64
    while True:
        sig = np.linspace(sigma_start, 0.5, n + 1)
        v = zeta_array(sig + 1j * T)
        steps = np.angle(v[1:] / v[:-1])
        if np.max(np.abs(steps)) < math.pi / 8 or n >= 1 << 16:
            return float(np.angle(v[0]) + steps.sum())
        n *= 4


def zeta_zero_count(T: float) -> int:
    """N(T), the number of zeros with 0 < gamma <= T, by the argument principle.

    T must not be (numerically) a zero ordinate.
    """
    T = float(T)
    if T <= 0:
        return 0
    val = float(riemann_siegel_theta(T)) / math.pi + 1.0 + zeta_arg_change(T) / math.pi
    n = round(val)
    if abs(val - n) > 0.25:
        raise ConsistencyError(f"argument-principle count at T={T} is not near an integer ({val:.4f})")
    return int(n)


def smooth_zero_count(T):
    """theta(T)/pi + 1, the main term of N(T)."""
    return riemann_siegel_theta(T) / math.pi + 1.0


# ---------------------------------------------------------------------------
# zero lists

@dataclass(frozen=True)
class ZeroList:
    """Ascending zero ordinates up to ``height``; ``complete`` when certified."""

    ordinates: np.ndarray = field(repr=False)
    height: float
    complete: bool
    source: str = "computed"
    label: str = "zeta"

    def __post_init__(self):
        arr = np.asarray(self.ordinates, dtype=float)
        if len(arr) > 1 and np.any(np.diff(arr) <= 0):
            raise ValueError("ordinates must be strictly ascending")
        arr.setflags(write=False)
        object.__setattr__(self, "ordinates", arr)

    def __len__(self):
        return len(self.ordinates)

    def __getitem__(self, i):
        return self.ordinates[i]

    def __iter__(self):
        return iter(self.ordinates.tolist())


def write_zero_table(path, zeros, metadata: dict | None = None) -> None:
    """One ordinate per line; ``metadata`` goes to a JSON sidecar ``<path>.json``."""
    path = Path(path)
    ords = zeros.ordinates if isinstance(zeros, ZeroList) else np.asarray(zeros)
    path.write_text("".join(f"{g:.15f}\n" for g in ords))
    if metadata is not None:
        Path(str(path) + ".json").write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")


def read_zero_table(path, label: str = "zeta") -> ZeroList:
    ords = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            ords.append(float(line.split()[0]))
    ords = np.asarray(ords)
    height = float(ords[-1]) if len(ords) else 0.0
    return ZeroList(ords, height, complete=False, source="imported", label=label)


def mean_gap(t):
    """Average spacing 2 pi / log(t / 2 pi) of zeta zeros at height t (clamped below)."""
    return 2 * math.pi / max(math.log(max(t, 1.0) / (2 * math.pi)), 1.0)


def _scan(fn, lo, hi, step_of, refine):
    """Grid where the spacing is step_of(t) / refine; returns (t, values)."""
    ts = [lo]
    t = lo
    while t < hi:
        t = min(hi, t + step_of(t) / refine)
        ts.append(t)
    ts = np.asarray(ts)
    return ts, fn(ts)


def _bracketed_roots(fn_scalar, ts, vals, xtol):
    roots = []
    sign = np.sign(vals)
    idx = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    for i in idx.tolist():
        roots.append(optimize.brentq(fn_scalar, ts[i], ts[i + 1], xtol=xtol, rtol=4 * EPS,
                                     maxiter=200))
    return roots


def find_sign_change_zeros(fn_array, fn_scalar, lo, hi, step_of, count_fn, *,
                           max_refine=6, xtol=1e-12, label=""):
    """Shared scan-bisect-certify loop for zeta and L-function zeros.

    Returns ``(roots, expected, refine)``; ``roots`` matches ``expected`` on success.
    """
    expected = count_fn(hi)
    refine = 1
    roots = []
    for _ in range(max_refine + 1):
        ts, vals = _scan(fn_array, lo, hi, step_of, refine)
        roots = _bracketed_roots(fn_scalar, ts, vals, xtol)
        if len(roots) == expected:
            return roots, expected, refine
        log.info("%s: found %d zeros, expected %d, refining grid x%d", label,
                 len(roots), expected, 2 * refine)
        refine *= 2
    return roots, expected, refine


def _certifiable_height(T):
    """Move T slightly so it is not too close to a zero (keeps the count well posed)."""
    for k in range(20):
        t = T + 0.01 * k * (-1) ** k
        z = abs(hardy_Z_zeta(t))
        if z > 1e-3:
            return t
    return T


def zeta_zeros(T: float | None = None, *, count: int | None = None, max_refine: int = 6,
               strict: bool = True) -> ZeroList:
    """Zeros 1/2 + i gamma with 0 < gamma <= T (or the first ``count`` of them).

    The list is certified complete by the argument-principle count; on a
    mismatch the grid is refined up to ``max_refine`` times.  With ``strict``
    an unresolved mismatch raises :class:`IncompletenessError` (the partial
    list rides on the exception), otherwise it comes back with complete=False.
    """
    if (T is None) == (count is None):
        raise ValueError("give exactly one of T or count")
    if count is not None:
        if count <= 0:
            return ZeroList(np.zeros(0), 0.0, True)
        # smallest height whose smooth count exceeds count + a margin
        target = count + 2 + 0.1 * math.sqrt(count)
        T = optimize.brentq(lambda x: smooth_zero_count(x) - target, 1.0, 1e7)
    T = float(T)
    if T > MAX_HEIGHT:
        raise DomainError(f"T = {T:g} exceeds the supported height {MAX_HEIGHT:g}")
    if T < 14:
        return ZeroList(np.zeros(0), T, True)
    T = _certifiable_height(T)
    roots, expected, _ = find_sign_change_zeros(
        hardy_Z_zeta_array, hardy_Z_zeta, 0.0, T, lambda t: 0.25 * mean_gap(t),
        zeta_zero_count, max_refine=max_refine, label="zeta")
    ok = len(roots) == expected
    if count is not None and ok:
        if len(roots) < count:
            raise IncompletenessError(f"only {len(roots)} zeros below {T:.3f}", roots)
        height = 0.5 * (roots[count - 1] + roots[count]) if len(roots) > count else T
        roots = roots[:count]
    else:
        height = T
    zl = ZeroList(np.asarray(roots), height, complete=ok)
    if not ok and strict:
        raise IncompletenessError(
            f"found {len(roots)} zeros up to {T:.6f} but the argument principle gives {expected}",
            zl)
    return zl


# ---------------------------------------------------------------------------
# Hadamard product cross-check

def zero_sum_logderiv_prime(s, zeros: ZeroList, *, tail: bool = True):
    """(zeta'/zeta)'(s) from the Hadamard product truncated to ``zeros``.

    (s-1)^-2 - psi'(s/2 + 1)/4 - sum_rho (s - rho)^-2 over rho = 1/2 +- i gamma.
    With ``tail`` the missing zeros above the list are replaced by the
    integral against the smooth zero density log(t / 2 pi) / 2 pi.  Returns
    ``(value, tail_estimate)``.
    """
    s = complex(s)
    g = np.asarray(zeros.ordinates)
    rho = 0.5 + 1j * g
    zsum = np.sum(1.0 / (s - rho) ** 2 + 1.0 / (s - np.conj(rho)) ** 2)
    base = 1.0 / (s - 1) ** 2 - trigamma(s / 2 + 1).value / 4
    est = 0j
    if tail and len(g):
        start = float(zeros.height)

        def dens(u, part):
            val = (1.0 / (s - 0.5 - 1j * u) ** 2 + 1.0 / (s - 0.5 + 1j * u) ** 2) \
                * math.log(u / (2 * math.pi)) / (2 * math.pi)
            return val.real if part == 0 else val.imag

        re = integrate.quad(dens, start, np.inf, args=(0,), limit=200)[0]
        im = integrate.quad(dens, start, np.inf, args=(1,), limit=200)[0]
        est = complex(re, im)
    return complex(base - zsum - est), est
