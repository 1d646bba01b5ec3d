"""Theoretical predictions: local corrections, ratios-conjecture densities, limit kernels.

Arithmetic factors are Euler products or prime sums whose p-th terms agree
with a zeta quotient up to O(p^-3).  Each is evaluated as the zeta quotient
times the product (or plus the sum) of the small remainders over p <= P, and
the remainder tail over p > P is bounded with theta(x) <= 1.01624 x:

    sum_{p > P} log(p)^m p^-k  <=  1.01624 * int_P^oo x d(-log(x)^m x^-k).

The remainder bounds assume the shift has nonnegative real part, which is
the only region the predictions use (purely imaginary shifts).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np
from scipy import integrate

from .arith import primes_upto
from .curve import WeierstrassCurve, ap
from .errors import DependencyError, DomainError, PrecisionError
from .special import EPS, ComplexEval, digamma_array, loggamma_array
from .zeta import zeta, zeta_array, zeta_logderiv, zeta_logderiv_array, zeta_logderiv_prime

#: Default prime cutoff; puts every tail bound below 1e-11.
DEFAULT_CUTOFF = 10 ** 6
_THETA = 1.01624            # sup theta(x)/x
_GUARD = 1e-3               # below this |t| the density and pair terms are extrapolated


@dataclass(frozen=True)
class EulerProductValue:
    value: complex
    prime_cutoff: int | None
    tail_bound: float

    def __complex__(self):
        return complex(self.value)

    @property
    def real(self):
        return self.value.real


@lru_cache(maxsize=4)
def _primes(P: int):
    p = primes_upto(P).astype(float)
    return p, np.log(p)


def prime_tail(P: float, k: float, m: int = 1) -> float:
    """Upper bound for sum_{p > P} log(p)^m p^-k (m = 1 or 2, k > 1)."""
    a = P ** (1 - k)
    if m == 1:
        return _THETA * a * k / (k - 1)
    if m == 2:
        L = math.log(P)
        return _THETA * a * (k * L / (k - 1) + k / (k - 1) ** 2 - 1 / (k - 1))
    raise ValueError("m must be 1 or 2")


def _check_cutoff(P):
    if P < 100:
        raise DomainError(f"prime cutoff {P} below the supported minimum 100")
    return int(P)


def _check_shift(z, name):
    z = complex(z)
    if z.real < 0:
        raise DomainError(f"{name} is only supported for Re >= 0, got {z}")
    return z


@numba.njit(cache=True)
def _remainders(p, logp, shifts, which):
    out = np.empty(len(shifts), dtype=np.complex128)
    for j in range(len(shifts)):
        eta = shifts[j]
        acc = 1.0 + 0j if which == 0 else 0j
        for i in range(len(p)):
            u = 1.0 / p[i]
            if which == 0:
                y = u * np.exp(-eta * logp[i])
                a = 1.0 - (u - y) ** 2 / (1.0 - u) ** 2
                z = (1.0 - u * u) * (1.0 - y * y) / (1.0 - u * y) ** 2
                acc *= a / z
            elif which == 1:
                x = p[i] * np.exp(2.0 * eta * logp[i])
                acc += logp[i] * (p[i] - x) / ((p[i] + 1.0) * (x - 1.0) * (p[i] * x - 1.0))
            else:
                x = p[i] * np.exp(eta * logp[i])
                acc += logp[i] ** 2 * (2.0 * x + 1.0) / ((x - 1.0) ** 2 * (x + 1.0) ** 2)
        out[j] = acc
    return out


def _remainder(shifts, which, P):
    p, lp = _primes(P)
    return _remainders(p, lp, np.atleast_1d(np.asarray(shifts, dtype=complex)), which)


def A_D(r, cutoff: int | None = None) -> EulerProductValue:
    """A_D(-r; r).

    Every local factor equals (1 - p^(2r-2)) / (1 - p^-2), so the product is
    zeta(2)/zeta(2 - 2r) exactly and no truncation is involved.
    """
    r = complex(r)
    if r.real >= 0.5:
        raise DomainError(f"A_D(-r; r) diverges for Re r >= 1/2, got {r}")
    v = zeta(2.0) / zeta(2 - 2 * r)
    return EulerProductValue(v.value, None, v.error)


def A_D_prime(r, cutoff: int = DEFAULT_CUTOFF) -> EulerProductValue:
    """A'_D(r; r) = sum_p log p / ((p + 1)(p^(1+2r) - 1)), anchored on -zeta'/zeta(2 + 2r)."""
    r = _check_shift(r, "A'_D")
    P = _check_cutoff(cutoff)
    head = -zeta_logderiv(2 + 2 * r)
    rem = _remainder(r, 1, P)[0]
    tail = 2 * (1 + 3 / P) * prime_tail(P, 3, 1)
    return EulerProductValue(head.value + rem, P, tail + head.error + len(_primes(P)[0]) * EPS)


def A_pc(eta, cutoff: int = DEFAULT_CUTOFF) -> EulerProductValue:
    """A(eta), anchored on zeta(2 + eta)^2 / (zeta(2) zeta(2 + 2 eta))."""
    eta = _check_shift(eta, "A(eta)")
    P = _check_cutoff(cutoff)
    head = zeta(2 + eta) * zeta(2 + eta) / (zeta(2.0) * zeta(2 + 2 * eta))
    rem = _remainder(eta, 0, P)[0]
    v = head.value * rem
    b = 9 * prime_tail(P, 3, 1) / math.log(P)
    err = abs(v) * (math.expm1(b) + len(_primes(P)[0]) * EPS) + head.error * abs(rem)
    return EulerProductValue(v, P, err)


def B_pc(eta, cutoff: int = DEFAULT_CUTOFF) -> EulerProductValue:
    """B(eta) = sum_p (log p / (p^(1+eta) - 1))^2, anchored on (zeta'/zeta)'(2 + 2 eta)."""
    eta = _check_shift(eta, "B(eta)")
    P = _check_cutoff(cutoff)
    head = zeta_logderiv_prime(2 + 2 * eta)
    rem = _remainder(eta, 2, P)[0]
    tail = 2 * (1 + 3 / P) * prime_tail(P, 3, 2)
    return EulerProductValue(head.value + rem, P, tail + head.error + len(_primes(P)[0]) * EPS)


# array versions for quadrature (values only)

def _A_D_array(r):
    return zeta(2.0).value / zeta_array(2 - 2 * r)


def _A_D_prime_array(r, P):
    return -zeta_logderiv_array(2 + 2 * r) + _remainder(r, 1, P)


def _A_pc_array(eta, P):
    z = zeta_array(2 + eta)
    return z * z / (zeta(2.0).value * zeta_array(2 + 2 * eta)) * _remainder(eta, 0, P)


def _B_pc_array(eta, P):
    return zeta_logderiv_array(2 + 2 * eta, derivative=True) + _remainder(eta, 2, P)


def euler_direct(name: str, z, cutoff: int) -> complex:
    """Plain truncation at ``cutoff`` with no tail treatment (a reference, not an estimator)."""
    p, lp = _primes(int(cutoff))
    z = complex(z)
    if name == "A_D":
        f = (1 - 1 / ((p + 1) * p * np.exp(-2 * z * lp)) - 1 / (p + 1)) / (1 - 1 / p)
        return complex(np.prod(f))
    if name == "A_D_prime":
        return complex(math.fsum(np.real(lp / ((p + 1) * (p * np.exp(2 * z * lp) - 1)))) +
                       1j * math.fsum(np.imag(lp / ((p + 1) * (p * np.exp(2 * z * lp) - 1)))))
    if name == "A":
        y = np.exp(-(1 + z) * lp)
        return complex(np.prod((1 - y) * (1 - 2 / p + y) / (1 - 1 / p) ** 2))
    if name == "B":
        t = (lp / (p * np.exp(z * lp) - 1)) ** 2
        return complex(math.fsum(t.real) + 1j * math.fsum(t.imag))
    raise ValueError(f"unknown product {name!r}")


# ---------------------------------------------------------------------------
# local correction and the spike predictor

def correction_primes(r: int) -> list:
    """Primes with 2 sqrt(p) < r."""
    return [int(p) for p in primes_upto(max(int(r * r / 4) + 1, 2)) if 4 * p < r * r]


def local_correction(curve: WeierstrassCurve, r: int, s) -> ComplexEval:
    """prod over 2 sqrt(p) < r of L_p(p^-s) (1 - p^(-s-1/2))^-r.

    L_p is the true local factor of L_E at s + 1/2 in the analytic
    normalization; it replaces the r-th power of 1/zeta(s + 1/2) there.
    """
    s = complex(s)
    out = ComplexEval(1.0 + 0j)
    for p in correction_primes(r):
        try:
            a = ap(curve, p)
        except Exception as exc:  # pragma: no cover - ap only fails on malformed curves
            raise DependencyError(f"a({p}) unavailable: {exc}") from exc
        x = p ** (-s - 0.5)
        lp = 1 - a * x if curve.is_bad(p) else 1 - a * x + p ** (-2 * s)
        out = out * ComplexEval((1 - x) ** -r / lp)
    return out


def local_correction_array(curve: WeierstrassCurve, r: int, s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    out = np.ones_like(s)
    for p in correction_primes(r):
        a = ap(curve, p)
        x = p ** (-s - 0.5)
        lp = 1 - a * x if curve.is_bad(p) else 1 - a * x + p ** (-2 * s)
        out *= (1 - x) ** -r / lp
    return out


def rank_ratio_prediction(curve: WeierstrassCurve, r: int, t):
    """|local(1/2 + it)| / |zeta(1 + it)|^r; vectorised over t."""
    t = np.asarray(t, dtype=float)
    if r == 0:
        return np.ones_like(t) if t.ndim else 1.0
    z = np.abs(zeta_array(1 + 1j * np.atleast_1d(t).astype(complex)))
    z = np.maximum(z, 1e-300)
    loc = np.abs(local_correction_array(curve, r, 0.5 + 1j * np.atleast_1d(t)))
    out = loc / z ** r
    return out if t.ndim else float(out[0])


# ---------------------------------------------------------------------------
# one-level density of quadratic characters

def _gamma_shift(d: int) -> float:
    return 0.25 if d > 0 else 0.75


class FamilyMoments:
    """The two d-averages the density prediction needs: mean log(|d|/pi) and mean (|d|/pi)^-it."""

    def __init__(self, ds):
        ds = np.asarray(ds, dtype=np.int64)
        if len(ds) == 0:
            raise DomainError("empty family")
        signs = np.unique(np.sign(ds))
        if len(signs) != 1:
            raise DomainError("family mixes positive and negative discriminants")
        self.sign = int(signs[0])
        self.size = len(ds)
        self.logs = np.log(np.abs(ds) / math.pi)
        self.mean_log = float(np.mean(self.logs))

    @property
    def shift(self) -> float:
        return _gamma_shift(self.sign)

    def mean_phase(self, t, chunk: int = 256) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(len(t), dtype=complex)
        for i in range(0, len(t), chunk):
            tt = t[i:i + chunk]
            out[i:i + chunk] = np.exp(-1j * np.outer(tt, self.logs)).mean(axis=1)
        return out


def _density_raw(t, a, mean_log, phase, P):
    """(1/2 pi) Re[...] for |t| >= the guard; ``phase`` = mean of (|d|/pi)^-it."""
    it = 1j * t
    lg = loggamma_array(a + it / 2)
    gratio = np.exp(-2j * lg.imag)                 # Gamma(a - it/2) / Gamma(a + it/2)
    inner = (zeta_logderiv_array(1 + 2 * it) + _A_D_prime_array(it, P)
             - phase * gratio * zeta_array(1 - 2 * it) * _A_D_array(it))
    return (mean_log + digamma_array(a + it / 2).real + 2 * inner.real) / (2 * math.pi)


def _guarded(fn, t, guard=_GUARD):
    """fn on |t| >= guard; an even quadratic through t = guard, 2 guard inside."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(len(t))
    far = np.abs(t) >= guard
    if far.any():
        out[far] = fn(np.abs(t[far]))
    if (~far).any():
        f1, f2 = fn(np.array([guard, 2 * guard]))
        c = (f2 - f1) / (3 * guard ** 2)
        out[~far] = f1 - c * guard ** 2 + c * t[~far] ** 2
    return out


def cs_density_integrand(d: int, t, cutoff: int = 10 ** 5):
    """Per-discriminant density integrand (even in t); vectorised over t."""
    if d == 0:
        raise DomainError("d must be nonzero")
    a, L = _gamma_shift(d), math.log(abs(d) / math.pi)
    fn = lambda x: _density_raw(x, a, L, np.exp(-1j * x * L), cutoff)
    out = _guarded(fn, t)
    return out if np.ndim(t) else float(out[0])


def cs_density_average(moments: FamilyMoments, t, cutoff: int = 10 ** 5):
    """Family average of :func:`cs_density_integrand`."""
    fn = lambda x: _density_raw(x, moments.shift, moments.mean_log, moments.mean_phase(x), cutoff)
    out = _guarded(fn, t)
    return out if np.ndim(t) else float(out[0])


def cs_density_leading(moments: FamilyMoments, t):
    """Leading term mean log(|d|/pi) / 2 pi alone."""
    return np.full(np.shape(t), moments.mean_log / (2 * math.pi)) if np.ndim(t) else \
        moments.mean_log / (2 * math.pi)


def bin_average(fn, edges, nodes: int = 8) -> np.ndarray:
    """Mean of fn over each [edges[i], edges[i+1]) by Gauss-Legendre (fn vectorised)."""
    edges = np.asarray(edges, dtype=float)
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = edges[:-1], edges[1:]
    pts = (0.5 * (hi - lo)[:, None] * (x[None, :] + 1) + lo[:, None]).ravel()
    vals = np.asarray(fn(pts)).reshape(len(lo), nodes)
    return vals @ w / 2


# ---------------------------------------------------------------------------
# pair correlation of zeta zeros

def _pc_raw(r, T, P):
    L = math.log(T / (2 * math.pi))
    ir = 1j * r
    zp = zeta_array(1 + ir)
    term = (T * (zeta_logderiv_array(1 + ir, derivative=True) - _B_pc_array(ir, P))
            + 2 * math.pi * np.exp((1 - ir) * L) / (1 - ir) * np.conj(zp) * zp * _A_pc_array(ir, P))
    return (T * (L * L - 2 * L + 2) + 2 * term.real) / (2 * math.pi) ** 2


def cs_paircorr_density(T: float, r, cutoff: int = 10 ** 5):
    """The t-integrated pair-correlation integrand at r (real part; even in r)."""
    if T <= 2 * math.pi:
        raise DomainError(f"T must exceed 2 pi, got {T}")
    # the T/r^2 poles cancel; below 1e-2 that cancellation eats the digits
    out = _guarded(lambda x: _pc_raw(x, T, cutoff), r, guard=1e-2)
    return out if np.ndim(r) else float(out[0])


def paircorr_main_term(T: float) -> float:
    """(1/(2 pi)^2) int_0^T log^2(t/2 pi) dt."""
    L = math.log(T / (2 * math.pi))
    return T * (L * L - 2 * L + 2) / (2 * math.pi) ** 2


def cs_paircorr_prediction(T: float, bin, *, lower_terms: bool = True,
                           cutoff: int = 10 ** 5, rtol: float = 1e-6) -> float:
    """Predicted number of ordered pairs with gamma_j - gamma_i in ``bin``."""
    a, b = map(float, bin)
    if not (-T < a < b < T):
        raise DomainError(f"bin {bin} must lie inside (-T, T)")
    if not lower_terms:
        return (b - a) * paircorr_main_term(T)
    brk = [0.0] if a < 0 < b else None
    # near r = 0 the density cancels almost to nothing; cap at rounding of the main term
    floor = 1e-12 * (b - a) * paircorr_main_term(T)
    val, err = integrate.quad(lambda r: cs_paircorr_density(T, r, cutoff), a, b,
                              points=brk, epsabs=floor, epsrel=rtol / 10, limit=200)
    if err > rtol * abs(val) + floor:
        raise PrecisionError(f"pair-correlation quadrature on {bin}: relative error "
                             f"{err / abs(val):.1e} > {rtol:.0e}", achieved=err / abs(val))
    return float(val)


# ---------------------------------------------------------------------------
# limit kernels

def kernel_symplectic(x):
    """1 - sin(2 pi x)/(2 pi x)."""
    return 1 - np.sinc(2 * np.asarray(x, dtype=float))


def kernel_gue_pc(t):
    """1 - (sin(pi t)/(pi t))^2."""
    return 1 - np.sinc(np.asarray(t, dtype=float)) ** 2


# ---------------------------------------------------------------------------

@dataclass
class PredictionCurve:
    abscissae: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        self.abscissae = np.asarray(self.abscissae, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.abscissae.shape != self.values.shape:
            raise DomainError("abscissae and values differ in length")
        if np.any(np.diff(self.abscissae) <= 0):
            raise DomainError("abscissae must ascend")
        if not np.all(np.isfinite(self.values)):
            raise DomainError(f"non-finite values in prediction {self.label!r}")

    def write_csv(self, path, metadata: dict | None = None) -> None:
        with open(path, "w", newline="") as fh:
            for k, v in (metadata or {}).items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh)
            w.writerow(["abscissa", "value", "label"])
            for x, y in zip(self.abscissae, self.values):
                w.writerow([repr(float(x)), repr(float(y)), self.label])
