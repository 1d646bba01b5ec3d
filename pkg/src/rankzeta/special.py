"""Complex log-gamma, digamma, trigamma and the upper incomplete gamma function.

The compiled kernels (leading underscore) are shared with the zeta and
L-function engines; the public wrappers return :class:`ComplexEval`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import PoleError, PrecisionError

EPS = np.finfo(float).eps

# B_2, B_4, ..., B_20
_BERN = np.array([1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6,
                  -3617 / 510, 43867 / 798, -174611 / 330])
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)
_SHIFT = 15.0


@dataclass(frozen=True)
class ComplexEval:
    """A complex value with an absolute error bound.

    Arithmetic propagates the bound to first order (plus rounding), so chained
    expressions stay conservative.
    """

    value: complex
    error: float = 0.0

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)

    @property
    def real(self):
        return self.value.real

    @property
    def imag(self):
        return self.value.imag

    @staticmethod
    def _wrap(x):
        return x if isinstance(x, ComplexEval) else ComplexEval(complex(x), 0.0)

    def __add__(self, other):
        o = self._wrap(other)
        v = self.value + o.value
        return ComplexEval(v, self.error + o.error + EPS * abs(v))

    __radd__ = __add__

    def __neg__(self):
        return ComplexEval(-self.value, self.error)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        o = self._wrap(other)
        v = self.value * o.value
        err = abs(self.value) * o.error + abs(o.value) * self.error + self.error * o.error
        return ComplexEval(v, err + 2 * EPS * abs(v))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._wrap(other)
        if o.error >= abs(o.value):
            raise PrecisionError("division by a value indistinguishable from zero",
                                 achieved=o.error)
        v = self.value / o.value
        rel = (self.error / abs(self.value) if self.value else 0.0) + o.error / (abs(o.value) - o.error)
        err = abs(v) * rel if self.value else self.error / (abs(o.value) - o.error)
        return ComplexEval(v, err + 2 * EPS * abs(v))

    def __rtruediv__(self, other):
        return self._wrap(other) / self


# ---------------------------------------------------------------------------
# kernels

@numba.njit(cache=True)
def _shift_count(z):
    return max(0, int(math.ceil(_SHIFT - z.real)))


@numba.njit(cache=True)
def _loggamma(z):
    """log Gamma(z), the branch analytic off the negative real axis."""
    n = _shift_count(z)
    acc = 0j
    for k in range(n):
        acc += np.log(z + k)
    w = z + n
    lw = np.log(w)
    r = 1.0 / w
    r2 = r * r
    s = 0j
    p = r
    for k in range(len(_BERN)):
        m = 2 * (k + 1)
        s += _BERN[k] / (m * (m - 1)) * p
        p *= r2
    return (w - 0.5) * lw - w + _HALF_LOG_2PI + s - acc


@numba.njit(cache=True)
def _digamma(z):
    n = _shift_count(z)
    acc = 0j
    for k in range(n):
        acc += 1.0 / (z + k)
    w = z + n
    r = 1.0 / w
    r2 = r * r
    s = 0j
    p = r2
    for k in range(len(_BERN)):
        s += _BERN[k] / (2 * (k + 1)) * p
        p *= r2
    return np.log(w) - 0.5 * r - s - acc


@numba.njit(cache=True)
def _trigamma(z):
    n = _shift_count(z)
    acc = 0j
    for k in range(n):
        acc += 1.0 / ((z + k) * (z + k))
    w = z + n
    r = 1.0 / w
    r2 = r * r
    s = r + 0.5 * r2
    p = r2 * r
    for k in range(len(_BERN)):
        s += _BERN[k] * p
        p *= r2
    return s + acc


_MAXIT = 5000


@numba.njit(cache=True)
def _gammainc_series(z, x, gz):
    """Gamma(z) - gamma(z, x) with the lower function from its power series.

    Returns (value, error estimate, iterations); iterations < 0 on failure.
    """
    term = 1.0 / z
    s = term
    big = abs(term)
    k = 1
    while k < _MAXIT:
        term *= x / (z + k)
        s += term
        a = abs(term)
        if a > big:
            big = a
        if a < 1e-17 * abs(s):
            break
        k += 1
    if k >= _MAXIT:
        return 0j, np.inf, -1
    pref = np.exp(z * np.log(x) - x)
    low = pref * s
    val = gz - low
    err = 32 * EPS * (abs(gz) + abs(pref) * big * math.sqrt(k + 1.0))
    return val, err, k


@numba.njit(cache=True)
def _gammainc_cf(z, x):
    """Gamma(z, x) from the Legendre continued fraction (modified Lentz)."""
    tiny = 1e-300
    b = x + 1.0 - z
    c = 1.0 / tiny + 0j
    d = 1.0 / b
    h = d
    i = 1
    while i < _MAXIT:
        an = -i * (i - z)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny + 0j
        c = b + an / c
        if abs(c) < tiny:
            c = tiny + 0j
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
        i += 1
    if i >= _MAXIT:
        return 0j, np.inf, -1
    val = np.exp(z * np.log(x) - x) * h
    return val, 64 * EPS * abs(val) * math.sqrt(i + 1.0), i


@numba.njit(cache=True)
def _use_series(z, x):
    # the series converges for all x but loses accuracy once |x| is well past |z|;
    # the fraction converges fast exactly there
    return abs(x) < abs(z) + 1.0 or abs(x) < 1.5


@numba.njit(cache=True)
def _gammainc(z, x, gz):
    if _use_series(z, x):
        return _gammainc_series(z, x, gz)
    return _gammainc_cf(z, x)


# ---------------------------------------------------------------------------
# public wrappers

def _check_pole(z, name):
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise PoleError(f"{name} has a pole at {z.real:g}")


def _asymp_error(z, scale):
    w = abs(z + _shift_count(z))
    return 1e3 * EPS * (scale + 1.0) + abs(_BERN[-1]) * w ** -21


def loggamma(z) -> ComplexEval:
    """log Gamma(z) on the branch continuous along vertical lines."""
    z = complex(z)
    _check_pole(z, "log Gamma")
    v = complex(_loggamma(z))
    return ComplexEval(v, _asymp_error(z, abs(v)))


def digamma(z) -> ComplexEval:
    z = complex(z)
    _check_pole(z, "digamma")
    v = complex(_digamma(z))
    return ComplexEval(v, _asymp_error(z, abs(v)))


def trigamma(z) -> ComplexEval:
    z = complex(z)
    _check_pole(z, "trigamma")
    v = complex(_trigamma(z))
    return ComplexEval(v, _asymp_error(z, abs(v)))


@numba.vectorize(["complex128(complex128)"], cache=True)
def loggamma_array(z):
    return _loggamma(z)


@numba.vectorize(["complex128(complex128)"], cache=True)
def digamma_array(z):
    return _digamma(z)


def inc_gamma_upper(z, x, method: str = "auto") -> ComplexEval:
    """Upper incomplete gamma Gamma(z, x) for complex z and Re x > 0.

    ``method`` forces ``"series"`` or ``"cf"`` (continued fraction); the
    default picks the series below the switch point |x| < |z| + 1.
    """
    z = complex(z)
    x = complex(x)
    if x.real <= 0 and not (x.real == 0 and x.imag != 0):
        raise ValueError("need Re x > 0")
    if method == "auto":
        method = "series" if _use_series(z, x) else "cf"
    if method == "series":
        _check_pole(z, "Gamma")
        gz = complex(np.exp(_loggamma(z)))
        v, err, it = _gammainc_series(z, x, gz)
    elif method == "cf":
        v, err, it = _gammainc_cf(z, x)
    else:
        raise ValueError(f"unknown method {method!r}")
    if it < 0:
        raise PrecisionError(f"incomplete gamma did not converge at z={z}, x={x}",
                             achieved=float("inf"))
    return ComplexEval(complex(v), float(err))
