"""Self-dual L-functions of degree one and two: completed values, Hardy Z, zeros.

An L-function is described by :class:`SelfDualLSpec`, i.e. by the completed
function

    Lambda(s) = Q^s Gamma(alpha s + beta) sum_n b(n) n^-s = w Lambda(1 - s).

Two evaluators work from the same description.

``lambda_smooth``
    The smoothed approximate functional equation: a sum over n of upper
    incomplete gamma terms and their mirror images at 1 - s.  One point at a
    time; this is the reference evaluator.

:class:`MellinGrid`
    The same Mellin integral Lambda(s) = int Phi(y) y^s dy/y of the theta
    series Phi(y) = sum b(n) phi_n(y), done by Gauss-Legendre quadrature in
    v = log|y| along a ray.  Phi is tabulated once per function, after which
    every s costs one pass over the nodes, so scans, plots and zero searches
    are cheap.

Both rotate the contour to y = e^{i theta} |y|.  For large t this trades the
cancellation e^{alpha pi t / 2} of the naive sum for a fixed e^c at the price
of more terms.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numba
import numpy as np
from numpy.polynomial import legendre
from scipy import special as sps

from .arith import character_values, is_fundamental_discriminant
from .curve import WeierstrassCurve, ap_table, dirichlet_coeffs
from .errors import (ConsistencyError, DependencyError, DomainError, IncompletenessError,
                     InferenceError, PrecisionError, ValidationError)
from .special import EPS, ComplexEval, _digamma, _gammainc, _loggamma, loggamma_array
from .zeta import ZeroList, find_sign_change_zeros, write_zero_table

log = logging.getLogger(__name__)

#: Hard ceiling on the number of Dirichlet coefficients any evaluation may request.
MAX_COEFFS = 60_000_000
#: Default cancellation budget: terms may exceed the result by about e^c.
DEFAULT_C = 8.0


# ---------------------------------------------------------------------------
# coefficient streams

class _Stream:
    """Caches b(0..m) and regrows geometrically on demand."""

    def __init__(self, limit):
        self.limit = int(limit or MAX_COEFFS)
        self._b = np.zeros(1)

    def _build(self, m):
        raise NotImplementedError

    def __call__(self, m: int) -> np.ndarray:
        m = int(m)
        if m > self.limit:
            raise DependencyError(f"{m} coefficients needed but the stream stops at {self.limit}")
        if m >= len(self._b):
            grow = min(self.limit, max(m, 2 * (len(self._b) - 1), 1024))
            self._b = self._build(grow)
        return self._b[:m + 1]


class CurveCoefficients(_Stream):
    """b(n) = a(n)/sqrt(n) of an elliptic curve, extended via the a(p) cache."""

    def __init__(self, curve: WeierstrassCurve, limit=None, *, accelerate=True, cache=True):
        super().__init__(limit)
        self.curve = curve
        self.accelerate = accelerate
        self.cache = cache

    def _build(self, m):
        table = ap_table(self.curve, max(m, 2), accelerate=self.accelerate, cache=self.cache)
        return dirichlet_coeffs(self.curve, m, table)


class CharacterCoefficients(_Stream):
    """b(n) = chi_d(n)."""

    def __init__(self, d: int, limit=None):
        super().__init__(limit)
        self.d = int(d)

    def _build(self, m):
        return character_values(self.d, m).astype(float)


class ArrayCoefficients(_Stream):
    """A fixed coefficient array; asking beyond it is a dependency error."""

    def __init__(self, b):
        b = np.asarray(b, dtype=float)
        super().__init__(len(b) - 1)
        self._b = b


# ---------------------------------------------------------------------------
# spec

@dataclass(frozen=True)
class SelfDualLSpec:
    """Everything the evaluators need about one self-dual L-function.

    ``w`` may be None until :func:`infer_root_number` fills it in.
    ``central_order`` is the order of vanishing at s = 1/2 when known; the zero
    counter needs it and computes it numerically otherwise.
    """

    Q: float
    alpha: float
    beta: float
    w: int | None
    coeffs: Callable[[int], np.ndarray] = field(repr=False, compare=False)
    label: str = ""
    central_order: int | None = None

    def __post_init__(self):
        if not self.Q > 0:
            raise ValidationError(f"Q must be positive, got {self.Q}")
        if self.alpha <= 0:
            raise ValidationError("alpha must be positive")
        if self.w not in (None, 1, -1):
            raise ValidationError(f"root number must be +1 or -1, got {self.w}")

    def b(self, m: int) -> np.ndarray:
        return self.coeffs(m)

    def with_root_number(self, w: int) -> "SelfDualLSpec":
        return replace(self, w=w)

    @property
    def z0(self) -> float:
        """alpha/2 + beta, the gamma argument at the centre."""
        return 0.5 * self.alpha + self.beta

    def phase(self, t):
        """theta_L(t) = t log Q + arg Gamma(alpha/2 + beta + i alpha t), continuous."""
        t = np.asarray(t, dtype=float)
        return t * math.log(self.Q) + loggamma_array(self.z0 + 1j * self.alpha * t).imag

    def phase_derivative(self, t: float) -> float:
        return math.log(self.Q) + self.alpha * _digamma(complex(self.z0, self.alpha * t)).real

    def log_norm(self, t):
        """log(sqrt(Q) |Gamma(alpha/2 + beta + i alpha t)|)."""
        t = np.asarray(t, dtype=float)
        return 0.5 * math.log(self.Q) + loggamma_array(self.z0 + 1j * self.alpha * t).real

    def smooth_count(self, T: float) -> float:
        """theta_L(T)/pi - m0/2, the count of zeros in (0, T] without S(T)."""
        return float(self.phase(T)) / math.pi - 0.5 * (self.central_order or 0)

    def mean_gap(self, t: float) -> float:
        """Local mean spacing pi / theta_L'(t), clamped to a sane range."""
        d = self.phase_derivative(t)
        return min(math.pi / max(d, 0.5), 2.0)


def curve_spec(curve: WeierstrassCurve, coefficient_bound: int | None = None, *,
               w: int | None = None, accelerate: bool = True, cache: bool = True,
               infer: bool = True) -> SelfDualLSpec:
    """Spec of L(E, s): Q = sqrt(N)/(2 pi), Gamma(s + 1/2), b(n) = a(n)/sqrt(n).

    The root number comes from ``w``, else from the curve, else (with
    ``infer``) from :func:`infer_root_number`.
    """
    if curve.conductor is None:
        raise DependencyError(f"curve {curve.name} has no conductor")
    stream = CurveCoefficients(curve, coefficient_bound, accelerate=accelerate, cache=cache)
    w = w if w is not None else curve.root_number
    spec = SelfDualLSpec(Q=math.sqrt(curve.conductor) / (2 * math.pi), alpha=1.0, beta=0.5,
                         w=w, coeffs=stream, label=curve.name, central_order=curve.rank)
    if spec.w is None and infer:
        spec = spec.with_root_number(infer_root_number(spec))
    return spec


def quadratic_spec(d: int, coefficient_bound: int | None = None) -> SelfDualLSpec:
    """Spec of L(s, chi_d): Q = sqrt(|d|/pi), Gamma((s + a)/2), w = +1."""
    d = int(d)
    if d == 1 or not is_fundamental_discriminant(d):
        raise ValidationError(f"{d} is not a fundamental discriminant other than 1")
    a = 0 if d > 0 else 1
    return SelfDualLSpec(Q=math.sqrt(abs(d) / math.pi), alpha=0.5, beta=0.5 * a, w=1,
                         coeffs=CharacterCoefficients(d, coefficient_bound),
                         label=f"chi_{d}", central_order=None)


# ---------------------------------------------------------------------------
# approximate functional equation

def rotation_angle(alpha: float, t: float, c: float = DEFAULT_C) -> float:
    """Contour angle theta for height t: alpha pi/2 - c/|t|, never negative in size."""
    at = abs(t)
    if at * alpha * math.pi / 2 <= c:
        return 0.0
    return math.copysign(alpha * math.pi / 2 - c / at, t)


def _truncation(spec, t, theta, digits):
    """Number of terms so the dropped tail is below 10^-digits of the result scale."""
    alpha = spec.alpha
    cosr = math.cos(theta / alpha)
    loss = max(0.0, (alpha * math.pi / 2 - abs(theta)) * abs(t))
    m = 10.0
    for _ in range(3):
        x = digits * math.log(10) + loss + math.log(m + 1) + math.log1p(abs(t)) + 3
        m = spec.Q * (x / cosr) ** alpha
    return max(int(math.ceil(m)), 2)


@numba.njit(cache=True)
def _afe_sum(b, m, logq, alpha, beta, s, theta, w, g1, g2, critical):
    """Sum of the incomplete-gamma terms n = 1..m.

    Returns (value, error, last term size, failed n or 0).  With ``critical``
    (Re s = 1/2, real b) the mirror term is the conjugate of the direct term.
    """
    inva = 1.0 / alpha
    z1 = alpha * s + beta
    s2 = 1.0 - s
    z2 = alpha * s2 + beta
    rot = np.exp(1j * theta * inva)
    total = 0j
    err = 0.0
    last = 0.0
    for n in range(1, m + 1):
        bn = b[n]
        if bn == 0.0:
            continue
        ln = math.log(n)
        base = math.exp(inva * (ln - logq))
        v1, e1, i1 = _gammainc(z1, base * rot, g1)
        if i1 < 0:
            return 0j, np.inf, 0.0, n
        p1 = np.exp(s * (logq - ln))
        a1 = p1 * v1
        if critical:
            term = bn * (a1 + w * np.conj(a1))
            err += abs(bn) * 2 * abs(p1) * e1
        else:
            v2, e2, i2 = _gammainc(z2, base * np.conj(rot), g2)
            if i2 < 0:
                return 0j, np.inf, 0.0, n
            p2 = np.exp(s2 * (logq - ln))
            term = bn * (a1 + w * p2 * v2)
            err += abs(bn) * (abs(p1) * e1 + abs(p2) * e2)
        total += term
        last = abs(term)
    return total, err, last, 0


def lambda_scale(spec: SelfDualLSpec, s: complex) -> float:
    """|Q^s Gamma(alpha s + beta)|, the size Lambda has when L(s) is of order one."""
    z = spec.alpha * s + spec.beta
    return math.exp(s.real * math.log(spec.Q) + _loggamma(z).real)


def lambda_smooth(spec: SelfDualLSpec, s, *, c: float = DEFAULT_C, theta: float | None = None,
                  digits: int = 10, terms: int | None = None,
                  verify: bool = False, mirror: bool = True) -> ComplexEval:
    """Completed Lambda(s) from the smoothed approximate functional equation.

    ``theta`` overrides the contour angle, ``terms`` the truncation.  With
    ``verify`` the sum is redone with twice the terms (and again, up to four
    doublings) until two truncations agree.  On the critical line the second
    sum is the conjugate of the first; ``mirror=False`` computes it directly,
    which is what self-checks of realness and symmetry need.
    """
    if spec.w is None:
        raise InferenceError(f"{spec.label}: root number unknown; run infer_root_number first")
    s = complex(s)
    t = s.imag
    if spec.alpha * math.pi * abs(t) / 2 > 600:
        raise DomainError(f"|t| = {abs(t):g} is beyond the double-precision range of Lambda")
    if theta is None:
        theta = rotation_angle(spec.alpha, t, c)
    if abs(theta) >= spec.alpha * math.pi / 2:
        raise DomainError("contour angle must stay below alpha pi / 2")
    m = terms or _truncation(spec, t, theta, digits)
    z1 = spec.alpha * s + spec.beta
    z2 = spec.alpha * (1 - s) + spec.beta
    g1 = complex(np.exp(_loggamma(z1)))
    g2 = complex(np.exp(_loggamma(z2)))
    critical = mirror and abs(s.real - 0.5) < 1e-15
    logq = math.log(spec.Q)
    scale = lambda_scale(spec, s)

    def run(mm):
        b = spec.b(mm)
        v, e, last, bad = _afe_sum(b, mm, logq, spec.alpha, spec.beta, s, theta,
                                   float(spec.w), g1, g2, critical)
        if bad:
            raise PrecisionError(f"incomplete gamma failed at n = {bad}", achieved=math.inf)
        return complex(v), e + 4 * last + 2 * EPS * m * abs(v)

    val, err = run(m)
    if verify:
        for _ in range(4):
            val2, err2 = run(2 * m)
            diff = abs(val2 - val)
            m *= 2
            val, err = val2, max(err2, diff)
            if diff <= 10.0 ** -digits * scale:
                break
        else:
            raise PrecisionError(f"{spec.label}: truncations disagree at s = {s}", achieved=err)
    if err > 1e-6 * scale:
        raise PrecisionError(f"{spec.label}: error {err:.3g} at s = {s} exceeds 1e-6 of the scale",
                             achieved=err)
    return ComplexEval(val, err)


def _rotor(w: int) -> complex:
    # w^(-1/2) with the branch sqrt(-1) = i, so Z = -i Lambda / norm when w = -1
    return 1.0 if w == 1 else -1j


def second_angle(spec, t, c=DEFAULT_C):
    """An alternative contour angle for height t, used for self-checks."""
    th = rotation_angle(spec.alpha, t, c)
    return th + math.copysign(0.3 * (spec.alpha * math.pi / 2 - abs(th)), t if t else 1.0)


def hardy_Z_complex(spec: SelfDualLSpec, t: float, *, c: float = DEFAULT_C, **kw):
    """The rotated value w^-1/2 Lambda(1/2+it) / (sqrt(Q) |Gamma|) before discarding Im.

    Returns (value, residual) where the residual combines the imaginary part
    with the disagreement between two contour angles; the latter is what
    actually exposes a wrong root number or bad coefficients.
    """
    t = float(t)
    s = 0.5 + 1j * t
    norm = math.exp(float(spec.log_norm(t)))
    lam = lambda_smooth(spec, s, c=c, **kw)
    lam2 = lambda_smooth(spec, s, c=c, theta=second_angle(spec, t, c), **kw)
    z = _rotor(spec.w) * lam.value / norm
    z2 = _rotor(spec.w) * lam2.value / norm
    return z, max(abs(z.imag), abs(z - z2))


def hardy_Z(spec: SelfDualLSpec, t: float, *, tol: float = 1e-8, check: bool = True,
            c: float = DEFAULT_C, **kw) -> float:
    """Real Hardy function of the L-function at height t.

    With ``check`` a second contour angle is evaluated and a residual above
    ``tol`` (relative to max(1, |Z|)) raises :class:`ConsistencyError`.
    """
    if not check:
        lam = lambda_smooth(spec, 0.5 + 1j * float(t), c=c, **kw)
        return float((_rotor(spec.w) * lam.value).real / math.exp(float(spec.log_norm(t))))
    z, res = hardy_Z_complex(spec, t, c=c, **kw)
    if res > tol * max(1.0, abs(z.real)):
        raise ConsistencyError(f"{spec.label}: Hardy Z residual {res:.3g} at t = {t:g} "
                               "(wrong root number or coefficients?)")
    return float(z.real)


_PROBES = (0.7, 2.9, 5.3)


def infer_root_number(spec: SelfDualLSpec, probes=_PROBES, *, tol: float = 1e-8) -> int:
    """The sign w for which Lambda is independent of the contour angle.

    Only the true root number makes the approximate functional equation an
    identity, so a wrong sign shows up as disagreement between two angles.
    """
    passing = []
    worst = {}
    for w in (1, -1):
        cand = spec.with_root_number(w)
        res = 0.0
        for t in probes:
            z, r = hardy_Z_complex(cand, t)
            res = max(res, r / max(1.0, abs(z)))
        worst[w] = res
        if res < tol:
            passing.append(w)
    if len(passing) != 1:
        raise InferenceError(f"{spec.label}: root number ambiguous (residuals {worst})")
    return passing[0]


# ---------------------------------------------------------------------------
# Mellin quadrature

@numba.njit(cache=True)
def _theta_series(b, v, theta, logq, alpha, beta, limits):
    """Phi(e^{v_k + i theta}) at every node.

    phi_n(y) = (1/alpha) (yn/Q)^(beta/alpha) exp(-(yn/Q)^(1/alpha)); the
    exponentials are stepped multiplicatively for alpha in {1, 1/2} and
    re-anchored every 32 terms.
    """
    K = len(v)
    out = np.zeros(K, dtype=np.complex128)
    inva = 1.0 / alpha
    ba = beta * inva
    mode = 1 if alpha == 1.0 else (2 if alpha == 0.5 else 0)
    for k in range(K):
        m = limits[k]
        if m < 1:
            continue
        logu = v[k] - logq + 1j * theta            # log(y/Q)
        u = np.exp(logu)
        upow = np.exp(ba * logu)
        acc = 0j
        if mode == 1:
            r = np.exp(-u)
            e = r
            for n in range(1, m + 1):
                if n % 32 == 0:
                    e = np.exp(-u * n)
                bn = b[n]
                if bn != 0.0:
                    acc += bn * (n ** ba) * e
                e *= r
        elif mode == 2:
            u2 = u * u
            step = np.exp(-3.0 * u2)                   # e^{-(2n+1)u^2} at n = 1
            q = np.exp(-2.0 * u2)
            e = np.exp(-u2)
            for n in range(1, m + 1):
                if n % 32 == 0:
                    e = np.exp(-u2 * n * n)
                    step = np.exp(-u2 * (2 * n + 1))
                bn = b[n]
                if bn != 0.0:
                    acc += bn * (n ** ba) * e
                e *= step
                step *= q
        else:
            for n in range(1, m + 1):
                bn = b[n]
                if bn != 0.0:
                    acc += bn * (n ** ba) * np.exp(-np.exp(inva * (logu + math.log(n))))
        out[k] = inva * upow * acc
    return out


@numba.njit(cache=True)
def _mellin_eval(phi, lv, wt, w, s_arr, shift, deriv):
    """sum_k wt_k [phi_k L_k^j e^{L_k s} + w (-1)^j conj(phi_k) conj(L_k)^j e^{conj(L_k)(1-s)}].

    ``lv`` holds L_k = v_k + i theta; every term is multiplied by
    e^{-shift[j]} to keep it in range.
    """
    out = np.zeros(len(s_arr), dtype=np.complex128)
    sg = -1.0 if deriv % 2 else 1.0
    for j in range(len(s_arr)):
        s = s_arr[j]
        acc = 0j
        for k in range(len(lv)):
            L = lv[k]
            Lc = np.conj(L)
            pk = phi[k]
            if deriv:
                t1 = pk * L ** deriv * np.exp(L * s - shift[j])
                t2 = np.conj(pk) * Lc ** deriv * np.exp(Lc * (1.0 - s) - shift[j])
            else:
                t1 = pk * np.exp(L * s - shift[j])
                t2 = np.conj(pk) * np.exp(Lc * (1.0 - s) - shift[j])
            acc += wt[k] * (t1 + w * sg * t2)
        out[j] = acc
    return out


@numba.njit(cache=True)
def _critical_Z(phi, lv, wt, t_arr, lognorm, rot_re, rot_im, w):
    """Real Hardy Z on the critical line: 2 Re(rot * sum) for w = 1, analogous for w = -1."""
    out = np.empty(len(t_arr))
    for j in range(len(t_arr)):
        s = 0.5 + 1j * t_arr[j]
        acc = 0j
        for k in range(len(lv)):
            acc += wt[k] * phi[k] * np.exp(lv[k] * s - lognorm[j])
        # Lambda = acc + w conj(acc)
        lam = acc + w * np.conj(acc)
        out[j] = (complex(rot_re, rot_im) * lam).real
    return out


def _gl_panels(lo, hi, width, order=20):
    x, wgt = legendre.leggauss(order)
    n = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    v = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * wgt[None, :]).ravel()
    return v, wt


@dataclass(frozen=True)
class QuadratureNodes:
    """Nodes v_k (in log|y|) and weights along the ray of angle ``theta``."""

    v: np.ndarray
    wt: np.ndarray
    theta: float
    cutoff: float      # Re((y n / Q)^(1/alpha)) beyond which terms are dropped

    @property
    def lv(self):
        return self.v + 1j * self.theta


def mellin_nodes(alpha: float, Q: float, height: float, *, c: float = DEFAULT_C,
                 sigma_max: float = 2.0, digits: float = 15.0) -> QuadratureNodes:
    """Quadrature nodes good for 1/2 <= Re s <= sigma_max and |Im s| <= height.

    The v-spectrum of the integrand decays like e^{-kappa |tau|} with
    kappa = alpha pi/2 - theta; nodes resolve it down to 10^-digits e^-c.
    """
    theta = max(0.0, rotation_angle(alpha, height, c))
    kappa = alpha * math.pi / 2 - theta
    cosr = math.cos(theta / alpha)
    budget = digits * math.log(10) + c
    vmax = 0.0
    for _ in range(4):
        x = budget + sigma_max * vmax + 5
        vmax = max(math.log(Q) + alpha * math.log(x / cosr), 1.0)
    omega = budget / kappa + height + 5
    v, wt = _gl_panels(0.0, vmax, 18.0 / omega)
    return QuadratureNodes(v, wt, theta, x)


class MellinGrid:
    """Tabulated theta series of one spec, for evaluations up to ``height``."""

    def __init__(self, spec: SelfDualLSpec, height: float, *, c: float = DEFAULT_C,
                 sigma_max: float = 2.0, nodes: QuadratureNodes | None = None):
        if spec.w is None:
            raise InferenceError(f"{spec.label}: root number unknown")
        self.spec = spec
        self.height = float(height)
        self.nodes = nodes or mellin_nodes(spec.alpha, spec.Q, self.height, c=c,
                                           sigma_max=sigma_max)
        self.phi = theta_series(spec, self.nodes)

    # Lambda(s) e^{-shift}, with the shift chosen per point
    def lam(self, s, deriv: int = 0) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        shift = np.zeros(len(s))
        return _mellin_eval(self.phi, self.nodes.lv, self.nodes.wt, float(self.spec.w), s,
                            shift, deriv)

    def L(self, s) -> np.ndarray:
        """L(s) = Lambda(s) / (Q^s Gamma(alpha s + beta)), computed in log scale."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        spec = self.spec
        lg = s * math.log(spec.Q) + loggamma_array(spec.alpha * s + spec.beta)
        shift = lg.real
        lam = _mellin_eval(self.phi, self.nodes.lv, self.nodes.wt, float(spec.w), s, shift, 0)
        return lam * np.exp(-1j * lg.imag)

    def Z(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        rot = _rotor(self.spec.w)
        rot = complex(rot)
        return _critical_Z(self.phi, self.nodes.lv, self.nodes.wt, t,
                           np.asarray(self.spec.log_norm(t), dtype=float),
                           rot.real, rot.imag, float(self.spec.w))

    def Z_scalar(self, t: float) -> float:
        return float(self.Z(np.array([t]))[0])

    def central_taylor(self, kmax: int) -> np.ndarray:
        """Z^(k)(0) for k = 0..kmax, from exact s-derivatives of the quadrature."""
        spec = self.spec
        ks = np.arange(kmax + 1)
        lam = np.array([self.lam(0.5, int(k))[0] for k in ks])
        # Z(t) = rot Lambda(1/2 + it) g(t), g = exp(-log_norm(t)); expand both in t
        lam_t = lam * (1j ** ks) / sps.factorial(ks)
        g = _norm_series(spec, kmax)
        z = np.convolve(lam_t, g)[:kmax + 1] * _rotor(spec.w)
        return (z * sps.factorial(ks)).real

    def arg_change(self, T: float, sigma_top: float = 2.0) -> float:
        """Continuous change of arg L(sigma + iT) from sigma_top down to 1/2.

        Steps are bisected locally until no step turns the phase by pi/4.
        """
        sig = np.linspace(sigma_top, 0.5, 13)
        vals = self.L(sig + 1j * T)
        for _ in range(30):
            dphi = np.angle(vals[1:] / vals[:-1])
            bad = np.flatnonzero(np.abs(dphi) >= math.pi / 4)
            if not len(bad):
                return float(np.sum(dphi))
            mids = 0.5 * (sig[bad] + sig[bad + 1])
            if np.min(np.abs(sig[bad] - sig[bad + 1])) < 1e-12:
                break
            sig = np.insert(sig, bad + 1, mids)
            vals = np.insert(vals, bad + 1, self.L(mids + 1j * T))
        raise ConsistencyError(f"{self.spec.label}: argument not resolved at T = {T}")

    def zero_count(self, T: float, central_order: int) -> float:
        """N(T) = (theta_L(T) + arg L(1/2 + iT))/pi - m0/2, unrounded."""
        spec = self.spec
        top = complex(self.L(2.0 + 1j * T)[0])
        arg = math.atan2(top.imag, top.real) + self.arg_change(T)
        return (float(spec.phase(T)) + arg) / math.pi - 0.5 * central_order


def theta_series(spec: SelfDualLSpec, nodes: QuadratureNodes) -> np.ndarray:
    alpha = spec.alpha
    cosr = math.cos(nodes.theta / alpha)
    mmax = spec.Q * (nodes.cutoff / cosr) ** alpha
    limits = np.minimum(np.floor(mmax * np.exp(-nodes.v)), mmax).astype(np.int64)
    b = spec.b(int(limits.max()))
    return _theta_series(b, nodes.v, nodes.theta, math.log(spec.Q), alpha, spec.beta, limits)


def _norm_series(spec, kmax):
    """Taylor coefficients in t of exp(-log(sqrt(Q)|Gamma(z0 + i alpha t)|))."""
    z0 = spec.z0
    # Re log Gamma(z0 + i alpha t) = sum_k Re((i alpha)^k psi^(k-1)(z0)) t^k / k!
    c = np.zeros(kmax + 1)
    c[0] = sps.gammaln(z0) + 0.5 * math.log(spec.Q)
    for k in range(2, kmax + 1, 2):
        c[k] = ((1j * spec.alpha) ** k).real * sps.polygamma(k - 1, z0) / math.factorial(k)
    return _exp_series(-c)


def _exp_series(c):
    """Coefficients of exp(sum c_k t^k)."""
    n = len(c)
    out = np.zeros(n)
    out[0] = math.exp(c[0])
    # e' = (sum k c_k t^{k-1}) e
    for m in range(1, n):
        out[m] = sum(k * c[k] * out[m - k] for k in range(1, m + 1)) / m
    return out


def central_order(spec: SelfDualLSpec, *, max_order: int = 12, rel: float = 1e-6) -> int:
    """Numerical order of vanishing of Z at t = 0."""
    grid = MellinGrid(spec, 1.0)
    taylor = central_taylor_scaled(grid, max_order)
    big = np.max(np.abs(taylor))
    for k, v in enumerate(taylor):
        if abs(v) > rel * big:
            return k
    return max_order


def central_taylor_scaled(grid: MellinGrid, kmax: int) -> np.ndarray:
    """Taylor coefficients Z^(k)(0)/k! times h^k, h = a typical zero spacing."""
    h = grid.spec.mean_gap(0.0)
    z = grid.central_taylor(kmax)
    ks = np.arange(kmax + 1)
    return z / sps.factorial(ks) * h ** ks


# ---------------------------------------------------------------------------
# zeros

@dataclass(frozen=True)
class LZeroList(ZeroList):
    """Zero ordinates of one L-function, with the spec that produced them."""

    spec: SelfDualLSpec | None = field(default=None, repr=False, compare=False)


def write_lzeros(path, zeros: LZeroList) -> None:
    spec = zeros.spec
    meta = {"label": zeros.label, "height": zeros.height, "complete": zeros.complete,
            "count": len(zeros)}
    if spec is not None:
        meta.update(Q=spec.Q, alpha=spec.alpha, beta=spec.beta, w=spec.w,
                    central_order=spec.central_order)
    write_zero_table(path, zeros, meta)


def _start_height(m0: int) -> float:
    # Z ~ t^m0 near 0; keep the first grid point clear of the multiple zero
    return 1e-6 if m0 == 0 else 0.05


def _clear_height(fn, T, scale):
    """A height near T where |Z| is not small against its typical size ``scale``."""
    for k in range(40):
        t = T + 0.0131 * k
        if abs(fn(t)) > 0.05 * scale:
            return t
    return T


def find_zeros(spec: SelfDualLSpec, T: float, *, c: float = DEFAULT_C, max_refine: int = 6,
               strict: bool = True, xtol: float = 1e-10) -> LZeroList:
    """Zeros 1/2 + i gamma with 0 < gamma <= T, certified by the argument principle.

    The central zero (of order ``spec.central_order``, computed when unknown)
    is not listed.
    """
    if spec.w is None:
        spec = spec.with_root_number(infer_root_number(spec))
    grid = MellinGrid(spec, T + 1.0, c=c)
    m0 = spec.central_order
    if m0 is None:
        m0 = central_order(spec)
        spec = replace(spec, central_order=m0)
        grid.spec = spec
    scale = float(np.median(np.abs(grid.Z(np.linspace(0.5, T, 64)))))
    T = _clear_height(grid.Z_scalar, float(T), scale)

    def count(hi):
        n = grid.zero_count(hi, m0)
        if abs(n - round(n)) > 0.1:
            raise ConsistencyError(f"{spec.label}: zero count {n:.4f} at T = {hi} not integral")
        return int(round(n))

    roots, expected, _ = find_sign_change_zeros(
        grid.Z, grid.Z_scalar, _start_height(m0), T, lambda t: 0.25 * spec.mean_gap(t),
        count, max_refine=max_refine, xtol=xtol, label=spec.label)
    ok = len(roots) == expected
    zl = LZeroList(np.asarray(roots), T, complete=ok, label=spec.label, spec=spec)
    if not ok and strict:
        raise IncompletenessError(f"{spec.label}: found {len(roots)} zeros up to {T:.6f}, "
                                  f"argument principle gives {expected}", zl)
    return zl


# ---------------------------------------------------------------------------
# families of quadratic characters

@numba.njit(cache=True)
def _z_point(phi, lv, wt, t, half_logq, z0, alpha):
    """Z(t) and Z'(t) for a root number +1 spec."""
    s = 0.5 + 1j * t
    zg = z0 + 1j * alpha * t
    shift = half_logq + _loggamma(zg).real
    dshift = -alpha * _digamma(zg).imag
    acc = 0j
    dacc = 0j
    for k in range(len(lv)):
        e = wt[k] * phi[k] * np.exp(lv[k] * s - shift)
        acc += e
        dacc += e * (1j * lv[k] - dshift)
    return 2.0 * acc.real, 2.0 * dacc.real


@numba.njit(cache=True)
def _cubic_guess(ts, vals, i):
    """Root in [ts[i], ts[i+1]] of the cubic through four neighbouring scan points."""
    j = min(max(i - 1, 0), len(ts) - 4)
    if j < 0:
        return (ts[i] * vals[i + 1] - ts[i + 1] * vals[i]) / (vals[i + 1] - vals[i])
    a = ts[i]
    b = ts[i + 1]
    fa = vals[i]
    x = (a * vals[i + 1] - b * fa) / (vals[i + 1] - fa)
    for _ in range(8):
        p = 0.0
        dp = 0.0
        for m in range(j, j + 4):
            lm = 1.0
            dl = 0.0
            for q in range(j, j + 4):
                if q != m:
                    r = 1.0
                    for u in range(j, j + 4):
                        if u != m and u != q:
                            r *= (x - ts[u]) / (ts[m] - ts[u])
                    dl += r / (ts[m] - ts[q])
                    lm *= (x - ts[q]) / (ts[m] - ts[q])
            p += vals[m] * lm
            dp += vals[m] * dl
        if dp == 0.0:
            break
        xn = x - p / dp
        if xn <= a or xn >= b:
            break
        x = xn
    return x


@numba.njit(cache=True)
def _refine(phi, lv, wt, ts, vals, half_logq, z0, alpha, xtol):
    """Newton inside every sign change of the scan, falling back to bisection."""
    out = []
    for i in range(len(ts) - 1):
        fa = vals[i]
        fb = vals[i + 1]
        if fa * fb >= 0:
            continue
        a = ts[i]
        b = ts[i + 1]
        x = _cubic_guess(ts, vals, i)
        for _ in range(60):
            f, df = _z_point(phi, lv, wt, x, half_logq, z0, alpha)
            if f == 0.0:
                break
            if f * fa > 0:
                a, fa = x, f
            else:
                b, fb = x, f
            step = f / df if df != 0.0 else 0.0
            xn = x - step
            if df == 0.0 or xn <= a or xn >= b:
                xn = 0.5 * (a + b)
            if abs(xn - x) < xtol:
                x = xn
                break
            x = xn
        out.append(x)
    return np.array(out)


class _FamilyBlock:
    """Shared nodes and scan matrix for one sign of discriminant."""

    def __init__(self, sign, dmax, T, c):
        self.alpha = 0.5
        self.beta = 0.0 if sign > 0 else 0.5
        self.z0 = 0.25 + self.beta
        Qmax = math.sqrt(dmax / math.pi)
        self.nodes = mellin_nodes(self.alpha, Qmax, T + 1.0, c=c)
        self.cosr = math.cos(self.nodes.theta / self.alpha)
        gap = math.pi / (math.log(Qmax) + self.alpha * math.log(self.alpha * T + 1))
        self.ts = np.arange(1e-6, T + 0.3, 0.2 * gap)
        lg = loggamma_array(self.z0 + 1j * self.alpha * self.ts).real
        lv = self.nodes.lv
        self.P = (self.nodes.wt[:, None]
                  * np.exp(lv[:, None] * (0.5 + 1j * self.ts)[None, :] - lg[None, :]))

    def phi(self, spec):
        return theta_series(spec, self.nodes)


def _family_member(block, d, T, xtol):
    spec = quadratic_spec(d)
    phi = block.phi(spec)
    half_logq = 0.5 * math.log(spec.Q)
    vals = 2.0 * (phi @ block.P).real * math.exp(-half_logq)
    nodes = block.nodes
    m0 = 0
    if abs(vals[0]) < 1e-8:
        grid = MellinGrid.__new__(MellinGrid)
        grid.spec, grid.height, grid.nodes, grid.phi = spec, T + 1.0, nodes, phi
        m0 = central_order(spec)
    spec = replace(spec, central_order=m0)
    grid = MellinGrid.__new__(MellinGrid)
    grid.spec, grid.height, grid.nodes, grid.phi = spec, T + 1.0, nodes, phi
    Tc = _clear_height(grid.Z_scalar, T, float(np.median(np.abs(vals))))
    keep = block.ts <= Tc
    ts = np.append(block.ts[keep], Tc)
    vals = np.append(vals[keep], grid.Z_scalar(Tc))
    if m0:
        keep = ts >= _start_height(m0)
        ts, vals = ts[keep], vals[keep]
    expected = int(round(grid.zero_count(Tc, m0)))
    roots = _refine(phi, nodes.lv, nodes.wt, ts, vals, half_logq, block.z0, block.alpha, xtol)
    refine = 1
    while len(roots) != expected and refine < 16:
        refine *= 2
        ts = np.linspace(ts[0], Tc, refine * len(ts))
        vals = grid.Z(ts)
        roots = _refine(phi, nodes.lv, nodes.wt, ts, vals, half_logq, block.z0, block.alpha,
                        xtol)
    return LZeroList(np.asarray(roots), Tc, complete=len(roots) == expected,
                     label=spec.label, spec=spec)


def family_zeros(ds, T: float, *, c: float = 12.0, xtol: float = 1e-9,
                 progress: Callable[[int, int], None] | None = None) -> dict:
    """Certified zero lists up to height T for many quadratic characters.

    All discriminants of one sign share quadrature nodes (sized for the
    largest |d|) and a precomputed scan matrix, so each member costs one
    theta-series tabulation, a matrix-vector product, root refinement and
    the argument-principle count.  Returns {d: LZeroList}.
    """
    ds = [int(d) for d in ds]
    out = {}
    for sign in (1, -1):
        group = [d for d in ds if d * sign > 0]
        if not group:
            continue
        block = _FamilyBlock(sign, max(abs(d) for d in group), float(T), c)
        for i, d in enumerate(group):
            out[d] = _family_member(block, d, float(T), xtol)
            if progress is not None and i % 1000 == 0:
                progress(i, len(group))
    return {d: out[d] for d in ds}
