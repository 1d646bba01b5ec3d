"""Elliptic curves over Q: invariants, traces of Frobenius and Dirichlet coefficients."""
from __future__ import annotations

import hashlib
import logging
import math
import os
import re
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from . import _pointcount as pc
from .arith import primes_upto, smallest_prime_factors
from .errors import (DependencyError, ParseError, ReductionError, SingularCurveError,
                     ValidationError)

log = logging.getLogger(__name__)

#: Residue arithmetic in the kernels needs p below this.
MAX_PRIME = 1 << 30


@dataclass(frozen=True)
class CurveInvariants:
    b2: int
    b4: int
    b6: int
    b8: int
    c4: int
    c6: int
    disc: int


def _invariants(a1, a2, a3, a4, a6) -> CurveInvariants:
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return CurveInvariants(b2, b4, b6, b8, c4, c6, disc)


@dataclass(frozen=True)
class WeierstrassCurve:
    """``y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6``, assumed globally minimal.

    The conductor is trusted input (it is only checked for compatibility with
    the discriminant).  ``rank`` is the claimed rank and ``root_number`` the
    sign of the functional equation, when known.
    """

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int | None = None
    rank: int | None = None
    root_number: int | None = None
    label: str = ""
    _inv: CurveInvariants = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, int(getattr(self, name)))
        inv = _invariants(self.a1, self.a2, self.a3, self.a4, self.a6)
        if inv.disc == 0:
            raise SingularCurveError(f"{self.coefficients} is singular (discriminant 0)")
        object.__setattr__(self, "_inv", inv)
        if self.conductor is not None:
            n = int(self.conductor)
            object.__setattr__(self, "conductor", n)
            if n <= 0:
                raise ValidationError(f"conductor must be positive, got {n}")
            # strip common factors with the discriminant; anything left is a
            # prime of N not dividing the discriminant
            g = math.gcd(n, inv.disc)
            while g > 1:
                n //= g
                g = math.gcd(n, inv.disc)
            if n != 1:
                raise ValidationError(
                    f"conductor {self.conductor} has a prime factor not dividing "
                    f"the discriminant {inv.disc}")
        if self.root_number not in (None, 1, -1):
            raise ValidationError(f"root number must be +1 or -1, got {self.root_number}")
        if self.rank is not None and self.rank < 0:
            raise ValidationError(f"rank must be nonnegative, got {self.rank}")

    @property
    def coefficients(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def curve_id(self) -> str:
        text = "[" + ",".join(str(a) for a in self.coefficients) + "]"
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @property
    def name(self) -> str:
        return self.label or "[" + ",".join(str(a) for a in self.coefficients) + "]"

    def __str__(self):
        s = "[" + ", ".join(str(a) for a in self.coefficients) + "]"
        if self.conductor is not None:
            s += f" N={self.conductor}"
        if self.rank is not None:
            s += f" r={self.rank}"
        if self.root_number is not None:
            s += f" w={self.root_number:+d}"
        return s

    def is_bad(self, p: int) -> bool:
        if self.conductor is not None:
            return self.conductor % p == 0
        return self._inv.disc % p == 0


def invariants(curve: WeierstrassCurve) -> CurveInvariants:
    """b- and c-invariants and discriminant; satisfies 1728 disc = c4^3 - c6^2."""
    return curve._inv


_CURVE_RE = re.compile(r"\s*\[([^\]]*)\]\s*(.*)$", re.S)
_TRAILER_RE = re.compile(r"([Nrw])\s*=\s*([+-]?\d+)")


def parse_curve(text: str) -> WeierstrassCurve:
    """Parse ``[a1,a2,a3,a4,a6]`` with an optional ``N=.. r=.. w=..`` trailer."""
    m = _CURVE_RE.match(text)
    if not m:
        pos = text.find("[")
        raise ParseError("expected '[a1,a2,a3,a4,a6]'", 0 if pos < 0 else pos)
    body, trailer = m.group(1), m.group(2)
    parts = body.split(",")
    if len(parts) != 5:
        raise ParseError(f"expected 5 coefficients, found {len(parts)}", m.start(1))
    coeffs = []
    offset = m.start(1)
    for part in parts:
        token = part.strip().replace(" ", "")
        if not re.fullmatch(r"[+-]?\d+", token):
            raise ParseError(f"bad coefficient {part.strip()!r}", offset)
        coeffs.append(int(token))
        offset += len(part) + 1
    extra = {}
    rest = trailer
    tail_start = m.start(2)
    for t in _TRAILER_RE.finditer(trailer):
        extra[t.group(1)] = int(t.group(2))
    rest = _TRAILER_RE.sub("", trailer).strip()
    if rest:
        raise ParseError(f"unexpected trailing text {rest!r}", tail_start + trailer.find(rest))
    return WeierstrassCurve(*coeffs, conductor=extra.get("N"), rank=extra.get("r"),
                            root_number=extra.get("w"))


def _named(text, label):
    c = parse_curve(text)
    return WeierstrassCurve(*c.coefficients, conductor=c.conductor, rank=c.rank,
                            root_number=c.root_number, label=label)


#: Curves used throughout: smallest known conductor of ranks 1..7 and 11, a
#: rank-0 comparison curve, and a curve of rank at least 24.
CURVES = {
    "E1": _named("[0,0,1,-1,0] N=37 r=1", "E1"),
    "E2": _named("[0,1,1,-2,0] N=389 r=2", "E2"),
    "E3": _named("[0,0,1,-7,6] N=5077 r=3", "E3"),
    "E4": _named("[1,-1,0,-79,289] N=234446 r=4", "E4"),
    "E5": _named("[0,0,1,-79,342] N=19047851 r=5", "E5"),
    "E6": _named("[1,1,0,-2582,48720] N=5187563742 r=6", "E6"),
    "E7": _named("[0,0,0,-10012,346900] N=382623908456 r=7", "E7"),
    "E11": _named("[0,0,1,-16359067,26274178986] N=18031737725935636520843 r=11", "E11"),
    "E24": _named("[1,0,1,-120039822036992245303534619191166796374,"
                  "504224992484910670010801799168082726759443756222911415116] r=24", "E24"),
    "E15": _named("[1,1,1,0,0] N=15 r=0", "E15"),
}


def get_curve(name_or_text: str) -> WeierstrassCurve:
    key = name_or_text.strip()
    if key in CURVES:
        return CURVES[key]
    if key.upper() in CURVES:
        return CURVES[key.upper()]
    return parse_curve(key)


# ---------------------------------------------------------------------------
# traces of Frobenius

def _residues(value: int, primes: np.ndarray) -> np.ndarray:
    if abs(value) < (1 << 62):
        return np.mod(np.int64(value), primes)
    return np.array([value % p for p in primes.tolist()], dtype=np.int64)


def _kernel_inputs(curve, primes):
    r = [_residues(a, primes) for a in curve.coefficients]
    if curve.conductor is None:
        nmod = np.full(len(primes), -1, dtype=np.int64)
    else:
        nmod = _residues(curve.conductor, primes)
    return r, nmod


def _check_primes(primes):
    if len(primes) and primes[-1] >= MAX_PRIME:
        raise ValueError(f"primes must stay below {MAX_PRIME}")


def ap_good(curve: WeierstrassCurve, p: int) -> int:
    """a(p) = p + 1 - #E(F_p) at a prime of good reduction.

    Character sum over the short model for p > 3, point enumeration for p = 2, 3.
    """
    p = int(p)
    if curve.is_bad(p) or curve._inv.disc % p == 0:
        raise ReductionError(f"{p} is a prime of bad reduction for {curve.name}")
    _check_primes(np.array([p]))
    r = [a % p for a in curve.coefficients]
    if p <= 3:
        return p + 1 - int(pc.count_points_naive(*r, p))
    inv = curve._inv
    return int(pc.ap_charsum_short((-27 * inv.c4) % p, (-54 * inv.c6) % p, p))


def ap_bad(curve: WeierstrassCurve, p: int) -> int:
    """a(p) in {-1, 0, 1} at a prime dividing the conductor."""
    p = int(p)
    if not curve.is_bad(p):
        raise ReductionError(f"{p} does not divide the conductor of {curve.name}")
    inv = curve._inv
    if p <= 3:
        r = [a % p for a in curve.coefficients]
        return p + 1 - int(pc.count_points_naive(*r, p))
    if inv.c4 % p == 0:
        return 0
    return int(pc.legendre((-inv.c6) % p, p))


def ap(curve: WeierstrassCurve, p: int) -> int:
    return ap_bad(curve, p) if curve.is_bad(p) else ap_good(curve, p)


def ap_naive(curve: WeierstrassCurve, p: int) -> int:
    """a(p) from counting every solution of the full Weierstrass equation (O(p^2))."""
    r = [a % p for a in curve.coefficients]
    return p + 1 - int(pc.count_points_naive(*r, p))


def ap_bsgs(curve: WeierstrassCurve, p: int, max_points: int = 8) -> int | None:
    """a(p) by baby-step/giant-step, ``None`` if the group order stays ambiguous."""
    inv = curve._inv
    a = int(pc.bsgs_ap((-27 * inv.c4) % p, (-54 * inv.c6) % p, p, max_points))
    return None if a == pc.AMBIGUOUS else a


@dataclass(frozen=True)
class APTable:
    """a(p) for every prime up to ``bound``."""

    curve_id: str
    bound: int
    primes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    bad: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.primes)

    def __getitem__(self, p):
        i = np.searchsorted(self.primes, p)
        if i == len(self.primes) or self.primes[i] != p:
            if p > self.bound:
                raise DependencyError(f"a({p}) not available: table bound is {self.bound}")
            raise KeyError(p)
        return int(self.values[i])

    def as_dict(self) -> dict:
        return dict(zip(self.primes.tolist(), self.values.tolist()))

    def restrict(self, bound: int) -> "APTable":
        k = np.searchsorted(self.primes, bound, side="right")
        return APTable(self.curve_id, bound, self.primes[:k], self.values[:k], self.bad[:k])

    def hasse_ok(self) -> bool:
        good = ~self.bad
        limit = np.floor(2 * np.sqrt(self.primes[good].astype(float)))
        return bool(np.all(np.abs(self.values[good]) <= limit)
                    and np.all(np.abs(self.values[self.bad]) <= 1))


# cache file: header + (p, a(p), bad) records
_MAGIC = b"APTB"
_VERSION = 1
_HEADER = struct.Struct("<4sI16sQQ")
_RECORD = np.dtype([("p", "<i8"), ("a", "<i8"), ("bad", "<i8")])


def default_cache_dir() -> Path:
    env = os.environ.get("RANKZETA_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "rankzeta"


def _cache_path(cache_dir: Path, curve_id: str, bound: int) -> Path:
    return Path(cache_dir) / f"ap_{curve_id}_{bound}.bin"


def save_ap_table(table: APTable, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rec = np.empty(len(table), dtype=_RECORD)
    rec["p"], rec["a"], rec["bad"] = table.primes, table.values, table.bad
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, table.curve_id.encode(), table.bound, len(table)))
        fh.write(rec.tobytes())
    os.replace(tmp, path)  # readers never see a half-written file


def load_ap_table(path, curve_id: str | None = None) -> APTable:
    """Read a cached table; raises ``ValueError`` if the file is damaged."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated header")
    magic, version, cid, bound, count = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != _VERSION:
        raise ValueError("bad magic or version")
    cid = cid.decode()
    if curve_id is not None and cid != curve_id:
        raise ValueError("curve hash mismatch")
    body = raw[_HEADER.size:]
    if len(body) != count * _RECORD.itemsize:
        raise ValueError("record count does not match file size")
    rec = np.frombuffer(body, dtype=_RECORD)
    primes = rec["p"].copy()
    if count and (np.any(np.diff(primes) <= 0) or primes[-1] > bound):
        raise ValueError("primes not ascending")
    table = APTable(cid, int(bound), primes, rec["a"].copy(), rec["bad"].astype(bool))
    if not table.hasse_ok():
        raise ValueError("entries violate the Hasse bound")
    return table


def _find_cached(cache_dir, curve_id, bound):
    cache_dir = Path(cache_dir)
    if not cache_dir.is_dir():
        return None
    best = None
    for f in cache_dir.glob(f"ap_{curve_id}_*.bin"):
        try:
            b = int(f.stem.rsplit("_", 1)[1])
        except ValueError:
            continue
        if b >= bound and (best is None or b < best[0]):
            best = (b, f)
    return best[1] if best else None


def compute_ap(curve: WeierstrassCurve, primes: np.ndarray, *, accelerate: bool = False,
               threshold: int = 20000, max_points: int = 8):
    """a(p) and bad-reduction flags for an explicit ascending array of primes."""
    primes = np.asarray(primes, dtype=np.int64)
    _check_primes(primes)
    r, nmod = _kernel_inputs(curve, primes)
    values, flags = pc.ap_kernel(*r, nmod, primes, accelerate, threshold, max_points)
    if np.any(flags == 2):
        bad_p = primes[flags == 2][:5].tolist()
        raise ReductionError(
            f"{curve.name}: primes {bad_p} divide the discriminant but not the conductor; "
            "the model is not minimal there")
    nfall = int(np.sum(flags == 3))
    if nfall:
        log.info("%s: %d primes fell back to character sums", curve.name, nfall)
    return values, flags == 1


def ap_table(curve: WeierstrassCurve, bound: int, *, accelerate: bool = False,
             threshold: int = 20000, cache=True, chunk: int = 1 << 18) -> APTable:
    """a(p) for all p <= bound, persisted to and reused from an on-disk cache.

    ``accelerate`` switches primes above ``threshold`` to baby-step/giant-step
    (with a character-sum fallback whenever the group order is ambiguous).
    ``cache`` may be ``True`` (default directory), ``False``/``None`` or a path.
    """
    bound = int(bound)
    if bound < 2:
        raise ValueError("bound must be >= 2")
    cache_dir = None
    if cache is True:
        cache_dir = default_cache_dir()
    elif cache:
        cache_dir = Path(cache)
    cid = curve.curve_id
    if cache_dir is not None:
        hit = _find_cached(cache_dir, cid, bound)
        if hit is not None:
            try:
                return load_ap_table(hit, cid).restrict(bound)
            except (ValueError, OSError) as exc:
                warnings.warn(f"a(p) cache {hit} is unreadable ({exc}); rebuilding")
                hit.unlink(missing_ok=True)
    primes = primes_upto(bound)
    vals, bads = [], []
    for start in range(0, len(primes), chunk):
        v, b = compute_ap(curve, primes[start:start + chunk], accelerate=accelerate,
                          threshold=threshold)
        vals.append(v)
        bads.append(b)
    table = APTable(cid, bound, primes, np.concatenate(vals), np.concatenate(bads))
    if cache_dir is not None:
        save_ap_table(table, _cache_path(cache_dir, cid, bound))
    return table


def ap_tables_charsum(curves, bound: int, cache=True) -> list:
    """Character-sum tables for several curves at once, sharing residue tables."""
    primes = primes_upto(bound)
    _check_primes(primes)
    out = [None] * len(curves)
    todo = []
    cache_dir = default_cache_dir() if cache is True else (Path(cache) if cache else None)
    for i, c in enumerate(curves):
        hit = _find_cached(cache_dir, c.curve_id, bound) if cache_dir else None
        if hit is not None:
            try:
                out[i] = load_ap_table(hit, c.curve_id).restrict(bound)
                continue
            except (ValueError, OSError) as exc:
                warnings.warn(f"a(p) cache {hit} is unreadable ({exc}); rebuilding")
        todo.append(i)
    if not todo:
        return out
    big = primes[primes > 3]
    A = np.empty((len(todo), len(big)), dtype=np.int64)
    B = np.empty_like(A)
    for k, i in enumerate(todo):
        inv = curves[i]._inv
        A[k] = _residues(-27 * inv.c4, big)
        B[k] = _residues(-54 * inv.c6, big)
    sums = pc.ap_charsum_multi(A, B, big)
    for k, i in enumerate(todo):
        c = curves[i]
        bad = np.array([c.is_bad(int(p)) for p in primes.tolist()]) if len(primes) < 64 else \
            _bad_mask(c, primes)
        vals = np.empty(len(primes), dtype=np.int64)
        vals[primes > 3] = sums[k]
        for j in np.flatnonzero((primes <= 3) | bad).tolist():
            vals[j] = ap(c, int(primes[j]))
        table = APTable(c.curve_id, bound, primes, vals, bad)
        if cache_dir is not None:
            save_ap_table(table, _cache_path(cache_dir, c.curve_id, bound))
        out[i] = table
    return out


def _bad_mask(curve, primes):
    if curve.conductor is not None:
        return _residues(curve.conductor, primes) == 0
    return _residues(curve._inv.disc, primes) == 0


# ---------------------------------------------------------------------------
# Dirichlet coefficients

@numba.njit(cache=True)
def _hecke(apfull, bad, spf, m):
    a = np.zeros(m + 1, dtype=np.int64)
    if m >= 1:
        a[1] = 1
    for n in range(2, m + 1):
        p = spf[n]
        q = n
        while q % p == 0:
            q //= p
        if q == 1:
            if n == p:
                a[n] = apfull[p]
            elif bad[p]:
                a[n] = apfull[p] * a[n // p]
            else:
                a[n] = apfull[p] * a[n // p] - p * a[n // (p * p)]
        else:
            a[n] = a[n // q] * a[q]
    return a


def hecke_coefficients(table: APTable, m: int) -> np.ndarray:
    """Integer coefficients a(n), 0 <= n <= m, from a table of a(p)."""
    if table.bound < m:
        missing = primes_upto(m)
        missing = missing[missing > table.bound]
        first = int(missing[0]) if len(missing) else m
        raise DependencyError(f"a({first}) missing: table bound {table.bound} < {m}")
    apfull = np.zeros(m + 1, dtype=np.int64)
    bad = np.zeros(m + 1, dtype=np.bool_)
    k = np.searchsorted(table.primes, m, side="right")
    apfull[table.primes[:k]] = table.values[:k]
    bad[table.primes[:k]] = table.bad[:k]
    return _hecke(apfull, bad, smallest_prime_factors(m), m)


def dirichlet_coeffs(curve: WeierstrassCurve, m: int, table: APTable | None = None,
                     **table_kw) -> np.ndarray:
    """Normalised coefficients b(n) = a(n)/sqrt(n) for 0 <= n <= m (b(0) = 0)."""
    if table is None:
        table = ap_table(curve, max(m, 2), **table_kw)
    a = hecke_coefficients(table, m).astype(float)
    n = np.arange(m + 1, dtype=float)
    n[0] = 1.0
    b = a / np.sqrt(n)
    b[0] = 0.0
    return b


def cn_coeffs(curve: WeierstrassCurve, bound: int, table: APTable | None = None):
    """Prime-power support and values of c(n), the log-derivative coefficients.

    c(p^k) = log(p) (alpha_p^k + beta_p^k) with alpha_p + beta_p = a(p)/sqrt(p),
    alpha_p beta_p = 1 at good primes; at bad primes alpha_p = a(p)/sqrt(p),
    beta_p = 0.  Returns ``(n, c)`` arrays sorted by n.
    """
    if table is None:
        table = ap_table(curve, max(bound, 2))
    elif table.bound < bound:
        raise DependencyError(f"a(p) table bound {table.bound} < {bound}")
    table = table.restrict(bound)
    ns, cs = [], []
    for p, a, bad in zip(table.primes.tolist(), table.values.tolist(), table.bad.tolist()):
        s1 = a / math.sqrt(p)
        lp = math.log(p)
        prev, cur = 2.0, s1     # power sums alpha^k + beta^k
        pk = p
        k = 1
        while pk <= bound:
            if bad:
                val = s1 ** k
            else:
                val = cur
            ns.append(pk)
            cs.append(lp * val)
            prev, cur = cur, s1 * cur - prev
            pk *= p
            k += 1
    order = np.argsort(ns, kind="stable")
    return np.asarray(ns, dtype=np.int64)[order], np.asarray(cs)[order]
