"""Prime sums of a(p): the bias statistic, symmetric-square sums, explicit formula.

S_E(x) = sum_{p <= x} log(p) a(p) drifts like -(r - 1/2) x, and its
logarithmic-density mean

    (1/log X) int_1^X S_E(x) x^-2 dx = (1/log X) sum_{p <= X} log(p) a(p) (1/p - 1/X)

(exact, because S_E is a step function) detects the rank r.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .curve import APTable, WeierstrassCurve, ap_table
from .errors import DependencyError, DomainError


def _table(curve, bound, table, **kw) -> APTable:
    if table is None:
        return ap_table(curve, max(int(bound), 2), **kw)
    if table.bound < bound:
        raise DependencyError(f"a(p) table stops at {table.bound}, need {int(bound)}")
    return table


def _prefix(table: APTable, x: float):
    k = int(np.searchsorted(table.primes, x, side="right"))
    return table.primes[:k], table.values[:k]


def S_E(curve: WeierstrassCurve, x: float, table: APTable | None = None, **kw) -> float:
    """sum_{p <= x} log(p) a(p), summed exactly-rounded."""
    if x < 2:
        return 0.0
    table = _table(curve, x, table, **kw)
    p, a = _prefix(table, x)
    return math.fsum((np.log(p.astype(float)) * a).tolist())


def bias_mean(curve: WeierstrassCurve, X: float, table: APTable | None = None, **kw) -> float:
    """Closed form of (1/log X) int_1^X S_E(x) x^-2 dx."""
    if X < 2:
        raise DomainError(f"bias mean needs X >= 2, got {X}")
    table = _table(curve, X, table, **kw)
    p, a = _prefix(table, X)
    pf = p.astype(float)
    terms = np.log(pf) * a * (1.0 / pf - 1.0 / X)
    return math.fsum(terms.tolist()) / math.log(X)


def _bias_curve(table: APTable, xs):
    """bias_mean at every x in ``xs`` (ascending) from one pass over the table."""
    pf = table.primes.astype(float)
    la = np.log(pf) * table.values
    c1 = np.cumsum(la / pf)         # sum log(p) a(p) / p
    c0 = np.cumsum(la)              # S_E
    out_s, out_b = [], []
    for x in xs:
        k = int(np.searchsorted(table.primes, x, side="right"))
        s = c0[k - 1] if k else 0.0
        b = ((c1[k - 1] if k else 0.0) - s / x) / math.log(x)
        out_s.append(float(s))
        out_b.append(float(b))
    return out_s, out_b


def geometric_grid(x0: float, X: float, ratio: float = 1.1) -> list:
    n = int(math.floor(math.log(X / x0) / math.log(ratio)))
    xs = [x0 * ratio ** k for k in range(n + 1)]
    if xs[-1] < X:
        xs.append(float(X))
    return xs


@dataclass
class BiasReport:
    """bias_mean at X plus checkpoints (x, S_E(x), bias_mean(x)) on a geometric grid."""

    curve_id: str
    label: str
    X: int
    bias_mean: float
    rank: int | None
    checkpoints: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BiasReport":
        d = json.loads(text)
        d["checkpoints"] = [tuple(c) for c in d["checkpoints"]]
        return cls(**d)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "S_E", "bias_to_date"])
            for x, s, b in self.checkpoints:
                w.writerow([repr(float(x)), repr(float(s)), repr(float(b))])


def bias_report(curve: WeierstrassCurve, X: int, *, ratio: float = 1.1, x0: float = 2.0,
                table: APTable | None = None, **kw) -> BiasReport:
    table = _table(curve, X, table, **kw)
    xs = geometric_grid(x0, X, ratio)
    ss, bs = _bias_curve(table, xs)
    return BiasReport(curve.curve_id, curve.name, int(X), bias_mean(curve, X, table),
                      curve.rank, [(x, s, b) for x, s, b in zip(xs, ss, bs)])


def symm_square_partial(curve: WeierstrassCurve, x: float, table: APTable | None = None,
                        **kw) -> tuple:
    """(sum_{p <= sqrt x} c(p^2), that sum divided by -sqrt(x)).

    c(p^2) = log(p) (a(p)^2 - 2p)/p at good p and log(p) a(p)^2 / p at bad p.
    """
    root = math.isqrt(int(x))
    if root < 2:
        return 0.0, 0.0
    table = _table(curve, root, table, **kw)
    p, a = _prefix(table, root)
    k = len(p)
    bad = table.bad[:k]
    pf = p.astype(float)
    a2 = a.astype(float) ** 2
    c = np.log(pf) * np.where(bad, a2, a2 - 2 * pf) / pf
    total = math.fsum(c.tolist())
    return total, total / -math.sqrt(x)


def explicit_formula_check(curve: WeierstrassCurve, x, zeros, *, rank: int | None = None,
                           table: APTable | None = None, **kw) -> dict:
    """Residual of the explicit formula for sum_{p <= x} log(p) a(p)/sqrt(p).

    The prediction is -(2r - 1) sqrt(x) - sum_rho x^rho / rho over the listed
    zeros and their conjugates.  Returns arrays keyed ``x``, ``lhs``,
    ``rhs`` and ``residual`` = (lhs - rhs)/sqrt(x).
    """
    gam = np.asarray(getattr(zeros, "ordinates", zeros), dtype=float)
    if len(gam) == 0:
        raise DependencyError("explicit formula needs at least one zero")
    r = curve.rank if rank is None else rank
    if r is None:
        raise DependencyError("rank needed for the central-zero term")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    table = _table(curve, xs.max(), table, **kw)
    pf = table.primes.astype(float)
    cum = np.cumsum(np.log(pf) * table.values / np.sqrt(pf))
    idx = np.searchsorted(table.primes, xs, side="right")
    lhs = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    rho = 0.5 + 1j * gam
    zs = 2 * np.real(np.exp(np.outer(np.log(xs), rho)) / rho).sum(axis=1)
    rhs = -(2 * r - 1) * np.sqrt(xs) - zs
    return {"x": xs, "lhs": lhs, "rhs": rhs, "residual": (lhs - rhs) / np.sqrt(xs),
            "zeros": len(gam)}


def write_report(report: BiasReport, path) -> None:
    Path(path).write_text(report.to_json())
