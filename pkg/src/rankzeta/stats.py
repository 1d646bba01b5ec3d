"""Empirical zero statistics: binning, one-level density, pair correlation, discrepancies."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import CompletenessError, DomainError


@dataclass
class Histogram:
    """Weighted counts on equal bins [origin + k w, origin + (k+1) w).

    ``values`` = counts / normalization is what gets compared to predictions.
    """

    bin_width: float
    origin: float
    counts: np.ndarray
    normalization: float = 1.0
    label: str = ""

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if self.bin_width <= 0 or self.normalization <= 0:
            raise DomainError("bin width and normalization must be positive")
        if not np.all(np.isfinite(self.counts)) or np.any(self.counts < 0):
            raise DomainError("counts must be finite and nonnegative")

    @property
    def edges(self) -> np.ndarray:
        return self.origin + self.bin_width * np.arange(len(self.counts) + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.origin + self.bin_width * (np.arange(len(self.counts)) + 0.5)

    @property
    def values(self) -> np.ndarray:
        return self.counts / self.normalization

    @property
    def total_weight(self) -> float:
        return float(self.counts.sum())

    def write_csv(self, path, prediction=None, metadata: dict | None = None) -> None:
        """bin_left, bin_right, value[, prediction] rows."""
        e = self.edges
        with open(path, "w", newline="") as fh:
            for k, v in (metadata or {}).items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "value"] + (["prediction"] if prediction is not None else []))
            for i, v in enumerate(self.values):
                row = [repr(float(e[i])), repr(float(e[i + 1])), repr(float(v))]
                if prediction is not None:
                    row.append(repr(float(prediction[i])))
                w.writerow(row)


def make_bins(lo: float, hi: float, width: float) -> tuple:
    n = int(round((hi - lo) / width))
    if n <= 0 or not math.isclose(lo + n * width, hi, rel_tol=0, abs_tol=1e-9 * max(1, abs(hi))):
        raise DomainError(f"[{lo}, {hi}) is not a whole number of bins of width {width}")
    return float(lo), float(width), n


def _bin_index(x, origin, width, n):
    # half-open bins; floor puts boundary points in the right-hand bin.  Quotients
    # within rounding of an integer are snapped so 5.0 sits on the edge 4.95 + 0.05.
    q = (np.asarray(x, dtype=float) - origin) / width
    r = np.rint(q)
    q = np.where(np.abs(q - r) <= 1e-9 * np.maximum(1.0, np.abs(r)), r, q)
    k = np.floor(q).astype(np.int64)
    return k[(k >= 0) & (k < n)]


def _accumulate(x, origin, width, n, weight=1.0):
    return np.bincount(_bin_index(x, origin, width, n), minlength=n).astype(float) * weight


def one_level_density(family, bins, mode: str = "raw") -> Histogram:
    """Averaged zero density over a family of (d, zero list) pairs.

    Each bin is used as the even test function g = (h(x) + h(-x))/2 with h
    the bin's indicator, summed over the zeros 1/2 + i gamma and their
    conjugates.  A listed ordinate in the bin thus counts 1/2 through h and
    1/2 through its conjugate.  Values are divided by |family| and the bin
    width.  ``mode="rescaled"`` first multiplies ordinates by log|d| / 2 pi.
    """
    if mode not in ("raw", "rescaled"):
        raise DomainError(f"unknown mode {mode!r}")
    family = list(family.items()) if isinstance(family, dict) else list(family)
    if not family:
        raise DomainError("empty family")
    origin, width, n = bins
    top = origin + n * width
    pos = np.zeros(n)
    neg = np.zeros(n)
    for d, zl in family:
        scale = math.log(abs(d)) / (2 * math.pi) if mode == "rescaled" else 1.0
        need = max(abs(top), abs(origin)) / scale
        if not getattr(zl, "complete", True) or getattr(zl, "height", np.inf) < need:
            raise CompletenessError(f"zero list for d={d} is not complete to height {need:.6g}")
        g = np.asarray(getattr(zl, "ordinates", zl), dtype=float)
        g = g[g > 0] * scale
        # gamma and -gamma each contribute (h(x) + h(-x))/2
        pos += _accumulate(g, origin, width, n)
        neg += _accumulate(-g, origin, width, n)
    return Histogram(width, origin, pos + neg, len(family) * width,
                     label=f"one-level density ({mode}, {len(family)} members)")


def pair_differences(gam: np.ndarray, reach: float) -> np.ndarray:
    """All gamma_j - gamma_i with i != j and |difference| < reach (both signs)."""
    g = np.sort(np.asarray(gam, dtype=float))
    out = []
    hi = np.searchsorted(g, g + reach, side="left")
    for k in range(1, int((hi - np.arange(len(g))).max(initial=1))):
        j = np.arange(len(g)) + k
        ok = j < hi
        out.append(g[j[ok]] - g[ok])
    pos = np.concatenate(out) if out else np.zeros(0)
    return np.concatenate([pos, -pos])


def pair_correlation(zeros, bins, mode: str = "raw", unfold=None) -> Histogram:
    """Ordered-pair difference histogram.

    raw: values are pair counts per unit difference.  montgomery: differences
    are scaled by log(T)/2 pi, T the largest ordinate, and the values are
    divided by the number of zeros N(T) and the bin width.  unfolded: like
    montgomery, but each ordinate is first mapped through the smooth counting
    function ``unfold`` (zeta's by default), so the mean spacing is 1 at every
    height.
    """
    if mode not in ("raw", "montgomery", "unfolded"):
        raise DomainError(f"unknown mode {mode!r}")
    gam = np.asarray(getattr(zeros, "ordinates", zeros), dtype=float)
    if len(gam) < 2:
        raise DomainError("pair correlation needs at least two zeros")
    origin, width, n = bins
    reach = max(abs(origin), abs(origin + n * width))
    if mode == "raw":
        diffs = pair_differences(gam, reach + width)
        return Histogram(width, origin, _accumulate(diffs, origin, width, n), width,
                         label=f"pair correlation (raw, {len(gam)} zeros)")
    if mode == "unfolded":
        if unfold is None:
            from .zeta import smooth_zero_count as unfold
        x = np.asarray(unfold(np.sort(gam)), dtype=float)
        diffs = pair_differences(x, reach + width)
        return Histogram(width, origin, _accumulate(diffs, origin, width, n), len(gam) * width,
                         label=f"pair correlation (unfolded, {len(gam)} zeros)")
    scale = math.log(gam.max()) / (2 * math.pi)
    diffs = pair_differences(gam, (reach + width) / scale) * scale
    return Histogram(width, origin, _accumulate(diffs, origin, width, n), len(gam) * width,
                     label=f"pair correlation (montgomery, {len(gam)} zeros)")


def discrepancy(hist: Histogram, pred) -> tuple:
    """(root-mean-square difference, max |difference|, per-bin differences).

    ``pred`` holds one bin-averaged prediction per bin: a sequence, or a
    PredictionCurve whose abscissae are the bin centres.
    """
    ab = getattr(pred, "abscissae", None)
    vals = np.asarray(getattr(pred, "values", pred), dtype=float)
    if vals.shape != hist.counts.shape:
        raise DomainError(f"prediction has {vals.size} bins, histogram {hist.counts.size}")
    if ab is not None and not np.allclose(ab, hist.centers, atol=1e-9 * hist.bin_width):
        raise DomainError("prediction abscissae are not the histogram bin centres")
    diff = hist.values - vals
    return float(np.sqrt(np.mean(diff ** 2))), float(np.max(np.abs(diff))), diff


def runs_test(residuals) -> tuple:
    """Wald-Wolfowitz runs test on residual signs: (longest run, z score, p).

    p is one-sided, the chance of this few runs or fewer under random signs,
    so small p flags systematic stretches of one sign.
    """
    s = np.sign(np.asarray(residuals, dtype=float))
    s = s[s != 0]
    if len(s) < 2:
        raise DomainError("runs test needs at least two nonzero residuals")
    changes = np.flatnonzero(s[1:] != s[:-1])
    runs = len(changes) + 1
    bounds = np.concatenate([[-1], changes, [len(s) - 1]])
    longest = int(np.diff(bounds).max())
    n1, n2 = int((s > 0).sum()), int((s < 0).sum())
    n = n1 + n2
    if n1 == 0 or n2 == 0:
        return longest, -math.inf, 0.0
    mu = 2 * n1 * n2 / n + 1
    var = 2 * n1 * n2 * (2 * n1 * n2 - n) / (n * n * (n - 1))
    z = (runs - mu) / math.sqrt(var)
    return longest, z, float(sps.norm.cdf(z))


def chi_square(observed, expected) -> tuple:
    """Pearson statistic, degrees of freedom, upper-tail p-value."""
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if o.shape != e.shape or np.any(e <= 0):
        raise DomainError("chi-square needs matching shapes and positive expectations")
    stat = float(np.sum((o - e) ** 2 / e))
    return stat, len(o), float(sps.chi2.sf(stat, len(o)))
