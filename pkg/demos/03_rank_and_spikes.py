"""Rank seen through the L-function itself.

The order of vanishing of Z at t = 0 matches the rank.  Away from 0, a rank-6
curve forces |Z| to peak near the zeros of zeta, and dividing by the predicted
size ratio takes most of those peaks away.
"""
import numpy as np
from scipy.signal import argrelmax

from rankzeta.curve import get_curve
from rankzeta.lfunc import MellinGrid, central_order, curve_spec
from rankzeta.predict import rank_ratio_prediction

for name in ("E1", "E2", "E3", "E4"):
    spec = curve_spec(get_curve(name))
    print(f"{name}: root number {spec.w:+d}, central order {central_order(spec)}")

c = get_curve("E6")
grid = MellinGrid(curve_spec(c), 31.0)
t = np.arange(5.0, 30.0, 0.01)
z = grid.Z(t)
a = np.abs(z)
med = np.median(a)
print("\nE6 local maxima of |Z| above 10x the median:")
for i in argrelmax(a)[0]:
    if a[i] > 10 * med:
        print(f"  t = {t[i]:6.2f}   |Z|/median = {a[i] / med:5.1f}")
corr = np.abs(z / rank_ratio_prediction(c, 6, t))
print(f"peak/median {a.max() / med:.1f} before correction, "
      f"{corr.max() / np.median(corr):.1f} after")
