"""Low-lying zeros of a family, and spacings of zeta zeros.

The density of low zeros of L(s, chi_d) averaged over d follows the full
ratios-based prediction much better than its leading term.  The same holds
for pair correlation of zeta zeros.  Small sizes keep this under a minute.
"""
import math

import numpy as np

from rankzeta.arith import enumerate_fundamental_discriminants
from rankzeta.lfunc import family_zeros
from rankzeta.predict import (FamilyMoments, bin_average, cs_density_average,
                              cs_paircorr_prediction, paircorr_main_term)
from rankzeta.stats import discrepancy, make_bins, one_level_density, pair_correlation
from rankzeta.zeta import zeta_zeros

ds = enumerate_fundamental_discriminants(0, 3000, "positive").tolist()
fam = family_zeros(ds, 10.0)
hist = one_level_density(fam, make_bins(0.0, 10.0, 0.25))
mom = FamilyMoments(ds)
full = bin_average(lambda x: cs_density_average(mom, x), hist.edges)
lead = np.full(len(full), mom.mean_log / (2 * math.pi))
print(f"{len(ds)} characters, zeros to height 10")
print(f"  L2 distance to full prediction {discrepancy(hist, full)[0]:.3f}, "
      f"to leading term {discrepancy(hist, lead)[0]:.3f}")

gam = np.asarray(zeta_zeros(count=2000).ordinates)
h = pair_correlation(gam, make_bins(0.0, 10.0, 0.25), "raw")
T = float(gam.max())
e = h.edges
pred = np.array([cs_paircorr_prediction(T, (e[i], e[i + 1])) for i in range(len(e) - 1)]) / h.bin_width
main = np.full(len(pred), paircorr_main_term(T))
print("\n2000 zeta zeros, pair differences below 10")
print(f"  L2 distance to full prediction {discrepancy(h, pred)[0]:.0f}, "
      f"to main term {discrepancy(h, main)[0]:.0f}")
