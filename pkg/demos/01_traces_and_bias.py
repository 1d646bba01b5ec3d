"""Traces of Frobenius and the bias they carry.

A curve of higher rank has a(p) that lean negative.  The mean of S_E(x)/x
over a logarithmic scale tends to 1/2 - r, so it reads off the rank from
point counts alone.
"""

from rankzeta.bias import bias_mean, S_E
from rankzeta.curve import ap_table, get_curve

e6 = get_curve("E6")
t = ap_table(e6, 60, cache=False)
print("E6 traces for p <= 60:")
print("  " + "  ".join(f"{p}:{a:+d}" for p, a in zip(t.primes, t.values)))

X = 10 ** 5
print(f"\nbias mean at X = {X} (the limit would be 1/2 - r)")
for i in range(1, 6):
    c = get_curve(f"E{i}")
    b = bias_mean(c, X)
    s = S_E(c, X) / X
    print(f"  E{i}  rank {c.rank}  bias {b:+.3f}  S_E(X)/X {s:+.3f}")
print("\nconvergence is only logarithmic, so the values are still some way from\n"
      "1/2 - r; the ordering by rank is already clean.")
