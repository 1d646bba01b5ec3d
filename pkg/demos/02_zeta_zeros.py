"""Zeros of zeta on the critical line, found and certified.

Sign changes of the real Hardy function locate zeros; the argument principle
confirms that none were missed.  The zeros then feed a check of the
Hadamard product for (zeta'/zeta)'.
"""
import numpy as np

from rankzeta.zeta import (hardy_Z_zeta_array, zeta_logderiv_prime, zeta_zero_count,
                           zero_sum_logderiv_prime, zeta_zeros)

t = np.arange(0.0, 40.0, 0.5)
z = hardy_Z_zeta_array(t)
flips = t[:-1][np.sign(z[:-1]) != np.sign(z[1:])]
print("Z changes sign in [t, t+0.5) at t =", flips)

zl = zeta_zeros(100)
print(f"\n{len(zl)} zeros below 100, argument-principle count {zeta_zero_count(100)}")
print("first five:", np.round(zl.ordinates[:5], 10))

zl = zeta_zeros(count=1000)
s = 1 + 1j * zl[0]
direct = zeta_logderiv_prime(s).value
summed, tail = zero_sum_logderiv_prime(s, zl)
print(f"\n(zeta'/zeta)' at 1 + i gamma_1:  direct {direct:.8f}")
print(f"                 from 1000 zeros {summed:.8f}  (tail estimate {tail:.2e})")
