import cmath
import math

import mpmath
import numpy as np
import pytest

from rankzeta.errors import PoleError
from rankzeta.special import digamma, inc_gamma_upper, loggamma, trigamma
from rankzeta.zeta import (ZeroList, hardy_Z_zeta, hardy_Z_zeta_array, read_zero_table, zeta,
                           zeta_logderiv, zeta_logderiv_prime, zeta_zero_count, zeta_zeros,
                           zero_sum_logderiv_prime, write_zero_table)

mpmath.mp.dps = 30


class TestSpecial:
    def test_digamma_quarter_points(self):
        # quoted to three decimals
        assert abs(digamma(0.25).value - (-4.228)) < 1e-3
        assert abs(digamma(0.75).value - (-1.085)) < 1e-3

    def test_against_mpmath(self):
        for z in (0.3 + 0.1j, 2.5 - 7j, 0.25 + 40j, 11 + 0.5j):
            assert abs(loggamma(z).value - complex(mpmath.loggamma(z))) < 1e-12
            assert abs(digamma(z).value - complex(mpmath.digamma(z))) < 1e-12
            assert abs(trigamma(z).value - complex(mpmath.psi(1, z))) < 1e-12
        assert abs(loggamma(1).value) < 1e-15

    def test_branch_continuity(self):
        t = np.linspace(0, 200, 4001)
        im = np.array([loggamma(0.75 + 0.5j * x).value.imag for x in t])
        assert np.max(np.abs(np.diff(im))) < 0.2

    def test_pole(self):
        with pytest.raises(PoleError):
            loggamma(-2)
        with pytest.raises(PoleError):
            digamma(0)

    def test_inc_gamma(self):
        for x in (0.1, 1.0, 7.5, 40.0):
            assert inc_gamma_upper(1, x).value == pytest.approx(math.exp(-x), rel=1e-13)
        assert abs(inc_gamma_upper(0.5, 1e-14).value - math.sqrt(math.pi)) < 1e-6
        z, x = 1.5 + 5j, 10.0
        a = inc_gamma_upper(z, x, method="series").value
        b = inc_gamma_upper(z, x, method="cf").value
        assert abs(a - b) <= 1e-12 * abs(b)
        for z, x in ((3 + 20j, 5.0), (0.75 + 100j, 2.0), (1.5 - 3j, 300.0)):
            ref = complex(mpmath.gammainc(z, x))
            assert abs(inc_gamma_upper(z, x).value - ref) <= 1e-12 * abs(ref)


class TestZeta:
    def test_zeta2(self):
        assert abs(zeta(2).value - math.pi ** 2 / 6) < 1e-13

    def test_zeta_three_halves_oracle(self):
        # direct sum to N plus Euler-Maclaurin tail written out by hand
        n = 10 ** 5
        s = mpmath.mpf(1.5)
        direct = mpmath.fsum(mpmath.mpf(k) ** -s for k in range(1, n))
        tail = mpmath.mpf(n) ** (1 - s) / (s - 1) + mpmath.mpf(n) ** -s / 2 \
            + s * mpmath.mpf(n) ** (-s - 1) / 12
        assert abs(zeta(1.5).value - float(direct + tail)) < 1e-12

    def test_critical_line_first_zero(self):
        assert abs(zeta(0.5 + 14.1347j).value) < 1e-3

    def test_against_mpmath(self):
        for s in (0.5 + 1j, 0.7 + 300j, 1.0 + 25j, 2 + 9000j, 0.5 + 9999j):
            for k in (0, 1, 2):
                ref = complex(mpmath.zeta(s, 1, k))
                assert abs(zeta(s, k).value - ref) < 1e-12 * max(1.0, abs(ref)), (s, k)

    def test_truncation_independent(self):
        for s in (0.5 + 50j, 1.3 + 700j):
            a = zeta(s, terms=200).value
            b = zeta(s, terms=400).value
            assert abs(a - b) < 1e-12 * max(1, abs(a))

    def test_functional_equation(self):
        for sig in (0.1, 0.3, 0.5, 0.77, 0.9):
            for t in (1.0, 17.0, 60.0, 333.0):
                s = complex(sig, t)
                lhs = -s / 2 * math.log(math.pi) + loggamma(s / 2).value + cmath.log(zeta(s).value)
                rhs = -(1 - s) / 2 * math.log(math.pi) + loggamma((1 - s) / 2).value \
                    + cmath.log(zeta(1 - s).value)
                ratio = cmath.exp(rhs - lhs)
                assert abs(ratio - 1) < 1e-10, s

    def test_pole(self):
        with pytest.raises(PoleError):
            zeta(1)

    def test_logderiv_oracle(self):
        # -sum Lambda(n)/n^2 with the tail bounded by sum_{n>N} log n / n^2
        n_max = 2 * 10 ** 5
        lam = np.zeros(n_max + 1)
        sieve = np.ones(n_max + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, n_max + 1):
            if sieve[p]:
                sieve[p * p::p] = False
                q = p
                while q <= n_max:
                    lam[q] = math.log(p)
                    q *= p
        n = np.arange(1, n_max + 1)
        partial = -math.fsum(lam[1:] / n.astype(float) ** 2)
        tail = (math.log(n_max) + 1) / n_max
        assert abs(zeta_logderiv(2).value - partial) <= tail

    def test_logderiv_symmetry(self):
        v = zeta_logderiv_prime(2.5).value
        assert abs(v.imag) < 1e-15
        a = zeta_logderiv_prime(0.8 + 33j).value
        b = zeta_logderiv_prime(0.8 - 33j).value
        assert abs(a - b.conjugate()) < 1e-12


class TestHardyZ:
    def test_z0(self):
        assert hardy_Z_zeta(0.0) == pytest.approx(float(mpmath.zeta(0.5)), abs=1e-12)
        assert f"{hardy_Z_zeta(0.0):.5f}" == "-1.46035"

    def test_zero(self):
        assert abs(hardy_Z_zeta(14.1347)) < 1e-3

    def test_even(self):
        t = np.array([0.3, 5.0, 14.0, 77.7])
        assert np.allclose(hardy_Z_zeta_array(t), hardy_Z_zeta_array(-t), atol=1e-12)

    def test_matches_mpmath(self):
        for t in (3.0, 20.0, 100.5, 1234.5):
            assert hardy_Z_zeta(t) == pytest.approx(float(mpmath.siegelz(t)), abs=1e-10)


class TestZeros:
    def test_first_two(self):
        z = zeta_zeros(25)
        assert z.complete
        assert f"{z[0]:.4f}" == "14.1347"
        assert f"{z[1]:.3f}" == "21.022"

    def test_first_hundred(self, reference_zeros):
        z = zeta_zeros(count=100)
        assert z.complete and len(z) == 100
        assert np.max(np.abs(z.ordinates - reference_zeros)) < 1e-8

    def test_count_to_100(self):
        z = zeta_zeros(100)
        assert len(z) == zeta_zero_count(100) == 29
        assert abs(len(z) - 100 / (2 * math.pi) * math.log(100 / (2 * math.pi * math.e)) - 7 / 8) < 1

    def test_table_roundtrip(self, tmp_path, reference_zeros):
        path = tmp_path / "z.txt"
        write_zero_table(path, ZeroList(reference_zeros, 240.0, True), {"source": "test"})
        back = read_zero_table(path)
        assert back.source == "imported"
        assert np.allclose(back.ordinates, reference_zeros, atol=1e-14)
        assert (tmp_path / "z.txt.json").exists()

    def test_hadamard_cross_check(self):
        zl = zeta_zeros(count=1000)
        g1 = zl[0]
        s = 1 + 1j * g1
        direct = zeta_logderiv_prime(s).value
        summed, _ = zero_sum_logderiv_prime(s, zl)
        assert abs(direct - summed) < 1e-3
        assert abs(1 / (s - (0.5 + 1j * g1)) ** 2) == pytest.approx(4.0)
