import math

import mpmath
import numpy as np
import pytest

from rankzeta.arith import kronecker
from rankzeta.curve import get_curve
from rankzeta.errors import DependencyError, ValidationError
from rankzeta.lfunc import (ArrayCoefficients, MellinGrid, SelfDualLSpec, central_order,
                            curve_spec, find_zeros, hardy_Z, hardy_Z_complex, infer_root_number,
                            lambda_scale, lambda_smooth, quadratic_spec, second_angle,
                            write_lzeros)

mpmath.mp.dps = 20


def dirichlet_L(d, s):
    """L(s, chi_d) through Hurwitz zeta: |d|^-s sum_a chi_d(a) zeta(s, a/|d|)."""
    q = abs(d)
    s = mpmath.mpc(s)
    return q ** -s * mpmath.fsum(kronecker(d, a) * mpmath.zeta(s, mpmath.mpf(a) / q)
                                 for a in range(1, q + 1) if kronecker(d, a))


def fd_orders(grid, kmax=6, frac=0.05, K=7):
    """Taylor coefficients of Z at 0 (in units of the mean gap) from 2K+1 samples."""
    gap = grid.spec.mean_gap(0.0)
    t = np.arange(-K, K + 1) * frac * gap
    co = np.polynomial.polynomial.polyfit(t / gap, grid.Z(t), 2 * K)
    return np.abs(co[:kmax + 1]) / np.max(np.abs(co))


@pytest.fixture(scope="module")
def e1():
    return curve_spec(get_curve("E1"))


@pytest.fixture(scope="module")
def c15():
    return curve_spec(get_curve("E15"))


@pytest.fixture(scope="module")
def chi5():
    return quadratic_spec(5)


class TestSpecs:
    def test_curve_Q(self, e1, c15):
        assert e1.Q == pytest.approx(math.sqrt(37) / (2 * math.pi))
        assert f"{e1.Q:.3f}" == "0.968"
        assert c15.Q == pytest.approx(math.sqrt(15) / (2 * math.pi))
        e6 = curve_spec(get_curve("E6"), w=1)
        assert e6.Q == pytest.approx(math.sqrt(5187563742) / (2 * math.pi))
        assert (e1.alpha, e1.beta) == (1.0, 0.5)

    def test_quadratic(self):
        assert quadratic_spec(5).beta == 0
        assert quadratic_spec(-3).beta == 0.5
        s12 = quadratic_spec(12)
        assert s12.w == 1 and s12.Q == pytest.approx(math.sqrt(12 / math.pi))
        with pytest.raises(ValidationError):
            quadratic_spec(9)
        with pytest.raises(ValidationError):
            quadratic_spec(1)

    def test_root_numbers(self, e1):
        assert e1.w == -1
        assert curve_spec(get_curve("E2")).w == 1
        assert infer_root_number(quadratic_spec(5)) == 1

    def test_missing_coefficients(self):
        spec = SelfDualLSpec(Q=2.0, alpha=1.0, beta=0.5, w=1,
                             coeffs=ArrayCoefficients(np.ones(10)), label="short")
        with pytest.raises(DependencyError):
            lambda_smooth(spec, 0.5 + 3j)


class TestLambda:
    @pytest.mark.parametrize("name", ["e1", "c15", "chi5"])
    def test_functional_equation(self, name, request):
        spec = request.getfixturevalue(name)
        rng = np.random.default_rng(7)
        for t in rng.uniform(-30, 30, 50):
            s = 0.5 + 1j * t
            a = lambda_smooth(spec, s, mirror=False).value
            b = lambda_smooth(spec, 1 - s, theta=second_angle(spec, -t), mirror=False).value
            assert abs(a - spec.w * b) < 1e-9 * lambda_scale(spec, s)
        for s in (0.2 + 4j, 0.9 - 11j, 1.7 + 2j):
            a = lambda_smooth(spec, s).value
            b = lambda_smooth(spec, 1 - s).value
            assert abs(a - spec.w * b) < 1e-9 * max(lambda_scale(spec, s), lambda_scale(spec, 1 - s))

    def test_truncation_doubling(self, c15):
        for t in (0.0, 7.0, 25.0):
            s = 0.5 + 1j * t
            a = lambda_smooth(c15, s)
            b = lambda_smooth(c15, s, verify=True)
            assert abs(a.value - b.value) < 1e-9 * lambda_scale(c15, s)

    def test_e1_central_vanishing(self, e1):
        assert abs(lambda_smooth(e1, 0.5).value) < 1e-8
        assert abs(hardy_Z(e1, 0.0)) < 1e-8

    def test_chi5_central_value(self, chi5):
        lam = lambda_smooth(chi5, 0.5).value
        direct = lam / (chi5.Q ** 0.5 * math.gamma(0.25))
        assert abs(direct - complex(dirichlet_L(5, 0.5))) < 1e-8


class TestHardyZ:
    @pytest.mark.parametrize("name", ["e1", "c15", "chi5"])
    def test_imaginary_part(self, name, request):
        spec = request.getfixturevalue(name)
        worst = max(abs(hardy_Z_complex(spec, t)[0].imag) for t in np.linspace(0, 30, 61))
        assert worst < 1e-8

    def test_two_paths_agree(self, c15):
        grid = MellinGrid(c15, 13.0)
        ts = np.linspace(0.0, 12.0, 25)
        afe = np.array([hardy_Z(c15, t) for t in ts])
        assert np.max(np.abs(grid.Z(ts) - afe)) < 1e-6

    def test_wrong_root_number_detected(self, e1):
        _, res = hardy_Z_complex(e1.with_root_number(1), 2.9)
        assert res > 1e-3


class TestZeros:
    @pytest.mark.parametrize("d", [-3, -4, 5, 8, -7, 12, 13, -84, 97])
    def test_dirichlet_zeros_oracle(self, d):
        zl = find_zeros(quadratic_spec(d), 12.0)
        assert zl.complete
        for g in zl.ordinates[:4]:
            root = mpmath.findroot(lambda t: dirichlet_L(d, 0.5 + 1j * t), mpmath.mpf(g))
            assert abs(float(mpmath.re(root)) - g) < 1e-6

    def test_e1_first_zero_two_paths(self, e1):
        zl = find_zeros(e1, 8.0)
        assert zl.complete and len(zl) >= 1
        g = zl[0]
        h = 1e-5
        lo, hi = hardy_Z(e1, g - h), hardy_Z(e1, g + h)
        assert lo * hi < 0

    def test_count_shape(self):
        # zeros to height T against theta_L(T)/pi with a bounded fluctuation
        for d in (10009, 12401, -15319, -19999):
            spec = quadratic_spec(d)
            zl = find_zeros(spec, 30.0)
            assert zl.complete
            smooth = spec.smooth_count(zl.height)
            assert abs(len(zl) - smooth) < 3
            assert abs(smooth - 30 / (2 * math.pi) * math.log(30 * abs(d) / (2 * math.pi * math.e))) < 1

    def test_export(self, tmp_path, chi5):
        zl = find_zeros(chi5, 15.0)
        write_lzeros(tmp_path / "z.txt", zl)
        assert len((tmp_path / "z.txt").read_text().split()) == len(zl)
        assert (tmp_path / "z.txt.json").exists()


class TestCentralOrder:
    @pytest.mark.parametrize("name,rank", [("E1", 1), ("E2", 2), ("E3", 3), ("E4", 4)])
    def test_finite_difference_order(self, name, rank):
        grid = MellinGrid(curve_spec(get_curve(name)), 2.0)
        rel = fd_orders(grid)
        assert np.all(rel[:rank] < 1e-4), rel
        assert rel[rank] >= 1e-4, rel

    def test_numerical_order(self):
        assert central_order(curve_spec(get_curve("E3"))) == 3
        assert central_order(quadratic_spec(5)) == 0
