import math

import numpy as np
import pytest
from sympy import isprime, primerange

from rankzeta.arith import (MEMORY_BUDGET, character_values, enumerate_fundamental_discriminants,
                            is_fundamental_discriminant, is_squarefree, kronecker,
                            prime_discriminants, primes_upto, sieve_primes)
from rankzeta.errors import DomainError, ResourceError


def kronecker_oracle(d, n):
    """Textbook definition: factor n, Legendre at odd primes, (d/2) and (d/-1) rules."""
    if n == 0:
        return 1 if abs(d) == 1 else 0
    out = 1
    if n < 0:
        n = -n
        out = -1 if d < 0 else 1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        out *= 1 if d % 8 in (1, 7) else -1
    p = 3
    while n > 1:
        if isprime(n):
            p = n
        while n % p == 0:
            n //= p
            out *= 0 if d % p == 0 else (1 if pow(d, (p - 1) // 2, p) == 1 else -1)
        p += 2
    return out


class TestSieve:
    def test_small(self):
        assert sieve_primes(10).primes.tolist() == [2, 3, 5, 7]
        assert sieve_primes(2).primes.tolist() == [2]

    def test_against_sympy(self):
        assert primes_upto(20000).tolist() == list(primerange(2, 20001))

    def test_segmented_agrees_with_plain(self):
        plain = sieve_primes(300000).primes
        seg = sieve_primes(300000, segmented=True, segment=1 << 12).primes
        assert np.array_equal(plain, seg)
        window = sieve_primes(250000, 123456, segment=1000).primes
        assert np.array_equal(window, plain[(plain > 123456) & (plain <= 250000)])

    def test_offset_window_is_prime(self):
        w = sieve_primes(10 ** 12 + 2000, 10 ** 12).primes
        assert len(w) > 0 and all(isprime(int(p)) for p in w)
        assert w.tolist() == [p for p in range(10 ** 12 + 1, 10 ** 12 + 2001) if isprime(p)]

    def test_errors(self):
        with pytest.raises(DomainError):
            sieve_primes(1)
        with pytest.raises(ResourceError):
            sieve_primes(int(MEMORY_BUDGET) * 400)

    def test_membership(self):
        t = sieve_primes(100)
        assert 97 in t and 91 not in t


class TestKronecker:
    def test_examples(self):
        assert kronecker(5, 1) == 1
        assert kronecker(5, 10) == 0
        assert kronecker(5, 2) == -1

    def test_oracle_table(self):
        for d in range(-50, 51):
            for n in range(0, 51):
                if d == 0 and n == 0:
                    continue
                assert kronecker(d, n) == kronecker_oracle(d, n), (d, n)

    def test_multiplicative(self):
        for d in range(-100, 101, 7):
            for m in range(1, 101, 3):
                for n in range(1, 101, 5):
                    assert kronecker(d, m * n) == kronecker(d, m) * kronecker(d, n)

    def test_periodic_for_fundamental(self):
        for d in range(-200, 201):
            if d in (0, 1) or not is_fundamental_discriminant(d):
                continue
            chi = character_values(d, 3 * abs(d))
            assert np.array_equal(chi[1:abs(d) + 1], chi[abs(d) + 1:2 * abs(d) + 1])

    def test_big_integers(self):
        d = 10 ** 30 + 1
        assert character_values(d, 20).tolist() == [kronecker(d, n) for n in range(21)]
        assert kronecker(-(10 ** 40) - 3, 7) == kronecker_oracle(-(10 ** 40) - 3, 7)


class TestDiscriminants:
    def test_predicate(self):
        assert is_fundamental_discriminant(5)
        assert not is_fundamental_discriminant(9)
        assert is_fundamental_discriminant(12)
        assert is_fundamental_discriminant(-4) and is_fundamental_discriminant(-8)
        assert not is_fundamental_discriminant(-16)
        with pytest.raises(DomainError):
            is_fundamental_discriminant(0)

    def test_squarefree(self):
        for n in range(1, 3000):
            brute = all(n % (p * p) for p in range(2, math.isqrt(n) + 1))
            assert is_squarefree(n) == brute

    def test_small_window(self):
        assert enumerate_fundamental_discriminants(-10, 10).tolist() == [-8, -7, -4, -3, 5, 8]
        assert enumerate_fundamental_discriminants(-10, 10, include_one=True).tolist() == \
            [-8, -7, -4, -3, 1, 5, 8]

    def test_brute_force_window(self):
        got = enumerate_fundamental_discriminants(-3000, 3000).tolist()
        want = [d for d in range(-2999, 3000) if d not in (0, 1) and is_fundamental_discriminant(d)]
        assert got == want

    def test_empty(self):
        assert len(enumerate_fundamental_discriminants(5, 6)) == 0
        assert len(enumerate_fundamental_discriminants(5, 5)) == 0

    def test_sign_filter(self):
        pos = enumerate_fundamental_discriminants(-100, 100, "positive")
        neg = enumerate_fundamental_discriminants(-100, 100, "negative")
        assert (pos > 0).all() and (neg < 0).all()
        with pytest.raises(DomainError):
            enumerate_fundamental_discriminants(0, 10, "odd")

    def test_prime_discriminants(self):
        got = prime_discriminants(2, 200).tolist()
        want = sorted(p if p % 4 == 1 else -p for p in primerange(3, 200))
        assert got == want
