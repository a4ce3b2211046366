"""Exact-arithmetic core: independent oracles first, then frozen examples."""

import random
from fractions import Fraction
from math import gcd, isqrt

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmachain.arith import (
    ArithmeticError_,
    Factorization,
    abundancy,
    factorize,
    is_prime,
    omega,
    omega_s,
    primes_in_range,
    primes_upto,
    repunit,
    sigma,
    sigma_of,
)


def naive_sigma(n: int) -> int:
    """Divisor-sum oracle by trial division, independent of the library."""
    total = 0
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            total += d
            if d != n // d:
                total += n // d
    return total


def naive_factor(n: int) -> dict[int, int]:
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class TestFactorize:
    def test_one_is_empty(self):
        f = factorize(1)
        assert f.value == 1 and f.factors == ()

    def test_4095_oracle(self):
        assert naive_factor(4095) == {3: 2, 5: 1, 7: 1, 13: 1}
        assert factorize(4095).factors == ((3, 2), (5, 1), (7, 1), (13, 1))

    def test_prime_power(self):
        assert factorize(2**20).factors == ((2, 20),)

    def test_rejects_nonpositive(self):
        with pytest.raises(ArithmeticError_):
            factorize(0)
        with pytest.raises(ArithmeticError_):
            factorize(-5)

    def test_roundtrip_range(self):
        rng = random.Random(7001)
        for n in rng.sample(range(1, 10**6), 400):
            f = factorize(n)
            prod = 1
            for p, e in f.factors:
                assert sympy.isprime(p)  # independent primality oracle
                prod *= p**e
            assert prod == n

    @settings(max_examples=150, deadline=None)
    @given(st.integers(min_value=1, max_value=10**12))
    def test_roundtrip_property(self, n):
        f = factorize(n)
        prod = 1
        last = 1
        for p, e in f.factors:
            assert p > last and e >= 1
            prod *= p**e
            last = p
        assert prod == n

    def test_large_semiprime(self):
        p, q = 1505548068007783, 98800490511312118297
        f = factorize(p * q)
        assert f.factors == ((p, 1), (q, 1))

    def test_deterministic(self):
        n = 2**61 - 1  # prime
        m = n * 599 * 601
        assert factorize(m).factors == factorize(m).factors == ((599, 1), (601, 1), (n, 1))


class TestPrimality:
    def test_agrees_with_sympy_small(self):
        for n in range(2, 5000):
            assert is_prime(n) == sympy.isprime(n)

    def test_agrees_with_sympy_random(self):
        rng = random.Random(7002)
        for _ in range(300):
            n = rng.randrange(2, 10**14)
            assert is_prime(n) == sympy.isprime(n)

    def test_large_values(self):
        assert is_prime(2**89 - 1)
        assert not is_prime((2**89 - 1) * (2**61 - 1))
        # beyond the deterministic Miller-Rabin threshold
        assert is_prime(10**30 + 57)
        assert not is_prime(10**30 + 59)

    def test_prime_ranges(self):
        assert primes_upto(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        assert primes_in_range(10**6, 10**6 + 100) == list(
            sympy.primerange(10**6, 10**6 + 101)
        )


class TestSigma:
    def test_sigma_one(self):
        assert sigma(factorize(1)) == 1

    def test_superperfect_chain_16(self):
        assert sigma(factorize(16)) == 31
        assert sigma(factorize(31)) == 32 == 2 * 16

    def test_chain_21(self):
        assert sigma(factorize(21)) == 32
        assert sigma(factorize(32)) == 63 == 3 * 21

    def test_matches_naive_upto_1e4(self):
        for n in range(1, 10**4 + 1):
            assert sigma_of(n) == naive_sigma(n)

    def test_multiplicative_on_coprime_pairs(self):
        rng = random.Random(7003)
        done = 0
        while done < 120:
            m, n = rng.randrange(2, 10**6), rng.randrange(2, 10**6)
            if gcd(m, n) != 1:
                continue
            assert sigma_of(m * n) == sigma_of(m) * sigma_of(n)
            assert abundancy(factorize(m * n)) == abundancy(factorize(m)) * abundancy(
                factorize(n)
            )
            done += 1


class TestRepunit:
    def test_examples(self):
        assert repunit(2, 5) == 31 == 1 + 2 + 4 + 8 + 16
        assert repunit(3, 3) == 13 == 1 + 3 + 9
        assert repunit(97, 1) == 1

    def test_rejects_bad_inputs(self):
        with pytest.raises(ArithmeticError_):
            repunit(1, 3)
        with pytest.raises(ArithmeticError_):
            repunit(2, 0)

    def test_equals_sigma_of_prime_power(self):
        for p in primes_upto(100):
            for e in range(1, 31):
                assert repunit(p, e) == sigma(factorize(p ** (e - 1)))


class TestOmega:
    def test_examples(self):
        one = factorize(1)
        assert (omega(one), omega_s(one)) == (0, 0)
        f = factorize(4095)
        assert (omega(f), omega_s(f)) == (4, 3)
        sq = factorize(36)
        assert (omega(sq), omega_s(sq)) == (2, 0)

    def test_omega_s_bounded_and_squares(self):
        rng = random.Random(7004)
        for _ in range(200):
            n = rng.randrange(1, 10**6)
            f = factorize(n)
            assert omega_s(f) <= omega(f)
            assert omega_s(factorize(n * n)) == 0


class TestAbundancy:
    def test_examples(self):
        assert abundancy(factorize(1)) == Fraction(1)
        assert abundancy(factorize(6)) == Fraction(2)
        assert naive_sigma(9) == 13
        assert abundancy(factorize(9)) == Fraction(13, 9)

    def test_reduced_and_greater_than_one(self):
        rng = random.Random(7005)
        for _ in range(200):
            n = rng.randrange(2, 10**8)
            h = abundancy(factorize(n))
            assert gcd(h.numerator, h.denominator) == 1
            assert h > 1


class TestFactorizationInvariants:
    def test_rejects_unsorted(self):
        with pytest.raises(ArithmeticError_):
            Factorization(value=6, factors=((3, 1), (2, 1)))

    def test_rejects_composite_entry(self):
        with pytest.raises(ArithmeticError_):
            Factorization(value=4, factors=((4, 1),))

    def test_rejects_bad_product(self):
        with pytest.raises(ArithmeticError_):
            Factorization(value=10, factors=((2, 1), (3, 1)))

    def test_rejects_zero_exponent(self):
        with pytest.raises(ArithmeticError_):
            Factorization(value=2, factors=((2, 0),))

    def test_json_roundtrip(self):
        f = factorize(2**20 * 3**5 * 97)
        assert Factorization.from_json(f.to_json()) == f
        assert f.format_compact() == "2^20*3^5*97"
