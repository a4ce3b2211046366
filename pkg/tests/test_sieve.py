"""Cyclotomic sieve, primitive divisors, residue/gap checks, classification.

The enumeration oracle here is deliberately naive: scan every prime with
sympy, divide the repunit by the basis primes, demand full support.  The
library path must match it exactly.
"""

import itertools
from math import gcd, log

import pytest
import sympy

from sigmachain.arith import ArithmeticError_, Factorization, factorize, repunit
from sigmachain.sieve import (
    GUARD_BAND,
    InapplicableInstance,
    SievePrime,
    SieveSpec,
    check_prime_gaps,
    check_repunit_factor_count,
    check_residue_count,
    classify_factors,
    cyclotomic_value,
    enumerate_s_union,
    enumerate_sie,
    enumerate_sie_products,
    factor_cyclotomic,
    factor_repunit,
    partition_by_dominant_divisor,
    sweep_residue_counts,
    zsigmondy_primitive,
)


def brute_force_set(q_primes, subset, e, limit):
    """Independent oracle: test every prime <= limit directly."""
    active = [q_primes[i - 1] for i in sorted(subset)]
    hits = []
    for p in sympy.primerange(2, limit + 1):
        rem = (p**e - 1) // (p - 1)
        vec = []
        for q in active:
            a = 0
            while rem % q == 0:
                rem //= q
                a += 1
            vec.append(a)
        if rem == 1 and all(a >= 1 for a in vec):
            hits.append(p)
    return hits


class TestCyclotomicFactors:
    def test_values(self):
        assert cyclotomic_value(2, 7) == 8
        assert cyclotomic_value(6, 2) == 3
        assert cyclotomic_value(12, 2) == 13
        assert cyclotomic_value(5, 3) == 121

    def test_factor_matches_sympy(self):
        for a in (2, 3, 10, 29):
            for d in (2, 3, 4, 6, 9, 12, 15):
                f = factor_cyclotomic(a, d)
                assert dict(f.factors) == sympy.factorint(cyclotomic_value(d, a))

    def test_factor_repunit_reconstructs(self):
        for a in (2, 3, 7, 12):
            for e in (2, 3, 6, 12, 20):
                f = factor_repunit(a, e)
                assert f.value == repunit(a, e)
                assert dict(f.factors) == sympy.factorint(repunit(a, e))


class TestEnumerateSie:
    def test_basis_23_e2_oracle(self):
        spec = SieveSpec(q_primes=(2, 3), subset=(1, 2), e=2, limit=120)
        hits = enumerate_sie(spec)
        # oracle-computed set; p + 1 in {6, 12, 18, 24, 48, 54, 72, 108}
        assert [h.p for h in hits] == [5, 11, 17, 23, 47, 53, 71, 107]
        assert [h.p for h in hits] == brute_force_set((2, 3), (1, 2), 2, 120)

    def test_single_prime_basis(self):
        spec = SieveSpec(q_primes=(2, 3), subset=(1,), e=2, limit=10)
        assert [h.p for h in enumerate_sie(spec)] == [3, 7]
        spec5 = SieveSpec(q_primes=(5,), subset=(1,), e=2, limit=10)
        assert enumerate_sie(spec5) == []

    def test_rejects_small_e(self):
        with pytest.raises(ArithmeticError_):
            SieveSpec(q_primes=(2, 3), subset=(1, 2), e=1, limit=10)

    def test_chunk_size_invariance(self):
        spec = SieveSpec(q_primes=(2, 3, 5), subset=(1, 2, 3), e=2, limit=5000)
        a = enumerate_sie(spec, chunk_size=64)
        b = enumerate_sie(spec, chunk_size=1 << 16)
        assert a == b

    def test_grid_against_oracle(self):
        qs = (2, 3, 5, 7)
        for r in range(1, 5):
            for combo in itertools.combinations(range(1, 5), r):
                basis = tuple(qs[i - 1] for i in combo)
                subset = tuple(range(1, len(basis) + 1))
                for e in range(2, 5):
                    spec = SieveSpec(q_primes=basis, subset=subset, e=e, limit=2000)
                    got = [h.p for h in enumerate_sie(spec)]
                    assert got == brute_force_set(basis, subset, e, 2000), (basis, e)

    def test_product_strategy_agrees(self):
        for basis, e, limit in [
            ((2, 3), 2, 10**4),
            ((2, 3, 5), 2, 10**4),
            ((3,), 3, 10**4),
            ((2, 3, 5, 7), 3, 10**4),
            ((7,), 4, 10**4),
        ]:
            subset = tuple(range(1, len(basis) + 1))
            spec = SieveSpec(q_primes=basis, subset=subset, e=e, limit=limit)
            assert enumerate_sie(spec) == enumerate_sie_products(spec)

    def test_certificates_revalidate(self):
        spec = SieveSpec(q_primes=(2, 3), subset=(1, 2), e=2, limit=500)
        for h in enumerate_sie(spec):
            assert h.certificate_value(spec.q_primes) == repunit(h.p, h.e)
            h.validate(spec)

    def test_bad_certificate_rejected(self):
        spec = SieveSpec(q_primes=(2, 3), subset=(1, 2), e=2, limit=500)
        fake = SievePrime(p=5, e=2, exponents=((1, 2), (2, 1)))
        with pytest.raises(ArithmeticError_):
            fake.validate(spec)


class TestEnumerateUnion:
    def test_small_union(self):
        table = enumerate_s_union((7,), 20, 3)
        assert ((1,), 3) in table
        assert [h.p for h in table[(1,), 3]] == [2]  # 1 + 2 + 4 = 7

    def test_odd_repunit_parity(self):
        # p^2 + p + 1 is odd, so no e = 3 set can use the prime 2
        table = enumerate_s_union((2, 3), 50, 3)
        for (subset, e), hits in table.items():
            if e == 3:
                assert 1 not in subset
        # and the e = 2 sets match the direct scans
        assert [h.p for h in table[(1, 2), 2]] == [5, 11, 17, 23, 47]

    def test_tiny_limit(self):
        table = enumerate_s_union((3, 7), 2, 2)
        found = {h.p for hits in table.values() for h in hits}
        assert found <= {2}

    def test_rejects_large_basis(self):
        with pytest.raises(ArithmeticError_):
            enumerate_s_union(tuple(sympy.primerange(2, 85)), 100, 2)


class TestZsigmondy:
    def test_classical_exception(self):
        assert zsigmondy_primitive(2, 6) is None

    def test_examples(self):
        assert zsigmondy_primitive(2, 5) == 31
        assert zsigmondy_primitive(3, 2) is None  # 3 + 1 is a power of two

    def test_smallest_against_bruteforce(self):
        for a in range(2, 13):
            for n in range(2, 13):
                expected = None
                for q in sorted(sympy.factorint(a**n - 1)):
                    if sympy.n_order(a, q) == n:
                        expected = q
                        break
                assert zsigmondy_primitive(a, n) == expected, (a, n)

    def test_primitive_is_one_mod_n(self):
        for a in range(2, 16):
            for n in range(3, 16):
                q = zsigmondy_primitive(a, n)
                if (a, n) != (2, 6):
                    assert q is not None and q % n == 1


class TestRepunitFactorCount:
    def test_example_2_12(self):
        rep = check_repunit_factor_count(2, 12)
        assert rep.factors.value == 4095
        assert rep.omega_count == 4 and rep.required == 1
        assert rep.witness_prime == 13 and 13 % 12 == 1
        assert rep.holds

    def test_example_2_6(self):
        rep = check_repunit_factor_count(2, 6)
        assert rep.omega_count == 2 and rep.witness_prime == 7

    def test_example_3_5(self):
        rep = check_repunit_factor_count(3, 5)
        assert rep.factors.value == 121
        assert rep.factors.factors == ((11, 2),)
        assert rep.witness_prime == 11 and rep.holds

    def test_small_grid(self):
        for a in range(2, 12):
            for e in range(3, 12):
                assert check_repunit_factor_count(a, e).holds

    def test_rejects_small_e(self):
        with pytest.raises(ArithmeticError_):
            check_repunit_factor_count(2, 2)


class TestResidueCount:
    def test_example_7_2_11(self):
        rep = check_residue_count(7, 1, 3, 2, 11)
        assert rep.h1 == pytest.approx(log(7) / log(2))
        assert rep.h2 == pytest.approx(log(7) / log(11))
        assert rep.rhs == 3 and rep.holds

    def test_example_5_2_3(self):
        rep = check_residue_count(5, 1, 4, 2, 3)
        assert rep.lhs == pytest.approx(1.7007, abs=1e-3)
        assert rep.rhs == 4 and rep.holds

    def test_inapplicable_raises(self):
        with pytest.raises(InapplicableInstance):
            check_residue_count(7, 4, 3, 2, 11)  # 2^3 is tiny next to 7^4

    def test_f1_sweep_clean(self):
        reports = sweep_residue_counts(50, 1, 60)
        assert reports  # plenty of applicable instances
        assert all(r.holds for r in reports)

    def test_group_order_bound_always_holds(self):
        # the lattice count is bounded by the exact x^e = 1 solution count
        reports = sweep_residue_counts(20, 3, 40)
        assert all(r.holds_exact for r in reports if r.rhs_exact is not None)

    def test_known_stated_bound_violation(self):
        # 2^6 = 64 = 1 (mod 9) and 5^6 = 15625 = 1 (mod 9), yet
        # (1/2)(2 log3/log2)(2 log3/log5) > gcd(6, 2): the stated gcd
        # bound fails once f >= 2 lets the modulus group grow
        rep = check_residue_count(3, 2, 6, 2, 5)
        assert not rep.holds
        assert rep.holds_exact  # the group-order bound still holds


class TestGapCheck:
    def test_vacuous(self):
        assert check_prime_gaps([]).vacuous and check_prime_gaps([]).holds
        assert check_prime_gaps([13]).holds

    def test_pair_example(self):
        rep = check_prime_gaps([3, 5])
        assert rep.holds and log(5) / log(3) > 9 / 8

    def test_violation_reported(self):
        rep = check_prime_gaps([11, 13])
        assert not rep.holds
        assert rep.violations[0][:2] == (11, 13)

    def test_assembled_from_sieve(self):
        # length-14 repunits over a two-prime basis: e > 3 k^2 holds for k = 2
        spec = SieveSpec(q_primes=(3, 5), subset=(1, 2), e=14, limit=10**4)
        hits = enumerate_sie(spec)
        parts = partition_by_dominant_divisor(spec, hits)
        for part in parts.values():
            assert check_prime_gaps(part, s=2).holds

    def test_partition_covers_all(self):
        spec = SieveSpec(q_primes=(2, 3), subset=(1, 2), e=2, limit=500)
        hits = enumerate_sie(spec)
        parts = partition_by_dominant_divisor(spec, hits)
        scattered = sorted(p for lst in parts.values() for p in lst)
        assert scattered == [h.p for h in hits]
        # dominant power is at least the sqrt of the repunit (pigeonhole, k = 2)
        for i, plist in parts.items():
            for p in plist:
                hit = next(h for h in hits if h.p == p)
                dom = spec.q_primes[i - 1] ** hit.exponent_map()[i]
                assert dom * dom >= repunit(p, 2)


class TestClassify:
    def test_example_u3(self):
        out = classify_factors(factorize(9), (13,), 0)
        assert len(out) == 1
        c = out[0]
        assert c.klass == "U3" and c.witness_d == 3

    def test_example_u1(self):
        out = classify_factors(factorize(97), (13,), 0)
        assert out[0].klass == "U1" and out[0].witness_d is None

    def test_example_u2(self):
        out = classify_factors(factorize(3**4), (11, 13), 2)
        assert out[0].klass == "U2" and out[0].witness_d == 5

    def test_u4_fallback(self):
        # (7^3 - 1)/6 = 57 = 3 * 19 is not smooth over {5}
        out = classify_factors(factorize(7**2), (5,), 1)
        assert out[0].klass == "U4"

    def test_partition_property(self):
        n = factorize(2**4 * 3**2 * 7 * 11**6)
        out = classify_factors(n, (2, 3, 5, 13), 2)
        assert [c.p for c in out] == [2, 3, 7, 11]
        assert all(c.klass in ("U1", "U2", "U3", "U4") for c in out)
        assert len(out) == len(n.factors)

    def test_s_equals_k_blocks_u3(self):
        # with every basis prime on the U2 side, U3 needs an empty range
        out = classify_factors(factorize(9), (13,), 1)
        assert out[0].klass == "U2"
