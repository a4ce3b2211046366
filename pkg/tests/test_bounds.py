"""Bound evaluators: golden values, exactness properties, oracle cross-checks."""

import random
from fractions import Fraction
from itertools import combinations_with_replacement

import mpmath
import pytest
import sympy

from sigmachain.arith import ArithmeticError_, factorize, sigma
from sigmachain.bounds import (
    DeltaQuery,
    EnumerationBudgetExceeded,
    build_linear_form,
    delta_lower_bound,
    delta_oracle,
    delta_recurrence_constant,
    exhaustive_relation_search,
    find_multiplicative_relation,
    linear_form_is_zero,
    matveev_c1,
    matveev_lower_bound,
    siegel_bound,
    threshold_small_prime,
    uniform_gap_bound,
)

# frozen from a 400-bit evaluation of the closed formula
C1_GOLDEN = {
    1: "646926.6395735762886944784",
    2: "152476860.13594145264228",
    3: "16901816326.54182321815917",
}


class TestMatveevC1:
    def test_golden_values(self):
        with mpmath.workprec(300):
            for n, text in C1_GOLDEN.items():
                got = matveev_c1(n, 256)
                golden = mpmath.mpf(text)
                assert abs(got - golden) / golden < mpmath.mpf(10) ** -20

    def test_monotone(self):
        assert matveev_c1(3) > matveev_c1(2) > matveev_c1(1)

    def test_precision_stability(self):
        for n in range(1, 9):
            low = matveev_c1(n, 64)
            high = matveev_c1(n, 512)
            assert abs(low - high) / high < mpmath.mpf(10) ** -12

    def test_rejects_zero(self):
        with pytest.raises(ArithmeticError_):
            matveev_c1(0)


class TestMatveevLowerBound:
    def test_exact_cancellation(self):
        inst = build_linear_form([2, 2], [1, -1])
        rep = matveev_lower_bound(inst)
        assert rep.lambda_is_zero and rep.holds and rep.lambda_value is None

    def test_example_3log2_minus_log7(self):
        inst = build_linear_form([2, 7], [3, -1])
        rep = matveev_lower_bound(inst)
        assert not rep.lambda_is_zero
        lam = mpmath.mpf(rep.lambda_value)
        assert abs(lam - mpmath.mpf("0.13353139262452")) < 1e-10
        assert mpmath.log(abs(lam)) < 0  # ~ -2.01, far above the huge negative bound
        assert rep.holds

    def test_large_lambda_trivially_holds(self):
        inst = build_linear_form([2, 3], [1, 1])
        rep = matveev_lower_bound(inst)
        assert not rep.lambda_is_zero
        assert abs(mpmath.mpf(rep.lambda_value) - mpmath.log(6)) < 1e-12
        assert rep.holds

    def test_zero_detection_is_exact(self):
        # 12^2 * 18^2 = 2^6 * 3^6 = 6^6: a relation floats would miss
        assert linear_form_is_zero([12, 18, 6], [2, 2, -6])
        assert not linear_form_is_zero([12, 18, 6], [2, 2, -5])

    def test_randomized_instances(self):
        rng = random.Random(9001)
        checked = 0
        while checked < 60:
            n = rng.randint(1, 4)
            a = [rng.randint(2, 100) for _ in range(n)]
            b = [rng.choice([x for x in range(-50, 51) if x]) for _ in range(n)]
            if linear_form_is_zero(a, b):
                continue
            rep = matveev_lower_bound(build_linear_form(a, b))
            assert rep.holds, (a, b)
            checked += 1


class TestSiegelBound:
    def test_examples(self):
        assert siegel_bound(1, 1) == 2
        assert siegel_bound(2, 3) == 27

    def test_rejects_zero_entries(self):
        with pytest.raises(ArithmeticError_):
            siegel_bound(1, 0)
        with pytest.raises(ArithmeticError_):
            siegel_bound(0, 1)

    def test_matches_symbolic_ceiling(self):
        for s in range(1, 8):
            for A in range(1, 20):
                exact = siegel_bound(s, A)
                symbolic = sympy.ceiling(sympy.sqrt(s + 1) ** s * A**s)
                assert exact == int(symbolic), (s, A)


class TestRelationFinder:
    def test_constructed_dependence(self):
        assert find_multiplicative_relation([6, 36]) == (2, -1)

    def test_independent_pair(self):
        assert find_multiplicative_relation([2, 3]) is None

    def test_triple_with_true_kernel(self):
        b = find_multiplicative_relation([12, 18, 108])
        assert b == (1, 4, -3)
        assert Fraction(12) ** b[0] * Fraction(18) ** b[1] * Fraction(108) ** b[2] == 1
        # the exhaustive oracle agrees up to sign and scaling
        assert exhaustive_relation_search([12, 18, 108], 5) == (1, 4, -3)

    def test_rational_inputs(self):
        b = find_multiplicative_relation([Fraction(3, 2), Fraction(9, 4)])
        assert b == (2, -1)

    def test_exhaustive_consistency(self):
        rng = random.Random(9002)
        for _ in range(40):
            m = rng.randint(2, 4)
            vals = [
                Fraction(rng.randint(1, 30), rng.randint(1, 30)) for _ in range(m)
            ]
            if any(v == 1 for v in vals):
                continue
            brute = exhaustive_relation_search(vals, 4)
            found = find_multiplicative_relation(vals)
            if brute is not None:
                assert found is not None, vals
            if found is not None:
                prod = Fraction(1)
                for v, c in zip(vals, found):
                    prod *= v**c
                assert prod == 1


class TestDeltaRecurrence:
    def test_golden(self):
        assert delta_recurrence_constant(1) == 1
        assert delta_recurrence_constant(2) == 16
        assert delta_recurrence_constant(3) == 20736

    def test_ratio_property(self):
        for i in range(1, 12):
            ratio = delta_recurrence_constant(i + 1) // delta_recurrence_constant(i)
            assert ratio == (2 * (i + 1)) ** (2**i)

    def test_guard(self):
        with pytest.raises(ArithmeticError_):
            delta_recurrence_constant(13)


class TestDeltaLowerBound:
    def test_s1_example(self):
        q = DeltaQuery(s=1, n=2, d=1, primes=(3,))
        assert delta_lower_bound(q) == Fraction(1, 8)

    def test_s2_example(self):
        q = DeltaQuery(s=2, n=2, d=1, primes=(3, 5))
        assert delta_lower_bound(q) == Fraction(1, 65536)

    def test_last_exponent_pattern(self):
        # exponent of (p_s - 1) is 2^s - 1
        for s in (1, 2, 3):
            primes = tuple([3] * (s - 1) + [7])
            q = DeltaQuery(s=s, n=1, d=1, primes=primes)
            val = delta_lower_bound(q)
            den = val.denominator
            assert den % 6 ** (2**s - 1) == 0

    def test_monotone_in_n_and_primes(self):
        base = delta_lower_bound(DeltaQuery(s=2, n=3, d=1, primes=(3, 5)))
        assert delta_lower_bound(DeltaQuery(s=2, n=4, d=1, primes=(3, 5))) < base
        assert delta_lower_bound(DeltaQuery(s=2, n=3, d=1, primes=(3, 7))) < base
        assert delta_lower_bound(DeltaQuery(s=2, n=3, d=1, primes=(5, 5))) < base

    def test_rejects_s0_and_bad_inputs(self):
        with pytest.raises(ArithmeticError_):
            delta_lower_bound(DeltaQuery(s=0, n=2, d=1, primes=()))
        with pytest.raises(ArithmeticError_):
            DeltaQuery(s=1, n=2, d=2, primes=(3,))
        with pytest.raises(ArithmeticError_):
            DeltaQuery(s=1, n=2, d=1, primes=(2,))
        with pytest.raises(ArithmeticError_):
            DeltaQuery(s=2, n=2, d=1, primes=(5, 3))


class TestDeltaOracle:
    def test_single_prime_instance(self):
        rep = delta_oracle(1, (3,), 6, [7])
        assert rep.holds and rep.instances
        # the target built from m = 7 with exponent 1 is h(21) = 32/21
        targets = {(i.n, i.d) for i in rep.instances}
        assert (32, 21) in targets

    def test_m_one_is_skipped(self):
        rep = delta_oracle(1, (3,), 3, [1, 7])
        assert all(i.m != 1 for i in rep.instances)

    def test_two_primes(self):
        rep = delta_oracle(2, (3, 5), 4, [7])
        assert rep.holds
        worst = rep.worst_instance()
        assert worst.min_diff >= worst.bound

    def test_m_must_exceed_block_primes(self):
        rep = delta_oracle(1, (7,), 3, [7, 11])
        assert all(i.m == 11 for i in rep.instances)

    def test_guards(self):
        with pytest.raises(ArithmeticError_):
            delta_oracle(4, (3, 3, 3, 3), 3, [7])
        with pytest.raises(ArithmeticError_):
            delta_oracle(1, (17,), 3, [19])
        with pytest.raises(ArithmeticError_):
            delta_oracle(1, (3,), 7, [7])


class TestUniformGapBound:
    def test_base_case(self):
        assert uniform_gap_bound(0, 2) == Fraction(1, 2)

    def test_one_step_golden(self):
        # threshold 8, odd primes {3, 5, 7}, worst bound 1/24
        assert uniform_gap_bound(1, 2) == Fraction(1, 24)

    def test_one_step_cross_check(self):
        for n in (2, 3, 4):
            got = uniform_gap_bound(1, n)
            threshold = Fraction(2 * n) / Fraction(1, n)
            primes = [p for p in sympy.primerange(3, threshold) if Fraction(p) < threshold]
            manual = min(
                delta_lower_bound(DeltaQuery(s=1, n=n, d=1, primes=(p,))) for p in primes
            )
            assert got == min(Fraction(1, 2 * n), manual)

    def test_monotone_in_s(self):
        assert uniform_gap_bound(1, 2) <= uniform_gap_bound(0, 2)

    def test_budget_guard(self):
        with pytest.raises(EnumerationBudgetExceeded):
            uniform_gap_bound(2, 2, multiset_budget=10)

    def test_rejects_desk_scale_violation(self):
        with pytest.raises(ArithmeticError_):
            uniform_gap_bound(5, 2)


class TestThreshold:
    def test_guard(self):
        with pytest.raises(ArithmeticError_):
            threshold_small_prime(1.0, 1, 15.15)

    def test_golden(self):
        with mpmath.workprec(200):
            got = threshold_small_prime(1.0, 1, 10**6)
            golden = mpmath.mpf("3.73899441572509746317975")
            assert abs(got - golden) < mpmath.mpf(10) ** -20

    def test_monotone_in_q(self):
        a = threshold_small_prime(1.0, 1, 10**4)
        b = threshold_small_prime(1.0, 1, 10**8)
        assert b > a
