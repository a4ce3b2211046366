"""Effective bound evaluators: linear-form lower bounds, coefficient bounds
for multiplicative relations, and the abundancy-gap recurrences.

Real-valued bounds run through mpmath at a configurable working precision
(default 256 bits, SIGMACHAIN_PRECISION overrides); everything that can be
exact is an int or Fraction.  Zero-detection for linear forms in logarithms
is done by exact multiplicative-relation checking, never by comparing
floats.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import comb, isqrt

import mpmath

from .arith import (
    ArithmeticError_,
    Factorization,
    factorize,
    is_prime,
    primes_in_range,
    repunit,
)

MIN_PRECISION_BITS = 64


class EnumerationBudgetExceeded(RuntimeError):
    """A recursion step would enumerate more multisets than allowed."""


def default_precision() -> int:
    bits = int(os.environ.get("SIGMACHAIN_PRECISION", "256"))
    return max(bits, MIN_PRECISION_BITS)


@dataclass(frozen=True)
class BoundReport:
    """A computed bound with its inputs and precision metadata."""

    kind: str
    inputs: dict
    value: Fraction | str
    precision_bits: int

    def to_json(self) -> dict:
        if isinstance(self.value, Fraction):
            val = {"num": str(self.value.numerator), "den": str(self.value.denominator)}
        else:
            val = {"dec": self.value}
        return {
            "kind": self.kind,
            "inputs": self.inputs,
            "value": val,
            "precision_bits": self.precision_bits,
        }


# ---------------------------------------------------------------------------
# linear forms in logarithms


def matveev_c1(n: int, precision_bits: int | None = None) -> mpmath.mpf:
    """Matveev's C1(n) coefficient, evaluated at working precision."""
    if n < 1:
        raise ArithmeticError_(f"matveev_c1 needs n >= 1, got {n}")
    bits = precision_bits or default_precision()
    with mpmath.workprec(bits):
        nn = mpmath.mpf(n)
        value = (
            mpmath.mpf(16)
            / mpmath.factorial(n)
            * mpmath.e**nn
            * (2 * nn + 3)
            * (nn + 2)
            * (4 * (nn + 1)) ** (nn + 1)
            * (mpmath.e * nn / 2)
            * (mpmath.mpf("4.4") * nn + mpmath.mpf("5.5") * mpmath.log(nn) + 7)
        )
        return +value


@dataclass(frozen=True)
class LinearFormInstance:
    """A linear form sum(b_j * log a_j) with its Matveev input data."""

    a_values: tuple[int, ...]
    b_coeffs: tuple[int, ...]
    A_list: tuple[float, ...]
    B: float
    Omega: float

    def __post_init__(self) -> None:
        n = len(self.a_values)
        if n < 1 or len(self.b_coeffs) != n or len(self.A_list) != n:
            raise ArithmeticError_("a_values, b_coeffs, A_list must share a length >= 1")
        if any(a == 0 for a in self.a_values):
            raise ArithmeticError_("a_values must be nonzero")
        for a, A in zip(self.a_values, self.A_list):
            if A < 0.16:
                raise ArithmeticError_(f"A_j must be >= 0.16, got {A}")
            if A < math.log(abs(a)) * (1 - 1e-12):
                raise ArithmeticError_(f"A_j={A} below |log {a}|")
        if self.B < 1:
            raise ArithmeticError_(f"B must be >= 1, got {self.B}")
        prod = 1.0
        for A in self.A_list:
            prod *= A
        if not math.isclose(prod, self.Omega, rel_tol=1e-12):
            raise ArithmeticError_("Omega inconsistent with product of A_list")

    @property
    def n(self) -> int:
        return len(self.a_values)


def build_linear_form(a_values, b_coeffs) -> LinearFormInstance:
    """Instance with A_j = max(0.16, |log a_j|), B and Omega per the standard recipe.

    Logarithms are nudged upward a few ulps so the stored doubles never
    understate the true magnitudes.
    """
    a_values = tuple(int(a) for a in a_values)
    b_coeffs = tuple(int(b) for b in b_coeffs)
    A_list = tuple(
        max(0.16, math.log(abs(a)) * (1 + 1e-14)) if abs(a) > 1 else 0.16
        for a in a_values
    )
    An = A_list[-1]
    B = max(1.0, max(abs(b) * A / An for b, A in zip(b_coeffs, A_list)))
    omega = 1.0
    for A in A_list:
        omega *= A
    return LinearFormInstance(
        a_values=a_values, b_coeffs=b_coeffs, A_list=A_list, B=B, Omega=omega
    )


def linear_form_is_zero(a_values, b_coeffs) -> bool:
    """Exact test of sum(b_j log|a_j|) == 0 via prime-exponent bookkeeping."""
    exps: dict[int, int] = {}
    for a, b in zip(a_values, b_coeffs):
        for p, e in factorize(abs(a)).factors:
            exps[p] = exps.get(p, 0) + b * e
    return all(v == 0 for v in exps.values())


@dataclass(frozen=True)
class MatveevReport:
    """Lower bound for log|Lambda| with the evaluated form alongside."""

    instance: LinearFormInstance
    bound: str  # decimal string of the right-hand side
    lambda_value: str | None  # decimal string, None when exactly zero
    lambda_is_zero: bool
    holds: bool
    precision_bits: int

    def to_json(self) -> dict:
        return {
            "a_values": [str(a) for a in self.instance.a_values],
            "b_coeffs": [str(b) for b in self.instance.b_coeffs],
            "bound": self.bound,
            "lambda": self.lambda_value,
            "lambda_is_zero": self.lambda_is_zero,
            "holds": self.holds,
            "precision_bits": self.precision_bits,
        }


def matveev_lower_bound(
    inst: LinearFormInstance, precision_bits: int | None = None
) -> MatveevReport:
    """Evaluate -C1(n)(C0 + log B) max(1, n/6) Omega against log|Lambda|.

    Lambda = 0 is decided exactly first; otherwise the evaluation precision
    escalates until |Lambda| is resolved well clear of the rounding noise.
    """
    bits = precision_bits or default_precision()
    zero = linear_form_is_zero(inst.a_values, inst.b_coeffs)
    n = inst.n
    with mpmath.workprec(bits):
        c0 = 1 + mpmath.log(3) - mpmath.log(2)
        rhs = (
            -matveev_c1(n, bits)
            * (c0 + mpmath.log(inst.B))
            * max(1, mpmath.mpf(n) / 6)
            * inst.Omega
        )
        rhs = +rhs
    rhs_str = mpmath.nstr(rhs, 30)
    if zero:
        return MatveevReport(
            instance=inst,
            bound=rhs_str,
            lambda_value=None,
            lambda_is_zero=True,
            holds=True,
            precision_bits=bits,
        )
    work = bits
    while True:
        with mpmath.workprec(work):
            lam = mpmath.fsum(
                b * mpmath.log(abs(a)) for a, b in zip(inst.a_values, inst.b_coeffs)
            )
            scale = mpmath.fsum(
                abs(b) * abs(mpmath.log(abs(a)))
                for a, b in zip(inst.a_values, inst.b_coeffs)
            )
            if scale == 0 or abs(lam) > scale * mpmath.mpf(2) ** (-(work - 16)):
                holds = mpmath.log(abs(lam)) > rhs
                lam_str = mpmath.nstr(+lam, 30)
                return MatveevReport(
                    instance=inst,
                    bound=rhs_str,
                    lambda_value=lam_str,
                    lambda_is_zero=False,
                    holds=bool(holds),
                    precision_bits=work,
                )
        work *= 2
        if work > 1 << 16:  # pragma: no cover - nonzero forms resolve long before
            raise RuntimeError("failed to resolve a nonzero linear form")


# ---------------------------------------------------------------------------
# relation finding


def siegel_bound(s: int, A: int) -> int:
    """ceil(((s+1)^(1/2) A)^s) by exact integer square roots."""
    if s < 1:
        raise ArithmeticError_(f"siegel_bound needs s >= 1, got {s}")
    if A < 1:
        raise ArithmeticError_(f"siegel_bound needs A >= 1, got {A}")
    if s % 2 == 0:
        return (s + 1) ** (s // 2) * A**s
    squared = (s + 1) ** s * A ** (2 * s)
    return isqrt(squared - 1) + 1


def _exponent_matrix(values) -> tuple[list[int], list[list[int]]]:
    """Shared prime basis and per-value exponent columns (negatives from denominators)."""
    fracs = [Fraction(v) for v in values]
    if any(v <= 0 for v in fracs):
        raise ArithmeticError_("relation values must be positive rationals")
    cols = []
    primes: set[int] = set()
    for v in fracs:
        col: dict[int, int] = {}
        for p, e in factorize(v.numerator).factors:
            col[p] = col.get(p, 0) + e
        for p, e in factorize(v.denominator).factors:
            col[p] = col.get(p, 0) - e
        cols.append(col)
        primes.update(col)
    basis = sorted(primes)
    matrix = [[col.get(p, 0) for col in cols] for p in basis]
    return basis, matrix


def _rational_kernel_basis(matrix: list[list[int]], m: int) -> list[tuple[int, ...]]:
    """Primitive integer kernel basis of an integer matrix (m columns)."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    nrows = len(rows)
    pivot_of_col: dict[int, int] = {}
    r = 0
    for c in range(m):
        pivot_row = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivot_of_col[c] = r
        r += 1
    free_cols = [c for c in range(m) if c not in pivot_of_col]
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * m
        vec[fc] = Fraction(1)
        for c, pr in pivot_of_col.items():
            vec[c] = -rows[pr][fc]
        denom_lcm = 1
        for x in vec:
            denom_lcm = denom_lcm * x.denominator // math.gcd(denom_lcm, x.denominator)
        ints = [int(x * denom_lcm) for x in vec]
        g = 0
        for x in ints:
            g = math.gcd(g, abs(x))
        ints = [x // g for x in ints]
        lead = next(x for x in ints if x != 0)
        if lead < 0:
            ints = [-x for x in ints]
        basis.append(tuple(ints))
    return basis


def find_multiplicative_relation(values) -> tuple[int, ...] | None:
    """Nonzero integer b with prod(r_j ** b_j) == 1, or None if independent.

    Works on the exact prime-exponent matrix of the factored rationals;
    among the kernel basis vectors the one with smallest max-norm is
    returned, after an exact product verification.
    """
    fracs = [Fraction(v) for v in values]
    if len(fracs) < 2:
        raise ArithmeticError_("need at least two values")
    _, matrix = _exponent_matrix(fracs)
    basis = _rational_kernel_basis(matrix, len(fracs))
    if not basis:
        return None
    best = min(basis, key=lambda v: (max(abs(x) for x in v), v))
    check = Fraction(1)
    for v, b in zip(fracs, best):
        check *= v**b
    if check != 1:  # pragma: no cover - the kernel is exact
        raise RuntimeError("kernel vector failed exact verification")
    return best


def exhaustive_relation_search(values, coeff_bound: int) -> tuple[int, ...] | None:
    """Smallest-max-norm relation found by brute force over |b_j| <= coeff_bound."""
    fracs = [Fraction(v) for v in values]
    m = len(fracs)
    for norm in range(1, coeff_bound + 1):
        for b in product(range(-norm, norm + 1), repeat=m):
            if max(abs(x) for x in b) != norm:
                continue
            check = Fraction(1)
            for v, c in zip(fracs, b):
                check *= v**c
            if check == 1:
                lead = next(x for x in b if x != 0)
                return tuple(-x for x in b) if lead < 0 else b
    return None


# ---------------------------------------------------------------------------
# abundancy-gap recurrences


MAX_RECURRENCE_DEPTH = 12


def delta_recurrence_constant(s: int) -> int:
    """The doubly exponential constant from the gap recurrence, exactly."""
    if s < 1:
        raise ArithmeticError_(f"needs s >= 1, got {s}")
    if s > MAX_RECURRENCE_DEPTH:
        raise ArithmeticError_(f"s > {MAX_RECURRENCE_DEPTH} would not fit in memory")
    c = 1
    for i in range(1, s):
        c *= (2 * (i + 1)) ** (2**i)
    return c


@dataclass(frozen=True)
class DeltaQuery:
    """Inputs for the abundancy-gap lower bound."""

    s: int
    n: int
    d: int
    primes: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.s != len(self.primes):
            raise ArithmeticError_("s must equal the number of primes")
        if self.n < 1:
            raise ArithmeticError_(f"n must be positive, got {self.n}")
        if self.d < 1 or self.d % 2 == 0:
            raise ArithmeticError_(f"d must be a positive odd integer, got {self.d}")
        last = 0
        for p in self.primes:
            if p < last:
                raise ArithmeticError_("primes must be nondecreasing")
            if p == 2 or not is_prime(p):
                raise ArithmeticError_(f"primes must be odd primes, got {p}")
            last = p

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "n": str(self.n),
            "d": str(self.d),
            "primes": [str(p) for p in self.primes],
        }


def delta_lower_bound(q: DeltaQuery) -> Fraction:
    """Exact right-hand side 1 / (C(s) n^(2^s) prod (p_i - 1)^(2^s - 2^(s-i)))."""
    if q.s < 1:
        raise ArithmeticError_("s = 0 has no prime-dependent bound; see the uniform bound")
    den = delta_recurrence_constant(q.s) * q.n ** (2**q.s)
    for i, p in enumerate(q.primes, start=1):
        den *= (p - 1) ** (2**q.s - 2 ** (q.s - i))
    return Fraction(1, den)


def _h_prime_power(p: int, e: int) -> Fraction:
    if e == 0:
        return Fraction(1)
    return Fraction(repunit(p, e + 1), p**e)


def _abundancy_of_parts(m: int, primes, exponents) -> Fraction:
    fm: dict[int, int] = {p: e for p, e in factorize(m).factors}
    for p, e in zip(primes, exponents):
        if e:
            fm[p] = fm.get(p, 0) + e
    sig = 1
    val = 1
    for p, e in sorted(fm.items()):
        sig *= repunit(p, e + 1)
        val *= p**e
    return Fraction(sig, val)


@dataclass(frozen=True)
class DeltaInstance:
    """One constructed target n/d with its scanned minimum positive gap."""

    m: int
    instance_exponents: tuple[int, ...]
    n: int
    d: int
    min_diff: Fraction
    argmin_exponents: tuple[int, ...]
    bound: Fraction
    holds: bool


@dataclass(frozen=True)
class DeltaOracleReport:
    """Empirical gap minima over constructed targets, against the exact bound."""

    s: int
    primes: tuple[int, ...]
    exponent_cap: int
    m_candidates: tuple[int, ...]
    instances: tuple[DeltaInstance, ...]
    holds: bool

    def worst_instance(self) -> "DeltaInstance | None":
        """Instance with the smallest ratio of observed gap to its bound."""
        if not self.instances:
            return None
        return min(self.instances, key=lambda i: i.min_diff / i.bound)

    def to_json(self) -> dict:
        worst = self.worst_instance()
        return {
            "s": self.s,
            "primes": [str(p) for p in self.primes],
            "exponent_cap": self.exponent_cap,
            "m_candidates": [str(m) for m in self.m_candidates],
            "holds": self.holds,
            "instances": len(self.instances),
            "worst": None
            if worst is None
            else {
                "m": str(worst.m),
                "n": str(worst.n),
                "d": str(worst.d),
                "min_diff": {
                    "num": str(worst.min_diff.numerator),
                    "den": str(worst.min_diff.denominator),
                },
                "bound": {
                    "num": str(worst.bound.numerator),
                    "den": str(worst.bound.denominator),
                },
            },
        }


def delta_oracle(s: int, primes, exponent_cap: int, m_candidates) -> DeltaOracleReport:
    """Construct gap instances exhaustively and compare to the exact bound.

    Targets n/d are abundancies of m times a prime-power block, with m
    restricted to integers whose prime factors all exceed the largest
    block prime (m = 1 is skipped: it only produces the zero gap at the
    defining exponents).  For each target the minimum positive gap over
    all exponent tuples up to the cap must stay above the bound.
    """
    primes = tuple(primes)
    if s > 3 or s != len(primes):
        raise ArithmeticError_("oracle is desk-scale: s <= 3 and s == len(primes)")
    if any(p > 13 for p in primes):
        raise ArithmeticError_("oracle is desk-scale: primes <= 13")
    if exponent_cap > 6:
        raise ArithmeticError_("oracle is desk-scale: exponent_cap <= 6")
    DeltaQuery(s=s, n=1, d=1, primes=primes)  # validates the prime block
    p_max = max(primes)
    usable_ms = []
    for m in m_candidates:
        if m == 1:
            continue
        if all(p > p_max for p, _ in factorize(m).factors):
            usable_ms.append(m)
    h_products: list[tuple[tuple[int, ...], Fraction]] = []
    for exps in product(range(exponent_cap + 1), repeat=s):
        hp = Fraction(1)
        for p, e in zip(primes, exps):
            hp *= _h_prime_power(p, e)
        h_products.append((exps, hp))
    instances = []
    seen_targets: set[Fraction] = set()
    for m in usable_ms:
        for exps, _ in h_products:
            target = _abundancy_of_parts(m, primes, exps)
            if target in seen_targets:
                continue
            seen_targets.add(target)
            best: Fraction | None = None
            best_exps: tuple[int, ...] | None = None
            for e2, hp in h_products:
                diff = target - hp
                if diff > 0 and (best is None or diff < best):
                    best, best_exps = diff, e2
            if best is None:
                continue
            bound = delta_lower_bound(
                DeltaQuery(s=s, n=target.numerator, d=target.denominator, primes=primes)
            )
            instances.append(
                DeltaInstance(
                    m=m,
                    instance_exponents=exps,
                    n=target.numerator,
                    d=target.denominator,
                    min_diff=best,
                    argmin_exponents=best_exps,
                    bound=bound,
                    holds=best >= bound,
                )
            )
    return DeltaOracleReport(
        s=s,
        primes=primes,
        exponent_cap=exponent_cap,
        m_candidates=tuple(m_candidates),
        instances=tuple(instances),
        holds=all(i.holds for i in instances),
    )


def uniform_gap_bound(
    s: int, n: int, multiset_budget: int = 2_000_000
) -> Fraction:
    """Certified positive gap bound depending only on (s, n).

    Base value 1/n; each step takes the smaller of half the previous
    value and the worst prime-dependent bound over all odd-prime
    multisets below the threshold 2n / current.  The enumeration is
    budget-guarded: thresholds explode after a few steps.
    """
    if s < 0 or n < 1:
        raise ArithmeticError_(f"needs s >= 0, n >= 1, got ({s}, {n})")
    if s > 4 or n > 100:
        raise ArithmeticError_("uniform bound is desk-scale: s <= 4, n <= 100")
    current = Fraction(1, n)
    for level in range(1, s + 1):
        threshold = Fraction(2 * n) / current
        top = (
            threshold.numerator // threshold.denominator - 1
            if threshold.denominator == 1
            else threshold.numerator // threshold.denominator
        )
        odd_primes = [p for p in primes_in_range(3, max(top, 0))]
        count = comb(len(odd_primes) + level - 1, level) if odd_primes else 0
        if count > multiset_budget:
            raise EnumerationBudgetExceeded(
                f"level {level} needs {count} multisets over {len(odd_primes)} primes"
            )
        best: Fraction | None = None
        for multiset in combinations_with_replacement(odd_primes, level):
            val = delta_lower_bound(DeltaQuery(s=level, n=n, d=1, primes=multiset))
            if best is None or val < best:
                best = val
        step = current / 2
        current = step if best is None else min(step, best)
    return current


def threshold_small_prime(C: float, k: int, q_max: float) -> mpmath.mpf:
    """exp(C (log Q / log log Q)^(1/(2k+4))) for the small-prime cutoff."""
    if q_max < 16:
        raise ArithmeticError_(f"threshold needs Q >= 16, got {q_max}")
    if C <= 0:
        raise ArithmeticError_(f"threshold needs C > 0, got {C}")
    if k < 0:
        raise ArithmeticError_(f"threshold needs k >= 0, got {k}")
    with mpmath.workprec(default_precision()):
        q = mpmath.mpf(q_max)
        ratio = mpmath.log(q) / mpmath.log(mpmath.log(q))
        return +mpmath.exp(C * ratio ** (mpmath.mpf(1) / (2 * k + 4)))
