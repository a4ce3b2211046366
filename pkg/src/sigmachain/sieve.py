"""Cyclotomic smoothness sets, primitive divisors, and residue/gap checks.

The central object is the set of primes p whose length-e repunit
(p**e - 1)/(p - 1) factors exactly over a fixed basis of primes, every
basis prime appearing at least once.  Enumeration scans candidate primes
in independent chunks; a product-generation strategy doubles as a
cross-check oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt

from .arith import (
    ArithmeticError_,
    Factorization,
    factorize,
    is_prime,
    order_is_exactly,
    primes_in_range,
    repunit,
)

GUARD_BAND = 1e-9
MAX_BASIS = 20
_CONG_TRIAL_BOUND = 100_000


class InapplicableInstance(ValueError):
    """The hypothesis of a checker fails; the instance carries no information."""


def _divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def cyclotomic_value(d: int, a: int) -> int:
    """Value of the d-th cyclotomic polynomial at a (d >= 1, a >= 2)."""
    if d < 1 or a < 2:
        raise ArithmeticError_(f"cyclotomic_value needs d >= 1, a >= 2, got ({d}, {a})")
    if d == 1:
        return a - 1
    num = 1
    den = 1
    for t in _divisors(d):
        mu = _mobius(t)
        if mu == 1:
            num *= a ** (d // t) - 1
        elif mu == -1:
            den *= a ** (d // t) - 1
    assert num % den == 0
    return num // den


def _mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f.factors):
        return 0
    return -1 if len(f.factors) % 2 else 1


@lru_cache(maxsize=16384)
def factor_cyclotomic(a: int, d: int) -> Factorization:
    """Factor the d-th cyclotomic value at a.

    Every prime factor other than the largest prime dividing d is
    congruent to 1 mod d, which makes congruence-guided trial division
    and a d-boosted p-1 stage effective on the large cases.
    """
    if d < 2:
        raise ArithmeticError_("factor_cyclotomic requires d >= 2")
    v = cyclotomic_value(d, a)
    found: dict[int, int] = {}
    intrinsic = max(p for p, _ in factorize(d).factors)
    while v % intrinsic == 0:
        found[intrinsic] = found.get(intrinsic, 0) + 1
        v //= intrinsic
    if d >= 7 and v > 10**12:
        step = d if d % 2 == 0 else 2 * d
        q = 1 + step
        while q <= _CONG_TRIAL_BOUND and q * q <= v:
            while v % q == 0:
                found[q] = found.get(q, 0) + 1
                v //= q
            q += step
    if v > 1:
        for p, e in factorize(v, _pm1_multiplier=d).factors:
            found[p] = found.get(p, 0) + e
    return Factorization.from_pairs(found.items())


def factor_repunit(a: int, e: int) -> Factorization:
    """Factor (a**e - 1)/(a - 1) by assembling its cyclotomic parts."""
    if a < 2 or e < 1:
        raise ArithmeticError_(f"factor_repunit needs a >= 2, e >= 1, got ({a}, {e})")
    merged: dict[int, int] = {}
    for d in _divisors(e):
        if d == 1:
            continue
        for p, k in factor_cyclotomic(a, d).factors:
            merged[p] = merged.get(p, 0) + k
    f = Factorization.from_pairs(merged.items())
    assert f.value == repunit(a, e)
    return f


# ---------------------------------------------------------------------------
# smoothness-set enumeration


@dataclass(frozen=True)
class SieveSpec:
    """Query: basis primes, active index subset (1-based), repunit length, scan bound."""

    q_primes: tuple[int, ...]
    subset: tuple[int, ...]
    e: int
    limit: int

    def __post_init__(self) -> None:
        if not self.q_primes:
            raise ArithmeticError_("empty prime basis")
        if len(self.q_primes) > MAX_BASIS:
            raise ArithmeticError_(f"basis larger than {MAX_BASIS} primes")
        last = 1
        for q in self.q_primes:
            if q <= last or not is_prime(q):
                raise ArithmeticError_(f"basis must be strictly increasing primes, got {q}")
            last = q
        k = len(self.q_primes)
        if not self.subset:
            raise ArithmeticError_("empty index subset")
        if sorted(set(self.subset)) != sorted(self.subset) or any(
            i < 1 or i > k for i in self.subset
        ):
            raise ArithmeticError_(f"subset must be distinct indices in 1..{k}")
        if self.e < 2:
            raise ArithmeticError_(f"repunit length must be >= 2, got {self.e}")
        if self.limit < 2:
            raise ArithmeticError_(f"scan limit must be >= 2, got {self.limit}")

    @property
    def active_primes(self) -> tuple[int, ...]:
        return tuple(self.q_primes[i - 1] for i in sorted(self.subset))

    @property
    def q_max_active(self) -> int:
        return max(self.active_primes)

    @property
    def q_max(self) -> int:
        return max(self.q_primes)


@dataclass(frozen=True)
class SievePrime:
    """A prime certified in the smoothness set, with its exponent vector."""

    p: int
    e: int
    exponents: tuple[tuple[int, int], ...]  # (basis index, exponent >= 1)

    def exponent_map(self) -> dict[int, int]:
        return dict(self.exponents)

    def certificate_value(self, q_primes: tuple[int, ...]) -> int:
        out = 1
        for i, a in self.exponents:
            out *= q_primes[i - 1] ** a
        return out

    def validate(self, spec: SieveSpec) -> None:
        if any(a < 1 for _, a in self.exponents):
            raise ArithmeticError_("exponent vector must be >= 1 everywhere")
        if tuple(sorted(i for i, _ in self.exponents)) != tuple(sorted(spec.subset)):
            raise ArithmeticError_("exponent vector must cover exactly the subset")
        if self.certificate_value(spec.q_primes) != repunit(self.p, self.e):
            raise ArithmeticError_(
                f"certificate mismatch for p={self.p}, e={self.e}"
            )

    def to_json(self, q_primes: tuple[int, ...]) -> dict:
        return {
            "p": str(self.p),
            "e": self.e,
            "exponents": [[i, a] for i, a in self.exponents],
            "certificate": {
                "repunit": str(repunit(self.p, self.e)),
                "basis": [[i, str(q_primes[i - 1])] for i, _ in self.exponents],
            },
        }


def _smooth_signature(value: int, spec: SieveSpec) -> tuple[tuple[int, int], ...] | None:
    """Exponent vector if value == prod of active primes (all present), else None."""
    rem = value
    vec = []
    for i in sorted(spec.subset):
        q = spec.q_primes[i - 1]
        a = 0
        while rem % q == 0:
            rem //= q
            a += 1
        if a == 0:
            return None
        vec.append((i, a))
    if rem != 1:
        return None
    return tuple(vec)


def enumerate_sie(spec: SieveSpec, chunk_size: int = 1 << 16) -> list[SievePrime]:
    """Primes p <= limit whose repunit factors exactly over the active basis.

    The scan range is cut into independent chunks and results merged by
    sorting, so the output does not depend on chunk_size.
    """
    hits: list[SievePrime] = []
    lo = 2
    while lo <= spec.limit:
        hi = min(lo + chunk_size - 1, spec.limit)
        for p in primes_in_range(lo, hi):
            vec = _smooth_signature(repunit(p, spec.e), spec)
            if vec is not None:
                hits.append(SievePrime(p=p, e=spec.e, exponents=vec))
        lo = hi + 1
    hits.sort(key=lambda s: s.p)
    for h in hits:
        h.validate(spec)
    return hits


def enumerate_sie_products(spec: SieveSpec) -> list[SievePrime]:
    """Cross-check enumeration: generate smooth products and invert the repunit.

    Walks every product of active primes (all exponents >= 1) up to
    repunit(limit, e) and keeps those equal to a repunit of a prime
    p <= limit.  Independent of the scanning strategy.
    """
    bound = repunit(spec.limit, spec.e)
    active = spec.active_primes
    hits: list[SievePrime] = []

    def invert(value: int) -> int | None:
        # solve repunit(p, e) == value for integer p >= 2;
        # p^(e-1) < repunit(p, e) < 2 p^(e-1) pins p near the (e-1)-th root
        if spec.e == 2:
            p = value - 1
            return p if p >= 2 else None
        approx = _iroot_upper(value, spec.e - 1)
        for p in range(max(2, approx - 2), approx + 3):
            if repunit(p, spec.e) == value:
                return p
        return None

    def rec(idx: int, prod: int, vec: list[tuple[int, int]]) -> None:
        if idx == len(active):
            p = invert(prod)
            if p is not None and p <= spec.limit and is_prime(p):
                hits.append(
                    SievePrime(p=p, e=spec.e, exponents=tuple(vec))
                )
            return
        q = active[idx]
        i = sorted(spec.subset)[idx]
        v = prod * q
        a = 1
        while v <= bound:
            vec.append((i, a))
            rec(idx + 1, v, vec)
            vec.pop()
            v *= q
            a += 1

    rec(0, 1, [])
    hits.sort(key=lambda s: s.p)
    for h in hits:
        h.validate(spec)
    return hits


def _iroot_upper(n: int, k: int) -> int:
    x = 1
    while x**k < n:
        x <<= 1
    lo, hi = x >> 1, x
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo


def enumerate_s_union(
    q_primes, limit: int, e_max: int, chunk_size: int = 1 << 16
) -> dict[tuple[tuple[int, ...], int], list[SievePrime]]:
    """Smoothness sets for every nonempty index subset and 2 <= e <= e_max.

    Keyed by (subset, e); only nonempty sets appear.  A single scan per e
    assigns each prime to the subset matching the exact support of its
    repunit over the basis.
    """
    q_primes = tuple(q_primes)
    if len(q_primes) > MAX_BASIS:
        raise ArithmeticError_(f"basis larger than {MAX_BASIS} primes")
    if e_max < 2:
        raise ArithmeticError_(f"e_max must be >= 2, got {e_max}")
    full = SieveSpec(
        q_primes=q_primes, subset=tuple(range(1, len(q_primes) + 1)), e=2, limit=limit
    )
    out: dict[tuple[tuple[int, ...], int], list[SievePrime]] = {}
    for e in range(2, e_max + 1):
        lo = 2
        while lo <= limit:
            hi = min(lo + chunk_size - 1, limit)
            for p in primes_in_range(lo, hi):
                rem = repunit(p, e)
                vec = []
                for i, q in enumerate(full.q_primes, start=1):
                    a = 0
                    while rem % q == 0:
                        rem //= q
                        a += 1
                    if a:
                        vec.append((i, a))
                if rem == 1 and vec:
                    key = (tuple(i for i, _ in vec), e)
                    out.setdefault(key, []).append(
                        SievePrime(p=p, e=e, exponents=tuple(vec))
                    )
            lo = hi + 1
    return {k: out[k] for k in sorted(out)}


# ---------------------------------------------------------------------------
# primitive divisors and factor-count checks


def zsigmondy_primitive(a: int, n: int) -> int | None:
    """Smallest prime q | a**n - 1 whose order at a is exactly n, or None.

    The classical exceptions: (2, 6), and n = 2 with a + 1 a power of
    two.  Every returned prime satisfies q = 1 (mod n).
    """
    if a < 2 or n < 2:
        raise ArithmeticError_(f"zsigmondy_primitive needs a >= 2, n >= 2, got ({a}, {n})")
    n_primes = factorize(n).prime_set
    for q, _ in factor_cyclotomic(a, n).factors:
        if order_is_exactly(a, n, q, n_primes):
            return q
    return None


@dataclass(frozen=True)
class RepunitFactorReport:
    """Distinct-factor count of a repunit vs the count forced by its length."""

    a: int
    e: int
    omega_count: int
    required: int
    witness_prime: int | None
    holds: bool
    factors: Factorization

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "e": self.e,
            "omega_count": self.omega_count,
            "required": self.required,
            "witness_prime": None if self.witness_prime is None else str(self.witness_prime),
            "holds": self.holds,
            "repunit": self.factors.to_json(),
        }


def check_repunit_factor_count(a: int, e: int) -> RepunitFactorReport:
    """(a**e - 1)/(a - 1) has >= omega(e) - 1 prime factors, one = 1 mod e."""
    if a < 2 or e < 3:
        raise ArithmeticError_(f"needs a >= 2, e >= 3, got ({a}, {e})")
    f = factor_repunit(a, e)
    required = len(factorize(e).factors) - 1
    witness = next((p for p, _ in f.factors if p % e == 1), None)
    holds = len(f.factors) >= required and witness is not None
    return RepunitFactorReport(
        a=a,
        e=e,
        omega_count=len(f.factors),
        required=required,
        witness_prime=witness,
        holds=holds,
        factors=f,
    )


# ---------------------------------------------------------------------------
# residue counting and gap checks


@dataclass(frozen=True)
class ResidueCountReport:
    """Half the residue-lattice area against the shared-order gcd bound.

    rhs_exact is the true count of solutions of x**e = 1 modulo p0**f,
    which is what the counting argument actually bounds; the stated
    bound gcd(e, p0 - 1) coincides with it only for f = 1.
    """

    p0: int
    f: int
    e: int
    p1: int
    p2: int
    h1: float
    h2: float
    lhs: float
    rhs: int
    holds: bool
    rhs_exact: int | None
    holds_exact: bool | None

    def to_json(self) -> dict:
        return {
            "p0": self.p0,
            "f": self.f,
            "e": self.e,
            "p1": self.p1,
            "p2": self.p2,
            "h1": self.h1,
            "h2": self.h2,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "rhs_exact": self.rhs_exact,
            "holds_exact": self.holds_exact,
        }


def _solution_count(e: int, modulus: int) -> int | None:
    if modulus > 2_000_000:
        return None
    return sum(1 for x in range(1, modulus) if gcd(x, modulus) == 1 and pow(x, e, modulus) == 1)


def check_residue_count(p0: int, f: int, e: int, p1: int, p2: int) -> ResidueCountReport:
    """Verify (1/2) H1 H2 <= gcd(e, p0 - 1) for an applicable instance.

    Applicability means p1**e = p2**e = 1 modulo p0**f; otherwise
    InapplicableInstance is raised.  The inequality is evaluated in double
    precision with a relative guard band, the two sides being far apart
    in genuine instances.
    """
    for p in (p0, p1, p2):
        if not is_prime(p):
            raise ArithmeticError_(f"{p} is not prime")
    if len({p0, p1, p2}) != 3:
        raise ArithmeticError_("p0, p1, p2 must be distinct")
    if e < 1 or f < 1:
        raise ArithmeticError_("e and f must be >= 1")
    modulus = p0**f
    if pow(p1, e, modulus) != 1 or pow(p2, e, modulus) != 1:
        raise InapplicableInstance(
            f"{p1}^{e} or {p2}^{e} is not 1 modulo {p0}^{f}"
        )
    h1 = f * math.log(p0) / math.log(p1)
    h2 = f * math.log(p0) / math.log(p2)
    lhs = 0.5 * h1 * h2
    rhs = gcd(e, p0 - 1)
    rhs_exact = _solution_count(e, modulus)
    return ResidueCountReport(
        p0=p0,
        f=f,
        e=e,
        p1=p1,
        p2=p2,
        h1=h1,
        h2=h2,
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs * (1 + GUARD_BAND),
        rhs_exact=rhs_exact,
        holds_exact=None if rhs_exact is None else lhs <= rhs_exact * (1 + GUARD_BAND),
    )


def sweep_residue_counts(prime_max: int, f_max: int, e_max: int):
    """All applicable instances with p0, p1, p2 <= prime_max; returns reports."""
    ps = primes_in_range(2, prime_max)
    reports: list[ResidueCountReport] = []
    for p0 in ps:
        for f in range(1, f_max + 1):
            modulus = p0**f
            others = [p for p in ps if p != p0]
            ok_exp = {p: [e for e in range(1, e_max + 1) if pow(p, e, modulus) == 1] for p in others}
            for i, p1 in enumerate(others):
                if not ok_exp[p1]:
                    continue
                for p2 in others[i + 1 :]:
                    if not ok_exp[p2]:
                        continue
                    common = set(ok_exp[p1]) & set(ok_exp[p2])
                    for e in sorted(common):
                        reports.append(check_residue_count(p0, f, e, p1, p2))
    return reports


@dataclass(frozen=True)
class GapReport:
    """Consecutive-prime logarithm ratios against the 9/8 gap floor."""

    primes: tuple[int, ...]
    s: int
    holds: bool
    vacuous: bool
    violations: tuple[tuple[int, int, float], ...]

    def to_json(self) -> dict:
        return {
            "primes": [str(p) for p in self.primes],
            "s": self.s,
            "holds": self.holds,
            "vacuous": self.vacuous,
            "violations": [[str(a), str(b), r] for a, b, r in self.violations],
        }


def check_prime_gaps(primes, s: int = 1) -> GapReport:
    """Assert log p_{j+1} > (9/8) log p_j along a sorted prime list."""
    primes = tuple(primes)
    if list(primes) != sorted(primes):
        raise ArithmeticError_("prime list must be sorted ascending")
    violations = []
    for a, b in zip(primes, primes[1:]):
        ratio = math.log(b) / math.log(a)
        if not ratio > 9 / 8:
            violations.append((a, b, ratio))
    return GapReport(
        primes=primes,
        s=s,
        holds=not violations,
        vacuous=len(primes) < 2,
        violations=tuple(violations),
    )


def partition_by_dominant_divisor(
    spec: SieveSpec, sprimes: list[SievePrime]
) -> dict[int, list[int]]:
    """Split a smoothness set by which basis prime power dominates the repunit.

    The dominant power is at least the k-th root of the repunit value by
    pigeonhole, which is the hypothesis the gap check needs.  Ties go to
    the smaller index.
    """
    out: dict[int, list[int]] = {i: [] for i in sorted(spec.subset)}
    for sp in sprimes:
        best_i, best_v = None, 0
        for i, a in sp.exponents:
            v = spec.q_primes[i - 1] ** a
            if v > best_v:
                best_i, best_v = i, v
        out[best_i].append(sp.p)
    for lst in out.values():
        lst.sort()
    return out


# ---------------------------------------------------------------------------
# the four-way classification of prime factors


@dataclass(frozen=True)
class ClassifiedFactor:
    """One prime factor of N placed in exactly one of the classes U1..U4."""

    p: int
    exponent_in_n: int
    klass: str  # "U1" | "U2" | "U3" | "U4"
    witness_d: int | None

    def to_json(self) -> dict:
        return {
            "p": str(self.p),
            "exponent_in_n": self.exponent_in_n,
            "class": self.klass,
            "witness_d": self.witness_d,
        }


def classify_factors(nf: Factorization, q_all, s: int) -> list[ClassifiedFactor]:
    """Classify each prime factor p with p^(e-1) || N by its repunit smoothness.

    U1: e = 2.  U2: some divisor d > 2 of e has (p^d-1)/(p^l-1), l = gcd(d, 2),
    factoring entirely over the first s basis primes.  U3: same over the
    remaining basis primes.  U4: neither.  U2 is tried before U3; divisors
    are tried smallest first, giving canonical witnesses.
    """
    q_all = tuple(q_all)
    if len(set(q_all)) != len(q_all) or any(not is_prime(q) for q in q_all):
        raise ArithmeticError_("q_all must be distinct primes")
    if not 0 <= s <= len(q_all):
        raise ArithmeticError_(f"split index must be in 0..{len(q_all)}")
    low = set(q_all[:s])
    high = set(q_all[s:])
    out: list[ClassifiedFactor] = []
    for p, exp in nf.factors:
        e = exp + 1
        if e == 2:
            out.append(ClassifiedFactor(p=p, exponent_in_n=exp, klass="U1", witness_d=None))
            continue
        ds = [d for d in _divisors(e) if d > 2]
        factor_sets = {}
        for d in ds:
            l = gcd(d, 2)
            merged: set[int] = set()
            for t in _divisors(d):
                if t == 1 or l % t == 0:
                    continue
                merged.update(factor_cyclotomic(p, t).prime_set)
            factor_sets[d] = merged
        klass, witness = "U4", None
        for d in ds:
            if factor_sets[d] and factor_sets[d] <= low:
                klass, witness = "U2", d
                break
        if klass == "U4":
            for d in ds:
                if factor_sets[d] and factor_sets[d] <= high:
                    klass, witness = "U3", d
                    break
        out.append(ClassifiedFactor(p=p, exponent_in_n=exp, klass=klass, witness_d=witness))
    return out
