"""Exact integer arithmetic: factorization, divisor sums, abundancy.

Everything here is arbitrary precision and deterministic.  The factoring
strategy is trial division by a fixed table of small primes followed by
Brent-cycle splitting with a fixed seed schedule, so repeated runs always
produce the same canonical factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

try:
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _mpz = int

TRIAL_BOUND = 4096

# Deterministic Miller-Rabin below this threshold with the 13 smallest
# prime bases (Sorenson-Webster verified bound).
_MR_DETERMINISTIC_BELOW = 3317044064679887385961981
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _sieve_upto(n: int) -> bytearray:
    sieve = bytearray(b"\x01") * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            start = p * p
            sieve[start :: p] = b"\x00" * (((n - start) // p) + 1)
    return sieve


def primes_upto(n: int) -> list[int]:
    """All primes <= n, ascending."""
    if n < 2:
        return []
    sieve = _sieve_upto(n)
    return [i for i in range(2, n + 1) if sieve[i]]


_SMALL_PRIMES = tuple(primes_upto(TRIAL_BOUND))
_SMALL_PRIME_SET = frozenset(_SMALL_PRIMES)


def primes_in_range(lo: int, hi: int) -> list[int]:
    """Primes in [lo, hi] via a segmented sieve; safe for large lo."""
    lo = max(lo, 2)
    if hi < lo:
        return []
    if hi <= TRIAL_BOUND:
        return [p for p in _SMALL_PRIMES if lo <= p <= hi]
    seg = bytearray(b"\x01") * (hi - lo + 1)
    for p in primes_upto(isqrt(hi)):
        start = max(p * p, ((lo + p - 1) // p) * p)
        seg[start - lo :: p] = b"\x00" * ((hi - start) // p + 1)
    return [lo + i for i, v in enumerate(seg) if v]


def _mr_witness(n: int, a: int) -> bool:
    """True if a witnesses compositeness of odd n > 2."""
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def _lucas_strong_prp(n: int) -> bool:
    """Strong Lucas probable-prime test with Selfridge's parameters."""
    # find D in 5, -7, 9, -11, ... with jacobi(D, n) == -1
    d = 5
    while True:
        j = _jacobi(d, n)
        if j == 0:
            return n == abs(d)
        if j == -1:
            break
        d = -d - 2 if d > 0 else -d + 2
    p, q = 1, (1 - d) // 4
    # n + 1 = s * 2^r
    s = n + 1
    r = 0
    while s % 2 == 0:
        s //= 2
        r += 1
    # compute U_s, V_s by binary ladder
    u, v, qk = 1, p, q
    for bit in bin(s)[3:]:
        u = u * v % n
        v = (v * v - 2 * qk) % n
        qk = qk * qk % n
        if bit == "1":
            u, v = (p * u + v) % n, (d * u + p * v) % n
            if u % 2:
                u += n
            if v % 2:
                v += n
            u, v = u // 2 % n, v // 2 % n
            qk = qk * q % n
    if u == 0 or v == 0:
        return True
    for _ in range(r - 1):
        v = (v * v - 2 * qk) % n
        if v == 0:
            return True
        qk = qk * qk % n
    return False


def _jacobi(a: int, n: int) -> int:
    assert n > 0 and n % 2 == 1
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    if n == 1:
        return result
    return 0


def is_prime(n: int) -> bool:
    """Deterministic primality check for desk-scale integers.

    Below ~3.3e24 this is the proven 13-base Miller-Rabin test; above it
    the same bases are combined with a strong Lucas test (BPSW style,
    no counterexample known).
    """
    if n < 2:
        return False
    if n <= TRIAL_BOUND:
        return n in _SMALL_PRIME_SET
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    if any(_mr_witness(n, a) for a in _MR_BASES):
        return False
    if n < _MR_DETERMINISTIC_BELOW:
        return True
    return _lucas_strong_prp(n)


class ArithmeticError_(ValueError):
    """Invalid input to an exact-arithmetic operation."""


@dataclass(frozen=True)
class Factorization:
    """Canonical factorization: strictly increasing primes, exponents >= 1."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ArithmeticError_(f"value must be positive, got {self.value}")
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last:
                raise ArithmeticError_(f"primes not strictly increasing: {p}")
            if e < 1:
                raise ArithmeticError_(f"exponent must be >= 1, got {e}")
            if not is_prime(p):
                raise ArithmeticError_(f"listed factor {p} is not prime")
            prod *= p**e
            last = p
        if prod != self.value:
            raise ArithmeticError_(
                f"factor product {prod} does not reconstruct value {self.value}"
            )

    @property
    def prime_set(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def exponent_of(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def format_compact(self) -> str:
        """"2^4*3" style rendering; "1" for the empty factorization."""
        if not self.factors:
            return "1"
        return "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors)

    def to_json(self) -> dict:
        return {
            "value": str(self.value),
            "factors": [[str(p), str(e)] for p, e in self.factors],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Factorization":
        return cls(
            value=int(obj["value"]),
            factors=tuple((int(p), int(e)) for p, e in obj["factors"]),
        )

    @classmethod
    def from_pairs(cls, pairs) -> "Factorization":
        pairs = tuple(sorted(pairs))
        value = 1
        for p, e in pairs:
            value *= p**e
        return cls(value=value, factors=pairs)


def _brent_rho(n: int, seed: int) -> int | None:
    """One Brent cycle walk; None only in the rare whole-cycle collision."""
    nz = _mpz(n)
    y = _mpz(seed % (n - 1) + 1)
    c = _mpz((seed * 2654435761) % (n - 3) + 1)
    m = 256
    g, r, q = _mpz(1), 1, _mpz(1)
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % nz
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % nz
                q = q * abs(x - y) % nz
            g = gcd(int(q), n)
            k += m
        r <<= 1
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % nz
            g = gcd(abs(int(x - ys)), n)
    return int(g) if 1 < g < n else None


def _pollard_pm1(n: int, bound: int, extra_multiplier: int = 1) -> int | None:
    """Stage-1 p-1 attempt with prime powers up to bound."""
    a = _mpz(2)
    nz = _mpz(n)
    if extra_multiplier > 1:
        a = pow(a, extra_multiplier, nz)
    for p in primes_upto(bound):
        pk = p
        while pk * p <= bound:
            pk *= p
        a = pow(a, pk, nz)
    g = gcd(int(a) - 1, n)
    return g if 1 < g < n else None


def _iroot(n: int, k: int) -> int:
    """Floor of the k-th root of n."""
    if n < 2 or k == 1:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def _as_perfect_power(n: int) -> tuple[int, int] | None:
    """(base, k) with base**k == n and k >= 2, or None."""
    for k in range(2, n.bit_length() + 1):
        root = _iroot(n, k)
        if root < 2:
            return None
        if root**k == n:
            return root, k
    return None


def _split(n: int, pm1_multiplier: int) -> int:
    """Deterministically find a nontrivial factor of composite n."""
    f = _pollard_pm1(n, 1 << 16, pm1_multiplier)
    if f is not None:
        return f
    seed = 1
    while True:
        f = _brent_rho(n, seed)
        if f is not None:
            return f
        seed += 1


def _factor_map(n: int, pm1_multiplier: int = 1) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return out
    stack = [n]
    while stack:
        v = stack.pop()
        if v <= TRIAL_BOUND or is_prime(v):
            out[v] = out.get(v, 0) + 1
            continue
        power = _as_perfect_power(v)
        if power is not None:
            base, k = power
            for _ in range(k):
                stack.append(base)
            continue
        f = _split(v, pm1_multiplier)
        stack.append(f)
        stack.append(v // f)
    return out


def factorize(n: int, _pm1_multiplier: int = 1) -> Factorization:
    """Canonical factorization of n >= 1."""
    if n < 1:
        raise ArithmeticError_(f"factorize requires n >= 1, got {n}")
    if n == 1:
        return Factorization(value=1, factors=())
    fm = _factor_map(n, _pm1_multiplier)
    return Factorization(value=n, factors=tuple(sorted(fm.items())))


@lru_cache(maxsize=65536)
def factorize_cached(n: int) -> Factorization:
    return factorize(n)


def sigma(f: Factorization) -> int:
    """Sum of all positive divisors."""
    out = 1
    for p, e in f.factors:
        out *= (p ** (e + 1) - 1) // (p - 1)
    return out


def sigma_of(n: int) -> int:
    """sigma(n) for a bare integer (factorizes internally)."""
    return sigma(factorize(n))


def repunit(p: int, e: int) -> int:
    """(p**e - 1) // (p - 1); equals sigma(p**(e-1)) for prime p."""
    if p < 2:
        raise ArithmeticError_(f"repunit base must be >= 2, got {p}")
    if e < 1:
        raise ArithmeticError_(f"repunit length must be >= 1, got {e}")
    return (p**e - 1) // (p - 1)


def omega(f: Factorization) -> int:
    """Number of distinct prime factors."""
    return len(f.factors)


def omega_s(f: Factorization) -> int:
    """Number of primes dividing the value exactly once."""
    return sum(1 for _, e in f.factors if e == 1)


def abundancy(f: Factorization) -> Fraction:
    """sigma(value)/value in lowest terms."""
    return Fraction(sigma(f), f.value)


def order_is_exactly(a: int, n: int, q: int, n_prime_divisors) -> bool:
    """True iff the multiplicative order of a modulo q equals n.

    n_prime_divisors must be the distinct primes dividing n; this avoids
    factoring q - 1, which may be enormous.
    """
    if a % q == 0:
        return False
    if pow(a, n, q) != 1:
        return False
    return all(pow(a, n // r, q) != 1 for r in n_prime_divisors)
