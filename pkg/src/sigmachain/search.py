"""Exhaustive, chunked, resumable searches over sigma-iteration equations.

The hot path factors whole ranges at once: a strided sieve walk for
contiguous blocks and masked trial division for scattered value arrays,
both in numpy int64.  Hits are rare and every hit is re-certified by the
exact scalar arithmetic before a record is emitted, so a vectorization
bug cannot fabricate a solution.  Chunks are pure functions of
(task, index); output is identical for any worker count or chunk size.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing as mp
from dataclasses import dataclass
from math import isqrt

import numpy as np

from .arith import (
    ArithmeticError_,
    Factorization,
    factorize,
    is_prime,
    primes_upto,
    repunit,
    sigma,
)

SEARCH_KINDS = (
    "superperfect",
    "super_multiply_perfect",
    "sigma_prime_power",
    "pomerance_divisor",
    "pair_system",
)

MAX_PLAIN_RANGE = 1 << 34
MAX_SQUARE_RANGE = 1 << 44
DEFAULT_CHUNK = 1 << 16

_prime_array_cache: dict[int, np.ndarray] = {}


def _primes_np(bound: int) -> np.ndarray:
    arr = _prime_array_cache.get(bound)
    if arr is None:
        arr = np.array(primes_upto(bound), dtype=np.int64)
        _prime_array_cache[bound] = arr
    return arr


def sigma_range(lo: int, hi: int) -> np.ndarray:
    """sigma(n) for every n in [lo, hi] by walking prime-power multiples."""
    if lo < 1 or hi < lo:
        raise ArithmeticError_(f"bad range [{lo}, {hi}]")
    count = hi - lo + 1
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    sig = np.ones(count, dtype=np.int64)
    for p in _primes_np(isqrt(hi) + 1):
        p = int(p)
        if p * p > hi:
            break
        first = (-lo) % p
        if first >= count:
            continue
        term = np.full((count - 1 - first) // p + 1, 1 + p, dtype=np.int64)
        rem[first::p] //= p
        pk = p
        while True:
            pk2 = pk * p
            if pk2 > hi:
                break
            f2 = (-lo) % pk2
            if f2 >= count:
                break
            term[(f2 - first) // p :: pk] += pk2
            rem[f2::pk2] //= p
            pk = pk2
        sig[first::p] *= term
    left = rem > 1
    sig[left] *= rem[left] + 1
    return sig


def sigma_batch(values: np.ndarray) -> np.ndarray:
    """sigma over an arbitrary int64 array via masked trial division.

    Trial primes reach the square root of the maximum, so any cofactor
    left at the end is prime.  Entries finish early once their remainder
    drops below the square of the current prime.
    """
    if values.size == 0:
        return values.copy()
    if int(values.min()) < 1:
        raise ArithmeticError_("sigma_batch needs positive values")
    rem = values.astype(np.int64).copy()
    sig = np.ones_like(rem)
    alive = np.flatnonzero(rem > 1)
    for p in _primes_np(isqrt(int(values.max())) + 1):
        p = int(p)
        if alive.size == 0:
            break
        r = rem[alive]
        small = r < p * p
        if small.any():
            fin = alive[small]
            sig[fin] *= np.where(rem[fin] > 1, rem[fin] + 1, 1)
            rem[fin] = 1
            alive = alive[~small]
            if alive.size == 0:
                break
            r = rem[alive]
        hit = r % p == 0
        if hit.any():
            idx = alive[hit]
            t = np.ones(idx.size, dtype=np.int64)
            while idx.size:
                rem[idx] //= p
                t = t * p + 1
                still = rem[idx] % p == 0
                fin = idx[~still]
                sig[fin] *= t[~still]
                idx = idx[still]
                t = t[still]
    r = rem[alive]
    sig[alive] *= np.where(r > 1, r + 1, 1)
    return sig


# ---------------------------------------------------------------------------
# tasks and records


@dataclass(frozen=True)
class SearchTask:
    """A deterministic search specification; hashable for checkpointing."""

    kind: str
    lo: int
    hi: int
    params: tuple[tuple[str, object], ...] = ()
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self) -> None:
        if self.kind not in SEARCH_KINDS:
            raise ArithmeticError_(f"unknown search kind {self.kind!r}")
        if not 1 <= self.lo <= self.hi:
            raise ArithmeticError_(f"bad range [{self.lo}, {self.hi}]")
        if self.chunk_size < 1:
            raise ArithmeticError_("chunk_size must be positive")
        p = self.param_dict()
        parity = p.get("parity", "all")
        if parity not in ("even", "odd", "all"):
            raise ArithmeticError_(f"bad parity {parity!r}")
        if self.kind == "pair_system":
            a, b = p.get("a", 1), p.get("b", 1)
            if a < 1 or b < 1:
                raise ArithmeticError_("pair system needs a, b >= 1")
        if self.kind == "super_multiply_perfect" and p.get("k") is not None:
            if p["k"] < 1:
                raise ArithmeticError_("k filter must be >= 1")
        if p.get("square_only"):
            if self.hi > MAX_SQUARE_RANGE:
                raise ArithmeticError_(f"square-only range capped at {MAX_SQUARE_RANGE}")
        elif self.hi > MAX_PLAIN_RANGE:
            raise ArithmeticError_(f"plain range capped at {MAX_PLAIN_RANGE}")

    def param_dict(self) -> dict:
        return dict(self.params)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "lo": str(self.lo),
            "hi": str(self.hi),
            "params": {k: v for k, v in self.params},
            "chunk_size": self.chunk_size,
        }

    def task_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def _domain(self) -> tuple[int, int]:
        # square-only mode scans bases m with m*m in [lo, hi]
        if self.param_dict().get("square_only"):
            m_lo = isqrt(max(self.lo - 1, 0)) + 1
            m_hi = isqrt(self.hi)
            return m_lo, m_hi
        return self.lo, self.hi

    def num_chunks(self) -> int:
        lo, hi = self._domain()
        if hi < lo:
            return 0
        return (hi - lo) // self.chunk_size + 1

    def chunk_bounds(self, idx: int) -> tuple[int, int]:
        lo, hi = self._domain()
        clo = lo + idx * self.chunk_size
        return clo, min(clo + self.chunk_size - 1, hi)


@dataclass(frozen=True)
class SearchRecord:
    """One verified hit with exact factorization certificates.

    Construction does not self-validate (loaders and tests call
    validate()); records produced by the searches are always built from
    certified arithmetic.
    """

    kind: str
    n: int
    m: int | None
    params: tuple[tuple[str, object], ...]
    certificates: tuple[tuple[str, Factorization], ...]
    omega_sigma: int | None = None

    def cert(self, label: str) -> Factorization | None:
        for name, f in self.certificates:
            if name == label:
                return f
        return None

    def validate(self) -> None:
        certs = dict(self.certificates)
        p = dict(self.params)
        n_f = certs.get("n")
        if n_f is None or n_f.value != self.n:
            raise ArithmeticError_(f"record for {self.n} lacks a matching certificate")
        if self.kind in ("superperfect", "super_multiply_perfect", "sigma_prime_power"):
            s1, s2 = certs["sigma_n"], certs["sigma_sigma_n"]
            if sigma(n_f) != s1.value or sigma(s1) != s2.value:
                raise ArithmeticError_("sigma chain does not re-validate")
            k = p["k"]
            if s2.value != k * self.n:
                raise ArithmeticError_(f"sigma(sigma({self.n})) != {k}*{self.n}")
            if self.kind == "superperfect" and k != 2:
                raise ArithmeticError_("superperfect record must have k = 2")
            if self.kind == "sigma_prime_power" and len(s1.factors) != 1:
                raise ArithmeticError_(f"sigma({self.n}) is not a prime power")
        elif self.kind == "pomerance_divisor":
            s1, pe, spe = certs["sigma_n"], certs["pe"], certs["sigma_pe"]
            if sigma(n_f) != s1.value or sigma(pe) != spe.value:
                raise ArithmeticError_("divisor-pair certificates do not re-validate")
            if len(pe.factors) != 1:
                raise ArithmeticError_(f"{pe.value} is not a prime power")
            if s1.value % pe.value != 0 or spe.value % self.n != 0:
                raise ArithmeticError_("divisibility conditions fail")
        elif self.kind == "pair_system":
            s1, m_f, sm = certs["sigma_n"], certs["m"], certs["sigma_m"]
            a, b = p["a"], p["b"]
            if sigma(n_f) != s1.value or sigma(m_f) != sm.value:
                raise ArithmeticError_("pair certificates do not re-validate")
            if s1.value != a * self.m or sm.value != b * self.n:
                raise ArithmeticError_("pair equations fail")
        else:  # pragma: no cover
            raise ArithmeticError_(f"unknown record kind {self.kind!r}")

    def to_json(self) -> dict:
        params = {}
        for k, v in self.params:
            params[k] = str(v) if isinstance(v, int) and not isinstance(v, bool) else v
        return {
            "kind": self.kind,
            "n": str(self.n),
            "m": None if self.m is None else str(self.m),
            "params": params,
            "certificates": {name: f.to_json() for name, f in self.certificates},
            "omega_sigma": self.omega_sigma,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SearchRecord":
        params = []
        for k, v in sorted(obj["params"].items()):
            if isinstance(v, str) and (v.isdigit() or (v[:1] == "-" and v[1:].isdigit())):
                v = int(v)
            params.append((k, v))
        return cls(
            kind=obj["kind"],
            n=int(obj["n"]),
            m=None if obj["m"] is None else int(obj["m"]),
            params=tuple(params),
            certificates=tuple(
                (name, Factorization.from_json(f))
                for name, f in sorted(obj["certificates"].items())
            ),
            omega_sigma=obj.get("omega_sigma"),
        )


def _chain_record(kind: str, n: int, k: int, extra=()) -> SearchRecord:
    """Certify a sigma(sigma(n)) = k n hit with exact scalar arithmetic."""
    f_n = factorize(n)
    f_s1 = factorize(sigma(f_n))
    f_s2 = factorize(sigma(f_s1))
    if f_s2.value != k * n:
        raise ArithmeticError_(f"candidate {n} failed exact re-certification")
    return SearchRecord(
        kind=kind,
        n=n,
        m=f_s1.value,
        params=(("k", k),) + tuple(extra),
        certificates=(("n", f_n), ("sigma_n", f_s1), ("sigma_sigma_n", f_s2)),
        omega_sigma=len(f_s1.factors),
    )


# ---------------------------------------------------------------------------
# per-chunk scans


def _parity_mask(values: np.ndarray, parity: str) -> np.ndarray:
    if parity == "even":
        return values % 2 == 0
    if parity == "odd":
        return values % 2 == 1
    return np.ones(values.shape, dtype=bool)


def _scan_superperfect(task: SearchTask, lo: int, hi: int) -> list[SearchRecord]:
    p = task.param_dict()
    parity = p.get("parity", "all")
    if p.get("square_only"):
        # lo..hi ranges over bases m; N = m^2
        ms = np.arange(lo, hi + 1, dtype=np.int64)
        ms = ms[_parity_mask(ms, parity)]
        if ms.size == 0:
            return []
        ns, s1 = [], []
        for m in ms.tolist():
            f_m = factorize(int(m))
            f_n = Factorization.from_pairs((q, 2 * e) for q, e in f_m.factors)
            ns.append(f_n.value)
            s1.append(sigma(f_n))
        ns = np.array(ns, dtype=np.int64)
        s1 = np.array(s1, dtype=np.int64)
    else:
        s1_all = sigma_range(lo, hi)
        nvals = np.arange(lo, hi + 1, dtype=np.int64)
        keep = _parity_mask(nvals, parity)
        ns, s1 = nvals[keep], s1_all[keep]
    # sigma(sigma(N)) = 2N forces sigma(N) < 2N
    deficient = s1 < 2 * ns
    ns, s1 = ns[deficient], s1[deficient]
    if ns.size == 0:
        return []
    s2 = sigma_batch(s1)
    hits = ns[s2 == 2 * ns]
    return [_chain_record("superperfect", int(n), 2) for n in hits.tolist()]


def _scan_smp(task: SearchTask, lo: int, hi: int) -> list[SearchRecord]:
    p = task.param_dict()
    parity = p.get("parity", "all")
    k_filter = p.get("k")
    s1_all = sigma_range(lo, hi)
    nvals = np.arange(lo, hi + 1, dtype=np.int64)
    keep = _parity_mask(nvals, parity)
    ns, s1 = nvals[keep], s1_all[keep]
    if ns.size == 0:
        return []
    s2 = sigma_batch(s1)
    sel = s2 % ns == 0
    out = []
    for n, kk in zip(ns[sel].tolist(), (s2[sel] // ns[sel]).tolist()):
        if k_filter is None or kk == k_filter:
            out.append(_chain_record("super_multiply_perfect", int(n), int(kk)))
    return out


def _prime_power_split(v: int) -> tuple[int, int] | None:
    """(p, j) with v == p**j, j >= 1 and p prime, else None."""
    if v < 2:
        return None
    if is_prime(v):
        return v, 1
    from .arith import _as_perfect_power

    power = _as_perfect_power(v)
    if power is not None and is_prime(power[0]):
        return power
    return None


def _scan_sigma_prime_power(task: SearchTask, lo: int, hi: int) -> list[SearchRecord]:
    s1_all = sigma_range(lo, hi)
    out = []
    for n, v in zip(range(lo, hi + 1), s1_all.tolist()):
        split = _prime_power_split(int(v))
        if split is None:
            continue
        q, j = split
        s2 = repunit(q, j + 1)
        if s2 % n == 0:
            out.append(_chain_record("sigma_prime_power", n, s2 // n))
    return out


def _pomerance_family(n: int) -> str:
    if n >= 2 and (n & (n - 1)) == 0 and is_prime(2 * n - 1):
        return "power_of_two"
    if is_prime(n) and ((n + 1) & n) == 0:
        return "mersenne"
    return "exceptional"


def _scan_pomerance(task: SearchTask, lo: int, hi: int) -> list[SearchRecord]:
    pe_max = task.param_dict().get("pe_max", 10**6)
    s1_all = sigma_range(lo, hi)
    out = []
    for n, v in zip(range(lo, hi + 1), s1_all.tolist()):
        f_s1 = factorize(int(v))
        for q, e_max in f_s1.factors:
            pe = q
            for e in range(1, e_max + 1):
                if pe > pe_max:
                    break
                spe = repunit(q, e + 1)
                if spe % n == 0:
                    f_n = factorize(n)
                    out.append(
                        SearchRecord(
                            kind="pomerance_divisor",
                            n=n,
                            m=pe,
                            params=(("family", _pomerance_family(n)),),
                            certificates=(
                                ("n", f_n),
                                ("sigma_n", f_s1),
                                ("pe", Factorization.from_pairs([(q, e)])),
                                ("sigma_pe", factorize(spe)),
                            ),
                            omega_sigma=len(f_s1.factors),
                        )
                    )
                pe *= q
    return out


def _scan_pairs(task: SearchTask, lo: int, hi: int) -> list[SearchRecord]:
    p = task.param_dict()
    a, b = p.get("a", 1), p.get("b", 1)
    parity = p.get("parity", "all")
    s1_all = sigma_range(lo, hi)
    nvals = np.arange(lo, hi + 1, dtype=np.int64)
    keep = _parity_mask(nvals, parity) & (s1_all % a == 0)
    ns, s1 = nvals[keep], s1_all[keep]
    if ns.size == 0:
        return []
    mvals = s1 // a
    sm = sigma_batch(mvals)
    sel = sm == b * ns
    out = []
    for n, m in zip(ns[sel].tolist(), mvals[sel].tolist()):
        f_n = factorize(int(n))
        f_s1 = factorize(sigma(f_n))
        f_m = factorize(int(m))
        f_sm = factorize(sigma(f_m))
        assert f_s1.value == a * m and f_sm.value == b * n
        out.append(
            SearchRecord(
                kind="pair_system",
                n=int(n),
                m=int(m),
                params=(("a", a), ("b", b)),
                certificates=(("n", f_n), ("sigma_n", f_s1), ("m", f_m), ("sigma_m", f_sm)),
                omega_sigma=len(f_s1.factors),
            )
        )
    return out


_SCANNERS = {
    "superperfect": _scan_superperfect,
    "super_multiply_perfect": _scan_smp,
    "sigma_prime_power": _scan_sigma_prime_power,
    "pomerance_divisor": _scan_pomerance,
    "pair_system": _scan_pairs,
}


def scan_chunk(task: SearchTask, idx: int) -> list[SearchRecord]:
    """Pure chunk scan; records sorted by (n, m)."""
    lo, hi = task.chunk_bounds(idx)
    recs = _SCANNERS[task.kind](task, lo, hi)
    recs.sort(key=lambda r: (r.n, r.m if r.m is not None else 0))
    return recs


def _scan_chunk_star(args) -> list[SearchRecord]:
    return scan_chunk(*args)


def iter_search(
    task: SearchTask,
    workers: int = 1,
    start_chunk: int = 0,
    max_chunks: int | None = None,
):
    """Yield (chunk_index, records) in order; parallel over chunks when asked."""
    total = task.num_chunks()
    end = total if max_chunks is None else min(total, start_chunk + max_chunks)
    idxs = list(range(start_chunk, end))
    if workers <= 1:
        for i in idxs:
            yield i, scan_chunk(task, i)
        return
    ctx = mp.get_context("fork")
    with ctx.Pool(processes=workers) as pool:
        args = [(task, i) for i in idxs]
        for i, recs in zip(idxs, pool.imap(_scan_chunk_star, args, chunksize=1)):
            yield i, recs


def run_search(task: SearchTask, workers: int = 1) -> list[SearchRecord]:
    out: list[SearchRecord] = []
    for _, recs in iter_search(task, workers=workers):
        out.extend(recs)
    return out


# ---------------------------------------------------------------------------
# task constructors and public searches


def superperfect_task(
    lo: int = 1,
    hi: int = 10**6,
    parity: str = "all",
    square_only: bool = False,
    chunk_size: int = DEFAULT_CHUNK,
) -> SearchTask:
    return SearchTask(
        kind="superperfect",
        lo=lo,
        hi=hi,
        params=(("parity", parity), ("square_only", bool(square_only))),
        chunk_size=chunk_size,
    )


def smp_task(lo=1, hi=10**5, k=None, parity="all", chunk_size=DEFAULT_CHUNK) -> SearchTask:
    return SearchTask(
        kind="super_multiply_perfect",
        lo=lo,
        hi=hi,
        params=(("k", k), ("parity", parity)),
        chunk_size=chunk_size,
    )


def sigma_prime_power_task(lo=1, hi=10**5, chunk_size=DEFAULT_CHUNK) -> SearchTask:
    return SearchTask(kind="sigma_prime_power", lo=lo, hi=hi, chunk_size=chunk_size)


def pomerance_task(lo=1, hi=2000, pe_max=10**6, chunk_size=DEFAULT_CHUNK) -> SearchTask:
    return SearchTask(
        kind="pomerance_divisor",
        lo=lo,
        hi=hi,
        params=(("pe_max", pe_max),),
        chunk_size=chunk_size,
    )


def pairs_task(a: int, b: int, lo=1, hi=10**5, parity="all", chunk_size=DEFAULT_CHUNK) -> SearchTask:
    return SearchTask(
        kind="pair_system",
        lo=lo,
        hi=hi,
        params=(("a", a), ("b", b), ("parity", parity)),
        chunk_size=chunk_size,
    )


def search_superperfect(task: SearchTask, workers: int = 1) -> list[SearchRecord]:
    if task.kind != "superperfect":
        raise ArithmeticError_("task kind mismatch")
    return run_search(task, workers)


def search_smp(task: SearchTask, workers: int = 1) -> list[SearchRecord]:
    if task.kind != "super_multiply_perfect":
        raise ArithmeticError_("task kind mismatch")
    return run_search(task, workers)


def search_sigma_prime_power(task: SearchTask, workers: int = 1) -> list[SearchRecord]:
    if task.kind != "sigma_prime_power":
        raise ArithmeticError_("task kind mismatch")
    return run_search(task, workers)


def search_pomerance_divisor(task: SearchTask, workers: int = 1) -> list[SearchRecord]:
    if task.kind != "pomerance_divisor":
        raise ArithmeticError_("task kind mismatch")
    return run_search(task, workers)


def search_pairs(task: SearchTask, workers: int = 1) -> list[SearchRecord]:
    if task.kind != "pair_system":
        raise ArithmeticError_("task kind mismatch")
    return run_search(task, workers)


# ---------------------------------------------------------------------------
# structure verification


@dataclass(frozen=True)
class StructureReport:
    """Structural audit of superperfect hits: odd ones must be squares with
    at least two distinct primes; even ones must be 2^m with 2^(m+1)-1 prime."""

    checked: int
    findings: tuple[str, ...]
    vacuous_odd: bool

    @property
    def holds(self) -> bool:
        return not self.findings

    def to_json(self) -> dict:
        return {
            "checked": self.checked,
            "holds": self.holds,
            "vacuous_odd": self.vacuous_odd,
            "findings": list(self.findings),
        }


def verify_structure(records) -> StructureReport:
    findings = []
    saw_odd = False
    checked = 0
    for rec in records:
        if rec.kind != "superperfect":
            continue
        checked += 1
        n = rec.n
        if n % 2 == 1:
            saw_odd = True
            root = isqrt(n)
            if root * root != n:
                findings.append(f"odd hit {n} is not a perfect square")
            elif len(factorize(n).factors) < 2:
                findings.append(f"odd hit {n} has fewer than two distinct primes")
        else:
            if (n & (n - 1)) != 0:
                findings.append(f"even hit {n} is not a power of two")
            elif not is_prime(2 * n - 1):
                findings.append(f"even hit {n}: {2 * n - 1} is not prime")
    return StructureReport(
        checked=checked, findings=tuple(findings), vacuous_odd=not saw_odd
    )
