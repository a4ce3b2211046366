"""Command-line front end.

Exit codes: 0 success, 1 verification finding, 2 usage error.  Outputs are
JSONL envelopes (CSV with --format csv), written to stdout or --out.
Search subcommands support chunk checkpointing and resume.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import bounds, report, search, sieve, store
from .arith import ArithmeticError_, factorize

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class RunConfig:
    """Echoed into checkpoints; validates the knobs shared by subcommands."""

    command: str
    params: dict
    output_path: str | None
    checkpoint_path: str | None
    workers: int
    precision_bits: int

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ArithmeticError_("workers must be >= 1")
        if self.precision_bits < bounds.MIN_PRECISION_BITS:
            raise ArithmeticError_(f"precision_bits must be >= {bounds.MIN_PRECISION_BITS}")
        if (
            self.output_path
            and self.checkpoint_path
            and os.path.abspath(self.output_path) == os.path.abspath(self.checkpoint_path)
        ):
            raise ArithmeticError_("output and checkpoint paths must differ")

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "output_path": self.output_path,
            "checkpoint_path": self.checkpoint_path,
            "workers": self.workers,
            "precision_bits": self.precision_bits,
        }


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _run_id(command: str, params: dict) -> str:
    blob = json.dumps({"command": command, "params": params}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _emit(envelopes, args) -> None:
    envelopes = list(envelopes)
    if getattr(args, "format", "jsonl") == "csv":
        text = store.csv_dumps(envelopes)
    else:
        text = "".join(store.dumps_envelope(e) + "\n" for e in envelopes)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _maybe_ts(args) -> str | None:
    if getattr(args, "timestamps", False):
        from datetime import datetime, timezone

        return datetime.now(timezone.utc).isoformat(timespec="seconds")
    return None


# ---------------------------------------------------------------------------
# search subcommands


def _search_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--min", type=int, default=1, help="lower end of the N range")
    sub.add_argument("--max", type=int, required=True, help="upper end of the N range")
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--chunk-size", type=int, default=search.DEFAULT_CHUNK)
    sub.add_argument("--out", help="output JSONL path (default stdout)")
    sub.add_argument("--checkpoint", help="checkpoint path (enables resume)")
    sub.add_argument("--resume", action="store_true", help="continue from the checkpoint")
    sub.add_argument("--max-chunks", type=int, help="stop after this many chunks (partial run)")
    sub.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    sub.add_argument("--timestamps", action="store_true", help="stamp envelopes (non-reproducible)")


def _drive_search(task: search.SearchTask, args, command: str) -> tuple[list, int]:
    cfg = RunConfig(
        command=command,
        params=task.to_json(),
        output_path=getattr(args, "out", None),
        checkpoint_path=getattr(args, "checkpoint", None),
        workers=args.workers,
        precision_bits=bounds.default_precision(),
    )
    if args.checkpoint:
        if not args.out:
            raise ArithmeticError_("--checkpoint requires --out")
        summary = store.run_search_with_store(
            task,
            out_path=args.out,
            checkpoint_path=args.checkpoint,
            workers=args.workers,
            resume=args.resume,
            max_chunks=args.max_chunks,
            config_echo=cfg.to_json(),
        )
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        loaded = store.load(args.out).envelopes
        return [search.SearchRecord.from_json(e.payload) for e in loaded], EXIT_OK
    run_id = task.task_hash()
    records = []
    for idx, recs in search.iter_search(task, workers=args.workers, max_chunks=args.max_chunks):
        records.extend(recs)
    ts = _maybe_ts(args)
    _emit(
        (
            store.ResultEnvelope(kind="search_record", payload=r.to_json(), run=run_id, ts=ts)
            for r in records
        ),
        args,
    )
    return records, EXIT_OK


def cmd_search_superperfect(args) -> int:
    task = search.superperfect_task(
        lo=args.min,
        hi=args.max,
        parity=args.parity,
        square_only=args.square_only,
        chunk_size=args.chunk_size,
    )
    records, status = _drive_search(task, args, "search-superperfect")
    if args.verify_structure:
        rep = search.verify_structure(records)
        print(json.dumps(rep.to_json(), sort_keys=True), file=sys.stderr)
        if not rep.holds:
            return EXIT_FINDING
    return status


def cmd_search_smp(args) -> int:
    task = search.smp_task(
        lo=args.min, hi=args.max, k=args.k, parity=args.parity, chunk_size=args.chunk_size
    )
    _, status = _drive_search(task, args, "search-smp")
    return status


def cmd_search_prime_power(args) -> int:
    task = search.sigma_prime_power_task(lo=args.min, hi=args.max, chunk_size=args.chunk_size)
    _, status = _drive_search(task, args, "search-prime-power")
    return status


def cmd_search_pomerance(args) -> int:
    task = search.pomerance_task(
        lo=args.n_min, hi=args.n_max, pe_max=args.pe_max, chunk_size=args.chunk_size
    )
    args.min, args.max = args.n_min, args.n_max
    _, status = _drive_search(task, args, "search-pomerance")
    return status


def cmd_search_pairs(args) -> int:
    task = search.pairs_task(
        a=args.a, b=args.b, lo=args.min, hi=args.max, parity=args.parity, chunk_size=args.chunk_size
    )
    _, status = _drive_search(task, args, "search-pairs")
    return status


# ---------------------------------------------------------------------------
# sieve / zsigmondy / classify


def cmd_sieve(args) -> int:
    q = tuple(args.q)
    ts = _maybe_ts(args)
    if args.union:
        run = _run_id("sieve-union", {"q": args.q, "max": args.max, "e_max": args.e_max})
        table = sieve.enumerate_s_union(q, args.max, args.e_max)
        envs = []
        for (subset, e), hits in table.items():
            for h in hits:
                payload = h.to_json(q)
                payload["subset"] = list(subset)
                envs.append(store.ResultEnvelope(kind="sieve_prime", payload=payload, run=run, ts=ts))
        _emit(envs, args)
        return EXIT_OK
    subset = tuple(args.subset) if args.subset else tuple(range(1, len(q) + 1))
    spec = sieve.SieveSpec(q_primes=q, subset=subset, e=args.e, limit=args.max)
    hits = sieve.enumerate_sie(spec, chunk_size=args.chunk_size)
    if args.cross_check:
        other = sieve.enumerate_sie_products(spec)
        if [h.p for h in hits] != [h.p for h in other]:
            print("cross-check mismatch between scan and product enumeration", file=sys.stderr)
            return EXIT_FINDING
    run = _run_id("sieve", {"q": args.q, "subset": list(subset), "e": args.e, "max": args.max})
    _emit(
        (
            store.ResultEnvelope(kind="sieve_prime", payload=h.to_json(q), run=run, ts=ts)
            for h in hits
        ),
        args,
    )
    return EXIT_OK


def cmd_zsigmondy(args) -> int:
    q = sieve.zsigmondy_primitive(args.a, args.n)
    run = _run_id("zsigmondy", {"a": args.a, "n": args.n})
    payload = {"a": args.a, "n": args.n, "primitive": None if q is None else str(q)}
    _emit([store.ResultEnvelope(kind="zsigmondy", payload=payload, run=run, ts=_maybe_ts(args))], args)
    return EXIT_OK


def cmd_classify(args) -> int:
    nf = factorize(args.n)
    classified = sieve.classify_factors(nf, tuple(args.q), args.s)
    run = _run_id("classify", {"n": args.n, "q": args.q, "s": args.s})
    ts = _maybe_ts(args)
    _emit(
        (
            store.ResultEnvelope(kind="classified_factor", payload=c.to_json(), run=run, ts=ts)
            for c in classified
        ),
        args,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify suites


def cmd_verify(args) -> int:
    ts = _maybe_ts(args)
    if args.suite == "repunit-factors":
        reports = [
            sieve.check_repunit_factor_count(a, e)
            for a in range(2, args.a_max + 1)
            for e in range(3, args.e_max + 1)
        ]
        run = _run_id("verify-repunit-factors", {"a_max": args.a_max, "e_max": args.e_max})
        bad = [r for r in reports if not r.holds]
        _emit(
            (
                store.ResultEnvelope(kind="repunit_factor_report", payload=r.to_json(), run=run, ts=ts)
                for r in (reports if args.all_reports else bad)
            ),
            args,
        )
        print(f"repunit-factors: {len(reports)} checked, {len(bad)} violations", file=sys.stderr)
        return EXIT_FINDING if bad else EXIT_OK
    if args.suite == "residue":
        reports = sieve.sweep_residue_counts(args.p_max, args.f_max, args.e_max)
        run = _run_id(
            "verify-residue",
            {"p_max": args.p_max, "f_max": args.f_max, "e_max": args.e_max},
        )
        bad = [r for r in reports if not r.holds]
        _emit(
            (
                store.ResultEnvelope(kind="residue_report", payload=r.to_json(), run=run, ts=ts)
                for r in (reports if args.all_reports else bad)
            ),
            args,
        )
        print(f"residue: {len(reports)} applicable, {len(bad)} violations", file=sys.stderr)
        return EXIT_FINDING if bad else EXIT_OK
    if args.suite == "gap":
        if args.primes:
            parts = {0: list(args.primes)}
        else:
            spec = sieve.SieveSpec(
                q_primes=tuple(args.q),
                subset=tuple(range(1, len(args.q) + 1)),
                e=args.e,
                limit=args.max,
            )
            hits = sieve.enumerate_sie(spec)
            parts = sieve.partition_by_dominant_divisor(spec, hits)
        reports = [sieve.check_prime_gaps(ps, s=args.s) for ps in parts.values()]
        run = _run_id("verify-gap", {"s": args.s})
        bad = [r for r in reports if not r.holds]
        _emit(
            (
                store.ResultEnvelope(kind="gap_report", payload=r.to_json(), run=run, ts=ts)
                for r in reports
            ),
            args,
        )
        print(f"gap: {len(reports)} lists checked, {len(bad)} violations", file=sys.stderr)
        return EXIT_FINDING if bad else EXIT_OK
    if args.suite == "delta-oracle":
        rep = bounds.delta_oracle(len(args.primes), tuple(args.primes), args.cap, args.m)
        run = _run_id(
            "verify-delta-oracle",
            {"primes": args.primes, "cap": args.cap, "m": args.m},
        )
        _emit([store.ResultEnvelope(kind="delta_oracle_report", payload=rep.to_json(), run=run, ts=ts)], args)
        print(
            f"delta-oracle: {len(rep.instances)} instances, holds={rep.holds}",
            file=sys.stderr,
        )
        return EXIT_OK if rep.holds else EXIT_FINDING
    raise ArithmeticError_(f"unknown verify suite {args.suite!r}")


# ---------------------------------------------------------------------------
# bounds


def _bound_envelope(kind: str, inputs: dict, value, precision_bits: int) -> store.ResultEnvelope:
    rep = bounds.BoundReport(kind=kind, inputs=inputs, value=value, precision_bits=precision_bits)
    return store.ResultEnvelope(
        kind="bound_report", payload=rep.to_json(), run=_run_id("bounds-" + kind, inputs)
    )


def cmd_bounds(args) -> int:
    bits = args.precision or bounds.default_precision()
    which = args.which
    if which == "matveev":
        if args.a is None:
            value = bounds.matveev_c1(args.n, bits)
            env = _bound_envelope(
                "matveev_c1", {"n": args.n}, mpmath.nstr(value, 30), bits
            )
            _emit([env], args)
            return EXIT_OK
        inst = bounds.build_linear_form(args.a, args.b)
        rep = bounds.matveev_lower_bound(inst, bits)
        env = store.ResultEnvelope(
            kind="matveev_report",
            payload=rep.to_json(),
            run=_run_id("bounds-matveev", {"a": args.a, "b": args.b}),
        )
        _emit([env], args)
        return EXIT_OK if rep.holds else EXIT_FINDING
    if which == "siegel":
        value = bounds.siegel_bound(args.s, args.big_a)
        env = _bound_envelope("siegel", {"s": args.s, "A": args.big_a}, Fraction(value), bits)
        _emit([env], args)
        return EXIT_OK
    if which == "c23":
        value = bounds.delta_recurrence_constant(args.s)
        env = _bound_envelope("c23", {"s": args.s}, Fraction(value), bits)
        _emit([env], args)
        print(value)
        return EXIT_OK
    if which == "delta":
        q = bounds.DeltaQuery(s=len(args.primes), n=args.n, d=args.d, primes=tuple(args.primes))
        value = bounds.delta_lower_bound(q)
        env = _bound_envelope("delta_lower", q.to_json(), value, bits)
        _emit([env], args)
        return EXIT_OK
    if which == "c24":
        value = bounds.uniform_gap_bound(args.s, args.n, args.budget)
        env = _bound_envelope("c24", {"s": args.s, "n": args.n}, value, bits)
        _emit([env], args)
        print(f"{value.numerator}/{value.denominator}")
        return EXIT_OK
    if which == "threshold":
        value = bounds.threshold_small_prime(args.c, args.k, args.q_max)
        env = _bound_envelope(
            "threshold", {"C": args.c, "k": args.k, "q_max": args.q_max}, mpmath.nstr(value, 30), bits
        )
        _emit([env], args)
        return EXIT_OK
    if which == "relation":
        vec = bounds.find_multiplicative_relation(args.values)
        payload = {
            "values": [str(v) for v in args.values],
            "relation": None if vec is None else [str(x) for x in vec],
        }
        env = store.ResultEnvelope(
            kind="relation_report", payload=payload, run=_run_id("bounds-relation", payload)
        )
        _emit([env], args)
        return EXIT_OK
    raise ArithmeticError_(f"unknown bounds target {which!r}")


def cmd_report(args) -> int:
    written = report.render_report(args.infile, args.out_dir)
    for path in written:
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sigmachain",
        description="divisor-sum searches, cyclotomic smoothness sieves, and effective bounds",
    )
    sp = ap.add_subparsers(dest="command", required=True)

    s = sp.add_parser("search-superperfect", help="N with sigma(sigma(N)) = 2N")
    _search_common(s)
    s.add_argument("--parity", choices=["even", "odd", "all"], default="all")
    s.add_argument("--square-only", action="store_true", help="scan N = m^2 only")
    s.add_argument("--verify-structure", action="store_true")
    s.set_defaults(func=cmd_search_superperfect)

    s = sp.add_parser("search-smp", help="N with sigma(sigma(N)) = kN for some k")
    _search_common(s)
    s.add_argument("--k", type=int, help="fix k (default: any)")
    s.add_argument("--parity", choices=["even", "odd", "all"], default="all")
    s.set_defaults(func=cmd_search_smp)

    s = sp.add_parser("search-prime-power", help="N | sigma(sigma(N)) with sigma(N) a prime power")
    _search_common(s)
    s.set_defaults(func=cmd_search_prime_power)

    s = sp.add_parser("search-pomerance", help="(N, p^e) with p^e | sigma(N) and N | sigma(p^e)")
    s.add_argument("--n-min", type=int, default=1)
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--pe-max", type=int, default=10**6)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--chunk-size", type=int, default=search.DEFAULT_CHUNK)
    s.add_argument("--out")
    s.add_argument("--checkpoint")
    s.add_argument("--resume", action="store_true")
    s.add_argument("--max-chunks", type=int)
    s.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    s.add_argument("--timestamps", action="store_true")
    s.set_defaults(func=cmd_search_pomerance)

    s = sp.add_parser("search-pairs", help="sigma(N) = aM and sigma(M) = bN")
    _search_common(s)
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--parity", choices=["even", "odd", "all"], default="all")
    s.set_defaults(func=cmd_search_pairs)

    s = sp.add_parser("sieve", help="primes whose repunit factors over a fixed basis")
    s.add_argument("--q", type=_ints, required=True, help="basis primes, e.g. 2,3")
    s.add_argument("--subset", type=_ints, help="1-based active indices (default: all)")
    s.add_argument("--e", type=int, default=2, help="repunit length")
    s.add_argument("--max", type=int, required=True, help="scan bound")
    s.add_argument("--union", action="store_true", help="all subsets and lengths up to --e-max")
    s.add_argument("--e-max", type=int, default=3)
    s.add_argument("--chunk-size", type=int, default=1 << 16)
    s.add_argument("--cross-check", action="store_true", help="verify against product enumeration")
    s.add_argument("--out")
    s.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    s.add_argument("--timestamps", action="store_true")
    s.set_defaults(func=cmd_sieve)

    s = sp.add_parser("zsigmondy", help="smallest primitive prime divisor of a^n - 1")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out")
    s.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    s.add_argument("--timestamps", action="store_true")
    s.set_defaults(func=cmd_zsigmondy)

    s = sp.add_parser("verify", help="run a verification suite")
    s.add_argument(
        "suite",
        choices=["repunit-factors", "residue", "gap", "delta-oracle"],
    )
    s.add_argument("--a-max", type=int, default=30)
    s.add_argument("--e-max", type=int, default=30)
    s.add_argument("--p-max", type=int, default=50)
    s.add_argument("--f-max", type=int, default=3)
    s.add_argument("--primes", type=_ints, help="explicit prime list")
    s.add_argument("--q", type=_ints, help="sieve basis for gap assembly")
    s.add_argument("--e", type=int, default=14)
    s.add_argument("--max", type=int, default=10000)
    s.add_argument("--s", type=int, default=1)
    s.add_argument("--cap", type=int, default=6)
    s.add_argument("--m", type=_ints, default=[7, 11, 13, 17])
    s.add_argument("--all-reports", action="store_true", help="emit passing reports too")
    s.add_argument("--out")
    s.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    s.add_argument("--timestamps", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sp.add_parser("bounds", help="evaluate an effective bound")
    s.add_argument(
        "which",
        choices=["matveev", "siegel", "c23", "delta", "c24", "threshold", "relation"],
    )
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--s", type=int, default=1)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--a", type=_ints, help="linear form bases")
    s.add_argument("--b", type=_ints, help="linear form coefficients")
    s.add_argument("--big-a", type=int, default=1, help="entry bound A for the coefficient bound")
    s.add_argument("--primes", type=_ints, default=[3])
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--q-max", type=float, default=10**6)
    s.add_argument("--budget", type=int, default=2_000_000)
    s.add_argument("--values", type=_ints, help="positive integers for the relation finder")
    s.add_argument("--precision", type=int, help="working precision in bits")
    s.add_argument("--out")
    s.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    s.set_defaults(func=cmd_bounds)

    s = sp.add_parser("classify", help="four-way classification of the prime factors of N")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", type=_ints, required=True, help="ordered basis primes")
    s.add_argument("--s", type=int, required=True, help="split index")
    s.add_argument("--out")
    s.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    s.add_argument("--timestamps", action="store_true")
    s.set_defaults(func=cmd_classify)

    s = sp.add_parser("report", help="render figures and CSV summaries from a JSONL result file")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ArithmeticError_, store.StoreError, bounds.EnumerationBudgetExceeded) as exc:
        print(f"sigmachain {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
