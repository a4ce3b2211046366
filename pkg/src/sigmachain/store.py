"""Append-only JSONL result store with chunk checkpoints and resume.

Record lines are canonical JSON (sorted keys, compact separators) and
carry no wall-clock data, so identical tasks produce byte-identical
record streams regardless of worker count or interruption; run metadata
(config echo, timestamps) lives in the checkpoint file.  Recovery after
a kill discards any trailing records beyond the last checkpointed chunk
before appending, which makes resume idempotent.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .arith import ArithmeticError_, Factorization, repunit
from .search import SearchRecord, SearchTask, iter_search

SCHEMA_VERSION = 1


class StoreError(RuntimeError):
    """Persistence-layer failure: corrupt line, schema or task mismatch."""


@dataclass(frozen=True)
class ResultEnvelope:
    """One persisted line: schema version, run id, kind, optional chunk, payload."""

    kind: str
    payload: dict
    run: str
    chunk: int | None = None
    ts: str | None = None
    v: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        out = {"v": self.v, "run": self.run, "kind": self.kind, "payload": self.payload}
        if self.chunk is not None:
            out["chunk"] = self.chunk
        if self.ts is not None:
            out["ts"] = self.ts
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ResultEnvelope":
        if not isinstance(obj, dict) or "v" not in obj:
            raise StoreError("line is not an envelope")
        if obj["v"] != SCHEMA_VERSION:
            raise StoreError(f"unsupported schema version {obj['v']!r}")
        for key in ("run", "kind", "payload"):
            if key not in obj:
                raise StoreError(f"envelope missing {key!r}")
        return cls(
            kind=obj["kind"],
            payload=obj["payload"],
            run=obj["run"],
            chunk=obj.get("chunk"),
            ts=obj.get("ts"),
        )


def dumps_envelope(env: ResultEnvelope) -> str:
    return json.dumps(env.to_json(), sort_keys=True, separators=(",", ":"))


def _validate_sieve_prime(payload: dict) -> None:
    p = int(payload["p"])
    e = int(payload["e"])
    cert = payload["certificate"]
    basis = {int(i): int(q) for i, q in cert["basis"]}
    prod = 1
    for i, a in payload["exponents"]:
        if a < 1:
            raise StoreError("sieve prime exponent below 1")
        prod *= basis[int(i)] ** int(a)
    if prod != repunit(p, e) or prod != int(cert["repunit"]):
        raise StoreError(f"sieve certificate mismatch for p={p}")


def _validate_search_record(payload: dict) -> None:
    SearchRecord.from_json(payload).validate()


def _validate_bound_report(payload: dict) -> None:
    value = payload["value"]
    if "num" in value:
        int(value["num"]), int(value["den"])
    elif "dec" in value:
        float(value["dec"])
    else:
        raise StoreError("bound report value must be rational or decimal")


def _validate_factorization(payload: dict) -> None:
    Factorization.from_json(payload)  # constructor enforces every invariant


_VALIDATORS = {
    "search_record": _validate_search_record,
    "sieve_prime": _validate_sieve_prime,
    "bound_report": _validate_bound_report,
    "factorization": _validate_factorization,
}


def validate_payload(kind: str, payload: dict) -> None:
    """Re-check type invariants for payloads that carry them."""
    fn = _VALIDATORS.get(kind)
    if fn is not None:
        fn(payload)
    elif not isinstance(payload, dict):
        raise StoreError("payload must be an object")


@dataclass
class LoadResult:
    envelopes: list[ResultEnvelope] = field(default_factory=list)
    errors: list[tuple[int, str]] = field(default_factory=list)


def persist(path: str, envelopes, mode: str = "a") -> int:
    """Append envelopes as JSONL; returns the number of lines written."""
    n = 0
    with open(path, mode, encoding="utf-8") as fh:
        for env in envelopes:
            fh.write(dumps_envelope(env) + "\n")
            n += 1
        fh.flush()
        os.fsync(fh.fileno())
    return n


def load(path: str, strict: bool = True) -> LoadResult:
    """Read and re-validate a JSONL stream.

    strict: raise on the first corrupt or invalid line.  lenient: collect
    (line number, message) pairs and keep going.
    """
    result = LoadResult()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                env = ResultEnvelope.from_json(json.loads(line))
                validate_payload(env.kind, env.payload)
            except (json.JSONDecodeError, StoreError, ArithmeticError_, KeyError, ValueError) as exc:
                if strict:
                    raise StoreError(f"line {lineno}: {exc}") from exc
                result.errors.append((lineno, str(exc)))
                continue
            result.envelopes.append(env)
    return result


# ---------------------------------------------------------------------------
# checkpoints


def write_checkpoint(path: str, task_hash: str, next_chunk: int, total_chunks: int, config: dict) -> None:
    """Atomic checkpoint replace; records progress and the config echo."""
    payload = {
        "v": SCHEMA_VERSION,
        "task": task_hash,
        "next_chunk": next_chunk,
        "total_chunks": total_chunks,
        "config": config,
        "ts": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".ckpt-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def read_checkpoint(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("v") != SCHEMA_VERSION:
        raise StoreError(f"unsupported checkpoint version in {path}")
    return obj


def _truncate_to_chunk(out_path: str, run_id: str, next_chunk: int) -> int:
    """Drop trailing records at or past next_chunk (including torn lines)."""
    if not os.path.exists(out_path):
        return 0
    kept: list[str] = []
    with open(out_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                env = ResultEnvelope.from_json(json.loads(line))
            except (json.JSONDecodeError, StoreError):
                continue  # torn tail from a kill mid-write
            if env.run != run_id:
                raise StoreError(
                    f"output file {out_path} belongs to run {env.run}, not {run_id}"
                )
            if env.chunk is not None and env.chunk >= next_chunk:
                continue
            kept.append(line)
    with open(out_path, "w", encoding="utf-8") as fh:
        for line in kept:
            fh.write(line + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    return len(kept)


def run_search_with_store(
    task: SearchTask,
    out_path: str,
    checkpoint_path: str | None = None,
    workers: int = 1,
    resume: bool = False,
    max_chunks: int | None = None,
    config_echo: dict | None = None,
) -> dict:
    """Single-writer search driver: append per-chunk records, checkpoint after each.

    Records are appended and fsynced before the checkpoint advances, so a
    crash can only leave extra records past the checkpoint, which resume
    discards before continuing.  Identical tasks yield byte-identical
    record streams.
    """
    if os.path.abspath(out_path) == os.path.abspath(checkpoint_path or ""):
        raise StoreError("output and checkpoint paths must differ")
    run_id = task.task_hash()
    total = task.num_chunks()
    config = dict(config_echo or {})
    config["task"] = task.to_json()
    start_chunk = 0
    if resume:
        if checkpoint_path is None or not os.path.exists(checkpoint_path):
            raise StoreError("resume requested but no checkpoint exists")
        ck = read_checkpoint(checkpoint_path)
        if ck["task"] != run_id:
            raise StoreError(
                f"checkpoint task {ck['task']} does not match requested task {run_id}; "
                "refusing to mix outputs"
            )
        start_chunk = ck["next_chunk"]
        _truncate_to_chunk(out_path, run_id, start_chunk)
    else:
        open(out_path, "w").close()
        if checkpoint_path:
            write_checkpoint(checkpoint_path, run_id, 0, total, config)
    written = 0
    done = start_chunk
    with open(out_path, "a", encoding="utf-8") as fh:
        for idx, records in iter_search(
            task, workers=workers, start_chunk=start_chunk, max_chunks=max_chunks
        ):
            for rec in records:
                env = ResultEnvelope(
                    kind="search_record", payload=rec.to_json(), run=run_id, chunk=idx
                )
                fh.write(dumps_envelope(env) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
            done = idx + 1
            if checkpoint_path:
                write_checkpoint(checkpoint_path, run_id, done, total, config)
            written += len(records)
    return {
        "run": run_id,
        "records_written": written,
        "chunks_done": done,
        "total_chunks": total,
        "completed": done >= total,
    }


# ---------------------------------------------------------------------------
# CSV flattening


def _search_csv_row(payload: dict) -> dict:
    certs = payload["certificates"]
    params = payload["params"]
    compact = {
        name: Factorization.from_json(f).format_compact() for name, f in sorted(certs.items())
    }
    return {
        "kind": payload["kind"],
        "n": payload["n"],
        "m": payload["m"] or "",
        "k": params.get("k", ""),
        "a": params.get("a", ""),
        "b": params.get("b", ""),
        "family": params.get("family", ""),
        "omega_sigma": payload.get("omega_sigma", ""),
        "certificates": ";".join(f"{k}={v}" for k, v in compact.items()),
    }


def _sieve_csv_row(payload: dict) -> dict:
    return {
        "p": payload["p"],
        "e": payload["e"],
        "exponents": ";".join(f"{i}:{a}" for i, a in payload["exponents"]),
        "repunit": payload["certificate"]["repunit"],
    }


def _bound_csv_row(payload: dict) -> dict:
    value = payload["value"]
    return {
        "kind": payload["kind"],
        "value": value.get("dec", ""),
        "value_num": value.get("num", ""),
        "value_den": value.get("den", ""),
        "precision_bits": payload["precision_bits"],
        "inputs": json.dumps(payload["inputs"], sort_keys=True),
    }


_CSV_FLATTENERS = {
    "search_record": _search_csv_row,
    "sieve_prime": _sieve_csv_row,
    "bound_report": _bound_csv_row,
}


def csv_dump(envelopes, fh) -> int:
    """Write a homogeneous envelope stream as CSV; returns rows written."""
    rows = []
    for env in envelopes:
        flattener = _CSV_FLATTENERS.get(env.kind)
        if flattener is None:
            rows.append({"kind": env.kind, "payload": json.dumps(env.payload, sort_keys=True)})
        else:
            rows.append(flattener(env.payload))
    if not rows:
        return 0
    header = list(rows[0].keys())
    if any(list(r.keys()) != header for r in rows):
        raise StoreError("cannot mix payload kinds in one CSV export")
    writer = csv.DictWriter(fh, fieldnames=header)
    writer.writeheader()
    writer.writerows(rows)
    return len(rows)


def csv_dumps(envelopes) -> str:
    buf = io.StringIO()
    csv_dump(envelopes, buf)
    return buf.getvalue()
