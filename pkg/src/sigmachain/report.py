"""Render figures and CSV summaries from a JSONL result stream.

One CSV and one PNG per payload family found in the input; files land in
the output directory and the written paths are returned.
"""

from __future__ import annotations

import json
import math
import os
from collections import defaultdict
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import store


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _search_figure(payloads, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ks = defaultdict(list)
    for p in payloads:
        k = p["params"].get("k")
        ks[int(k) if k is not None else 0].append(int(p["n"]))
    for k in sorted(ks):
        xs = ks[k]
        ax.scatter([math.log2(x) for x in xs], [k] * len(xs), s=18, label=f"k={k}")
    ax.set_xlabel("log2 N")
    ax.set_ylabel("multiplier k")
    ax.set_title("search hits")
    if len(ks) > 1:
        ax.legend(fontsize=8)
    return _save(fig, os.path.join(out_dir, "search_hits.png"))


def _sieve_figure(payloads, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = [math.log10(int(p["p"])) for p in payloads]
    ys = [int(p["e"]) for p in payloads]
    ax.scatter(xs, ys, s=18)
    ax.set_xlabel("log10 p")
    ax.set_ylabel("repunit length e")
    ax.set_title("smoothness-set members")
    return _save(fig, os.path.join(out_dir, "sieve_primes.png"))


def _bounds_figure(payloads, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    labels, values = [], []
    for i, p in enumerate(payloads):
        v = p["value"]
        if "num" in v:
            val = Fraction(int(v["num"]), int(v["den"]))
            mag = math.log10(val.numerator) - math.log10(val.denominator) if val > 0 else 0.0
        else:
            mag = math.log10(abs(float(v["dec"]))) if float(v["dec"]) != 0 else 0.0
        labels.append(f"{p['kind']}#{i}")
        values.append(mag)
    ax.bar(range(len(values)), values)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("log10 value")
    ax.set_title("evaluated bounds")
    return _save(fig, os.path.join(out_dir, "bounds.png"))


def _checks_figure(kind: str, payloads, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(4, 3))
    held = sum(1 for p in payloads if p.get("holds", True))
    ax.bar(["holds", "violations"], [held, len(payloads) - held], color=["#2a9d8f", "#e76f51"])
    ax.set_title(kind.replace("_", " "))
    return _save(fig, os.path.join(out_dir, f"{kind}.png"))


def render_report(in_path: str, out_dir: str) -> list[str]:
    """Write one CSV plus one figure per payload kind; returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    loaded = store.load(in_path, strict=False)
    groups: dict[str, list[store.ResultEnvelope]] = defaultdict(list)
    for env in loaded.envelopes:
        groups[env.kind].append(env)
    written: list[str] = []
    for kind, envs in sorted(groups.items()):
        csv_path = os.path.join(out_dir, f"{kind}.csv")
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            store.csv_dump(envs, fh)
        written.append(csv_path)
        payloads = [e.payload for e in envs]
        if kind == "search_record":
            written.append(_search_figure(payloads, out_dir))
        elif kind == "sieve_prime":
            written.append(_sieve_figure(payloads, out_dir))
        elif kind == "bound_report":
            written.append(_bounds_figure(payloads, out_dir))
        else:
            written.append(_checks_figure(kind, payloads, out_dir))
    if loaded.errors:
        err_path = os.path.join(out_dir, "load_errors.json")
        with open(err_path, "w", encoding="utf-8") as fh:
            json.dump([{"line": n, "error": m} for n, m in loaded.errors], fh, indent=2)
        written.append(err_path)
    return written
