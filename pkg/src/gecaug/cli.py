"""Command-line pipeline driver.

One executable, one subcommand per pipeline stage:

* extract     parallel corpus -> pattern pool
* pool        merge pattern pools
* sample      draw generation inputs from a pool
* synthesize  pool + generator backend -> synthetic corpus + stats
* denoise     relabel synthetic sources with a corrector
* mix         stage plan -> shuffled training corpus (+ ratio sweep)
* stats       pool stats, or reference-vs-corpus distribution report
* score       hypothesis corpus vs gold M2 annotations

Options resolve flag > config file > default. Every artifact-producing
command writes ``<out>.manifest.json`` recording the resolved config, a
config hash, the seed, input file hashes and row counts, and is
idempotent: identical config and seed reproduce identical bytes, whatever
the worker count. Structured log events go to stderr as JSON lines; on
failure the last stderr line is a single machine-parsable error object
and the exit code is non-zero (2 for usage/config, 1 at runtime).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from itertools import islice
from typing import Iterable, Sequence

from ._http import TransportError
from .corpus import (
    CorpusError,
    MalformedLine,
    SchemaError,
    SpanOutOfBounds,
    jsonl_line,
    read_m2,
    read_pairs,
    write_jsonl,
)
from .denoise import (
    HttpCorrector,
    IdentityCorrector,
    OracleCorrector,
    completed_from_checkpoint,
    relabel,
)
from .generation import HttpGenerator, StubGenerator, assemble_input
from .mix import load_plan, mix, ratio_sweep
from .patterns import (
    build_pool,
    load_pool,
    merge_pools,
    pool_stats,
    restrict_sendable,
    sample_patterns,
    save_pool,
)
from .scoring import ScoringError, distribution_from_counts, error_rate, score
from .seeding import slot_rng
from .synthesis import (
    SynthesisBudgetError,
    read_samples,
    synthesize,
    write_samples,
)

VALID_N_CHOICES = (1, 3, 5)


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = 1):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems on the structured error channel."""

    def error(self, message: str):
        raise CliError("USAGE", message, exit_code=2)


def _log(event: str, **fields) -> None:
    print(json.dumps({"event": event, **fields}, sort_keys=True), file=sys.stderr)


def _emit_error(code: str, message: str) -> None:
    print(
        json.dumps({"event": "error", "code": code, "message": message}, sort_keys=True),
        file=sys.stderr,
    )


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def _write_manifest(
    out_path: str,
    command: str,
    config: dict,
    seed: int | None,
    inputs: Sequence[str],
    counts: dict,
) -> str:
    """Write <out>.manifest.json next to an artifact.

    ``config`` must hold only data-affecting options; execution knobs
    (worker counts, in-flight limits, checkpoint paths) stay out so the
    same artifact always gets the same manifest. No timestamps for the
    same reason.
    """
    manifest = {
        "command": command,
        "config": config,
        "config_hash": hashlib.sha256(_canonical(config).encode("utf-8")).hexdigest(),
        "seed": seed,
        "inputs": {p: _sha256_file(p) for p in sorted(set(inputs))},
        "counts": counts,
    }
    path = out_path + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, ensure_ascii=False, indent=2)
        fh.write("\n")
    return path


class _Options:
    """Flag > config file > default resolution for one invocation."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config: dict = {}
        config_path = getattr(args, "config", None)
        if config_path:
            try:
                with open(config_path, encoding="utf-8") as fh:
                    loaded = json.load(fh)
            except FileNotFoundError:
                raise CliError("CONFIG", f"config file not found: {config_path}", 2)
            except json.JSONDecodeError as exc:
                raise CliError("CONFIG", f"config file is not valid JSON: {exc}", 2)
            if not isinstance(loaded, dict):
                raise CliError("CONFIG", "config file must hold a JSON object", 2)
            self.config = loaded

    def get(self, dest: str, default=None, required: bool = False):
        value = getattr(self.args, dest, None)
        if value is None:
            value = self.config.get(dest)
        if value is None:
            value = default
        if value is None and required:
            raise CliError("CONFIG", f"missing required option '{dest}'", 2)
        return value

    def get_n(self) -> int:
        n = self.get("n", required=True)
        if n not in VALID_N_CHOICES:
            raise CliError("CONFIG", f"n must be one of {VALID_N_CHOICES}, got {n}", 2)
        return n

    def get_seed(self) -> int:
        seed = self.get("seed", required=True)
        if not isinstance(seed, int):
            raise CliError("CONFIG", "seed must be an integer", 2)
        return seed

    def get_rate(self, dest: str, default: float) -> float:
        value = self.get(dest, default=default)
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise CliError("CONFIG", f"'{dest}' must be a number", 2)
        if not 0.0 <= value <= 1.0:
            raise CliError("CONFIG", f"'{dest}' must lie in [0, 1]", 2)
        return value


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_extract(opts: _Options) -> int:
    in_path = opts.get("in_path", required=True)
    n = opts.get_n()
    out = opts.get("out", required=True)
    _log("stage", command="extract", phase="start", input=in_path, n=n)
    pool = build_pool(read_pairs(in_path), n, provenance=(in_path,))
    save_pool(pool, out)
    counts = pool_stats(pool)
    _write_manifest(out, "extract", {"in": in_path, "n": n, "out": out}, None, [in_path], counts)
    _log("stage", command="extract", phase="end", out=out, **counts)
    return 0


def _cmd_pool(opts: _Options) -> int:
    in_paths = opts.get("in_paths", required=True)
    n = opts.get_n()
    out = opts.get("out", required=True)
    _log("stage", command="pool", phase="start", inputs=list(in_paths), n=n)
    merged = merge_pools([load_pool(p, n, provenance=(p,)) for p in in_paths])
    save_pool(merged, out)
    counts = pool_stats(merged)
    _write_manifest(
        out, "pool", {"in": list(in_paths), "n": n, "out": out}, None, in_paths, counts
    )
    _log("stage", command="pool", phase="end", out=out, **counts)
    return 0


def _cmd_sample(opts: _Options) -> int:
    pool_path = opts.get("pool", required=True)
    n = opts.get_n()
    count = opts.get("count", required=True)
    seed = opts.get_seed()
    out = opts.get("out", required=True)
    if count < 0:
        raise CliError("CONFIG", "count must be non-negative", 2)
    _log("stage", command="sample", phase="start", pool=pool_path, count=count)
    pool = restrict_sendable(load_pool(pool_path, n))
    if len(pool) == 0:
        raise CliError("INVALID_ARGUMENT", "pool has no sendable patterns")
    with open(out, "w", encoding="utf-8") as fh:
        for i in range(count):
            rng = slot_rng(seed, i)
            pats = sample_patterns(pool, rng)
            request = assemble_input([p.correct for p in pats], rng, request_id=str(i))
            row = {
                "id": request.id,
                "patterns": [
                    {"wrong": list(p.wrong), "correct": list(p.correct)} for p in pats
                ],
                "template": request.template,
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    config = {"pool": pool_path, "n": n, "count": count, "seed": seed, "out": out}
    _write_manifest(out, "sample", config, seed, [pool_path], {"rows": count})
    _log("stage", command="sample", phase="end", out=out, rows=count)
    return 0


def _cmd_synthesize(opts: _Options) -> int:
    pool_path = opts.get("pool", required=True)
    n = opts.get_n()
    count = opts.get("count", required=True)
    seed = opts.get_seed()
    out = opts.get("out", required=True)
    error_rate_ = opts.get_rate("error_rate", 0.5)
    backend_name = opts.get("backend", default="stub")
    workers = opts.get("workers", default=os.cpu_count() or 1)
    budget = opts.get("attempt_budget")
    if count < 0:
        raise CliError("CONFIG", "count must be non-negative", 2)

    if backend_name == "stub":
        backend = StubGenerator(
            seed=seed,
            drop_rate=opts.get_rate("stub_drop_rate", 0.0),
            refuse_rate=opts.get_rate("stub_refuse_rate", 0.0),
        )
    elif backend_name == "http":
        try:
            backend = HttpGenerator(fewshot=bool(opts.get("fewshot", default=False)))
        except ValueError as exc:
            raise CliError("CONFIG", str(exc), 2)
    else:
        raise CliError("CONFIG", f"unknown backend {backend_name!r}", 2)

    _log(
        "stage", command="synthesize", phase="start",
        pool=pool_path, count=count, backend=backend_name, error_rate=error_rate_,
    )
    pool = load_pool(pool_path, n)
    samples, stats = synthesize(
        pool, count, backend, seed,
        error_rate=error_rate_, workers=int(workers), attempt_budget=budget,
    )
    write_samples(samples, out)
    stats_path = out + ".stats.json"
    with open(stats_path, "w", encoding="utf-8") as fh:
        json.dump(stats.as_dict(), fh, sort_keys=True, ensure_ascii=False, indent=2)
        fh.write("\n")
    config = {
        "pool": pool_path, "n": n, "count": count, "seed": seed, "out": out,
        "error_rate": error_rate_, "backend": backend_name,
        "stub_drop_rate": opts.get_rate("stub_drop_rate", 0.0),
        "stub_refuse_rate": opts.get_rate("stub_refuse_rate", 0.0),
    }
    counts = {"samples": stats.samples, "errorful": stats.errorful}
    _write_manifest(out, "synthesize", config, seed, [pool_path], counts)
    _log("stage", command="synthesize", phase="end", out=out, **counts)
    return 0


def _cmd_denoise(opts: _Options) -> int:
    in_path = opts.get("in_path", required=True)
    backend_name = opts.get("backend", default="identity")
    out = opts.get("out", required=True)
    checkpoint = opts.get("checkpoint")
    in_flight = int(opts.get("max_in_flight", default=8))
    every = int(opts.get("checkpoint_every", default=1000))

    if backend_name == "identity":
        corrector = IdentityCorrector()
    elif backend_name == "oracle":
        corrector = OracleCorrector(read_samples(in_path))
    elif backend_name == "http":
        try:
            corrector = HttpCorrector()
        except ValueError as exc:
            raise CliError("CONFIG", str(exc), 2)
    else:
        raise CliError("CONFIG", f"unknown backend {backend_name!r}", 2)

    skip = completed_from_checkpoint(checkpoint) if checkpoint else 0
    _log(
        "stage", command="denoise", phase="start",
        input=in_path, backend=backend_name, resume_skip=skip,
    )
    samples: Iterable = read_samples(in_path)
    if skip:
        samples = islice(samples, skip, None)
    pairs = relabel(
        samples, corrector,
        max_in_flight=in_flight, checkpoint_path=checkpoint, checkpoint_every=every,
    )
    written = 0
    matches_target = 0
    matches_source = 0
    with open(out, "a" if skip else "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(jsonl_line(pair) + "\n")
            fh.flush()
            written += 1
            assert pair.meta is not None
            matches_target += bool(pair.meta["matches_target"])
            matches_source += bool(pair.meta["matches_source"])
    counts = {
        "pairs": written,
        "matches_target": matches_target,
        "matches_source": matches_source,
    }
    config = {"in": in_path, "backend": backend_name, "out": out}
    _write_manifest(out, "denoise", config, None, [in_path], counts)
    _log("stage", command="denoise", phase="end", out=out, **counts)
    return 0


def _cmd_mix(opts: _Options) -> int:
    plan_path = opts.get("plan", required=True)
    out = opts.get("out", required=True)
    sweep = opts.get("sweep")
    plan = load_plan(plan_path)
    inputs = [plan_path, *plan.real] + ([plan.synthetic] if plan.synthetic else [])
    _log("stage", command="mix", phase="start", plan=plan_path, sweep=bool(sweep))

    if not sweep:
        examples, manifest = mix(plan)
        write_jsonl(examples, out)
        config = {"plan": plan_path, "out": out}
        _write_manifest(out, "mix", config, plan.seed, inputs, manifest)
        _log("stage", command="mix", phase="end", out=out, total=manifest["total"])
        return 0

    caps = _parse_caps(sweep)
    root, ext = os.path.splitext(out)
    summary = []
    for cap, examples, manifest in ratio_sweep(plan, caps):
        cap_out = f"{root}.cap{cap}{ext}"
        write_jsonl(examples, cap_out)
        config = {"plan": plan_path, "out": out, "cap": cap}
        _write_manifest(cap_out, "mix", config, plan.seed, inputs, manifest)
        summary.append(
            {
                "cap": cap,
                "path": cap_out,
                "total": manifest["total"],
                "errorful": round(error_rate(examples), 6),
            }
        )
    summary_path = out + ".sweep.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, ensure_ascii=False, indent=2)
        fh.write("\n")
    for row in summary:
        print(f"cap={row['cap']} total={row['total']} errorful={row['errorful']:.4f}")
    _log("stage", command="mix", phase="end", sweep=len(summary), summary=summary_path)
    return 0


def _parse_caps(sweep) -> list[int]:
    if isinstance(sweep, str):
        parts = [p for p in sweep.split(",") if p != ""]
        try:
            return [int(p) for p in parts]
        except ValueError:
            raise CliError("CONFIG", f"bad sweep value {sweep!r}; want e.g. 0,100,200", 2)
    if isinstance(sweep, list) and all(isinstance(c, int) for c in sweep):
        return list(sweep)
    raise CliError("CONFIG", "sweep must be a comma-separated int list", 2)


def _cmd_stats(opts: _Options) -> int:
    pool_path = opts.get("pool")
    ref_path = opts.get("ref_pool")
    if (pool_path is None) == (ref_path is None):
        raise CliError("CONFIG", "pass exactly one of --pool or --ref-pool", 2)
    n = opts.get_n()

    if pool_path is not None:
        _log("stage", command="stats", phase="start", pool=pool_path)
        counts = pool_stats(load_pool(pool_path, n))
        print(_canonical(counts))
        _log("stage", command="stats", phase="end", **counts)
        return 0

    corpus_path = opts.get("corpus", required=True)
    top_k = int(opts.get("top_k", default=100))
    _log("stage", command="stats", phase="start", ref_pool=ref_path, corpus=corpus_path)
    reference = load_pool(ref_path, n)
    candidate = build_pool(read_pairs(corpus_path), n)
    report = distribution_from_counts(reference, candidate.counts, top_k)
    print(
        _canonical(
            {"cosine": report.cosine, "spearman": report.spearman, "top_k": report.top_k}
        )
    )
    out = opts.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, sort_keys=True, ensure_ascii=False, indent=2)
            fh.write("\n")
        config = {"ref_pool": ref_path, "corpus": corpus_path, "n": n, "top_k": top_k}
        _write_manifest(
            out, "stats", config, None, [ref_path, corpus_path], {"top_k": report.top_k}
        )
    csv_path = opts.get("csv")
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["pattern_wrong", "pattern_correct", "reference_count", "candidate_count"]
            )
            for p, rc, cc in zip(
                report.patterns, report.reference_counts, report.candidate_counts
            ):
                writer.writerow([" ".join(p.wrong), " ".join(p.correct), rc, cc])
    _log(
        "stage", command="stats", phase="end",
        cosine=report.cosine, spearman=report.spearman,
    )
    return 0


def _cmd_score(opts: _Options) -> int:
    hyp_path = opts.get("hyp", required=True)
    gold_path = opts.get("gold", required=True)
    beta = float(opts.get("beta", default=0.5))
    _log("stage", command="score", phase="start", hyp=hyp_path, gold=gold_path)
    report = score(read_pairs(hyp_path), read_m2(gold_path), beta)
    label = f"F{beta:g}"
    print(f"TP {report.tp}")
    print(f"FP {report.fp}")
    print(f"FN {report.fn}")
    print(f"Precision {report.precision:.4f}")
    print(f"Recall {report.recall:.4f}")
    print(f"{label} {report.f_beta:.4f}")
    for cat, c in sorted(report.per_category.items()):
        print(f"category {cat} tp={c.tp} fp={c.fp} fn={c.fn} f={c.f_beta:.4f}")
    out = opts.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, sort_keys=True, ensure_ascii=False, indent=2)
            fh.write("\n")
        config = {"hyp": hyp_path, "gold": gold_path, "beta": beta}
        _write_manifest(
            out, "score", config, None, [hyp_path, gold_path],
            {"tp": report.tp, "fp": report.fp, "fn": report.fn},
        )
    _log("stage", command="score", phase="end", f=report.f_beta)
    return 0


# ---------------------------------------------------------------------------
# Parser

def _build_parser() -> _Parser:
    parser = _Parser(prog="gecaug", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON config file; flags override it")
        return p

    p = add("extract", "build a pattern pool from a parallel corpus")
    p.add_argument("--in", dest="in_path", help="corpus file (.tsv or .jsonl)")
    p.add_argument("--n", type=int, choices=VALID_N_CHOICES, help="context width")
    p.add_argument("--out", help="pool file to write")

    p = add("pool", "merge pattern pools")
    p.add_argument("--in", dest="in_paths", nargs="+", help="pool files")
    p.add_argument("--n", type=int, choices=VALID_N_CHOICES)
    p.add_argument("--out")

    p = add("sample", "draw generation inputs from a pool")
    p.add_argument("--pool")
    p.add_argument("--n", type=int, choices=VALID_N_CHOICES)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add("synthesize", "generate a synthetic corpus from a pool")
    p.add_argument("--pool")
    p.add_argument("--n", type=int, choices=VALID_N_CHOICES)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--error-rate", dest="error_rate", type=float)
    p.add_argument("--backend", choices=["stub", "http"])
    p.add_argument("--workers", type=int, help="parallel slots (default: cpu count)")
    p.add_argument("--attempt-budget", dest="attempt_budget", type=int)
    p.add_argument("--stub-drop-rate", dest="stub_drop_rate", type=float)
    p.add_argument("--stub-refuse-rate", dest="stub_refuse_rate", type=float)
    p.add_argument("--fewshot", action="store_const", const=True, default=None)
    p.add_argument("--out")

    p = add("denoise", "relabel synthetic sources with a corrector")
    p.add_argument("--in", dest="in_path", help="synthetic corpus (synthesize output)")
    p.add_argument("--backend", choices=["identity", "oracle", "http"])
    p.add_argument("--checkpoint", help="resumable checkpoint file")
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    p.add_argument("--max-in-flight", dest="max_in_flight", type=int)
    p.add_argument("--out")

    p = add("mix", "build a training corpus from a stage plan")
    p.add_argument("--plan", help="stage plan JSON")
    p.add_argument("--sweep", help="comma-separated synthetic caps")
    p.add_argument("--out")

    p = add("stats", "pool stats or distribution consistency report")
    p.add_argument("--pool", help="print {patterns, total} for this pool")
    p.add_argument("--ref-pool", dest="ref_pool", help="reference pool for a report")
    p.add_argument("--corpus", help="candidate corpus for a report")
    p.add_argument("--n", type=int, choices=VALID_N_CHOICES)
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--out", help="write the full report JSON here")
    p.add_argument("--csv", help="write the per-pattern frequency table here")

    p = add("score", "score a hypothesis corpus against gold M2")
    p.add_argument("--hyp", help="hypothesis corpus (.tsv or .jsonl)")
    p.add_argument("--gold", help="gold annotations (.m2)")
    p.add_argument("--beta", type=float)
    p.add_argument("--out", help="write the report JSON here")

    return parser


_COMMANDS = {
    "extract": _cmd_extract,
    "pool": _cmd_pool,
    "sample": _cmd_sample,
    "synthesize": _cmd_synthesize,
    "denoise": _cmd_denoise,
    "mix": _cmd_mix,
    "stats": _cmd_stats,
    "score": _cmd_score,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise CliError("USAGE", "no subcommand given", 2)
        handler = _COMMANDS[args.command]
        return handler(_Options(args))
    except CliError as exc:
        _emit_error(exc.code, str(exc))
        return exc.exit_code
    except MalformedLine as exc:
        _emit_error("MALFORMED_LINE", str(exc))
    except SpanOutOfBounds as exc:
        _emit_error("SPAN_OUT_OF_BOUNDS", str(exc))
    except SchemaError as exc:
        _emit_error("SCHEMA", str(exc))
    except CorpusError as exc:
        _emit_error("CORPUS", str(exc))
    except ScoringError as exc:
        _emit_error("SCORING", str(exc))
    except SynthesisBudgetError as exc:
        _emit_error("BUDGET_EXHAUSTED", str(exc))
    except TransportError as exc:
        _emit_error("TRANSPORT", str(exc))
    except FileNotFoundError as exc:
        _emit_error("IO", str(exc))
    except ValueError as exc:
        _emit_error("INVALID_ARGUMENT", str(exc))
    except OSError as exc:
        _emit_error("IO", str(exc))
    return 1


if __name__ == "__main__":
    sys.exit(main())
