"""Synthetic pair construction.

Each output sample comes from one slot: sample patterns, assemble a
templated request, generate a candidate sentence, locate the pattern
correct-sides in the candidate, then (for an error_rate fraction of
slots) swap the located spans for the pattern wrong-sides. The generated
sentence is the target side; the swapped sentence is the source side.

Slot RNGs derive from (base_seed, slot index), so any worker count and
scheduling order produce byte-identical corpora. The errorful coin is
flipped once per slot before any generation attempt, which keeps the
errorful fraction an exact Binomial(count, error_rate) draw even when
faulty backends force retries.
"""

from __future__ import annotations

import json
import os
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from random import Random
from typing import Iterable, Sequence

from .corpus import MalformedLine, SchemaError, SpanOutOfBounds
from .generation import (
    STATUS_OK,
    STATUS_REFUSED,
    GeneratorBackend,
    assemble_input,
    generate,
)
from .patterns import ErrorPattern, PatternPool, restrict_sendable, sample_patterns
from .seeding import slot_rng

Match = tuple[ErrorPattern, tuple[int, int]]


class SynthesisBudgetError(Exception):
    """Raised when retries exhaust the global attempt budget."""

    def __init__(self, message: str, stats: "SynthStats"):
        super().__init__(message)
        self.stats = stats


@dataclass(frozen=True)
class SyntheticSample:
    """One synthetic pair. ``target`` is the generated sentence; ``source``
    carries the planted errors (equal to target for clean samples).
    ``planted`` spans index into ``source`` and cover the wrong sides."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    planted: tuple[Match, ...]
    requested: tuple[ErrorPattern, ...]
    generator_id: str
    id: str


@dataclass
class SynthStats:
    """Counters over every generation attempt, not just emitted samples."""

    samples: int = 0
    attempts: int = 0
    errorful: int = 0
    refused: int = 0
    transport_errors: int = 0
    zero_match_retries: int = 0
    patterns_requested: int = 0
    patterns_matched: int = 0
    unmatched_absent: int = 0
    unmatched_overlap: int = 0

    def add(self, other: "SynthStats") -> None:
        for f in self.__dataclass_fields__:
            setattr(self, f, getattr(self, f) + getattr(other, f))

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "attempts": self.attempts,
            "errorful": self.errorful,
            "errorful_fraction": self.errorful / self.samples if self.samples else 0.0,
            "generation_failures": {
                "refused": self.refused,
                "transport_error": self.transport_errors,
            },
            "zero_match_retries": self.zero_match_retries,
            "patterns": {
                "requested": self.patterns_requested,
                "matched": self.patterns_matched,
                "unmatched": {
                    "absent": self.unmatched_absent,
                    "overlap": self.unmatched_overlap,
                },
            },
        }


def _find_phrase(tokens: tuple[str, ...], phrase: tuple[str, ...]) -> tuple[int, int] | None:
    lp = len(phrase)
    if lp == 0 or lp > len(tokens):
        return None
    first = phrase[0]
    for i in range(len(tokens) - lp + 1):
        if tokens[i] == first and tokens[i:i + lp] == phrase:
            return (i, i + lp)
    return None


def _match_indexed(
    tokens: tuple[str, ...], patterns: Sequence[ErrorPattern]
) -> tuple[list[Match], list[int], list[int]]:
    """Locate each pattern's leftmost occurrence, then keep a maximal
    non-overlapping set greedily by (start, end). Returns (matches,
    absent indices, overlap-loser indices)."""
    located: list[tuple[tuple[int, int], int, ErrorPattern]] = []
    absent: list[int] = []
    for idx, p in enumerate(patterns):
        span = _find_phrase(tokens, p.correct)
        if span is None:
            absent.append(idx)
        else:
            located.append((span, idx, p))
    located.sort(key=lambda t: (t[0][0], t[0][1], t[2].wrong, t[2].correct, t[1]))
    matches: list[Match] = []
    overlap: list[int] = []
    last_end = -1
    for span, idx, p in located:
        if span[0] >= last_end:
            matches.append((p, span))
            last_end = span[1]
        else:
            overlap.append(idx)
    overlap.sort()
    return matches, absent, overlap


def match_patterns(
    tokens: Sequence[str], patterns: Sequence[ErrorPattern]
) -> tuple[list[Match], list[ErrorPattern]]:
    """Locate patterns in a candidate sentence.

    Each pattern is matched to the leftmost occurrence of its correct
    side; overlapping claims are resolved by span order and the losers
    reported unmatched (in request order) together with the patterns that
    do not occur at all.
    """
    toks = tuple(tokens)
    matches, absent, overlap = _match_indexed(toks, patterns)
    missed = sorted(set(absent) | set(overlap))
    return matches, [patterns[i] for i in missed]


def substitute(
    tokens: Sequence[str],
    matches: Sequence[Match],
    rng: Random,
    error_rate: float,
    requested: Sequence[ErrorPattern] | None = None,
    generator_id: str = "",
    sample_id: str = "0",
) -> SyntheticSample:
    """Swap matched spans for their wrong sides with probability error_rate.

    One Bernoulli draw per call decides substitution for all matches
    together. Planted spans are recomputed against the rewritten source.
    """
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError(f"error_rate must lie in [0, 1], got {error_rate}")
    target = tuple(tokens)
    if requested is None:
        requested = tuple(p for p, _ in matches)
    apply = rng.random() < error_rate
    if not apply or not matches:
        return SyntheticSample(target, target, (), tuple(requested), generator_id, sample_id)
    source: list[str] = []
    planted: list[Match] = []
    cursor = 0
    for p, (start, end) in sorted(matches, key=lambda m: m[1]):
        source.extend(target[cursor:start])
        planted.append((p, (len(source), len(source) + len(p.wrong))))
        source.extend(p.wrong)
        cursor = end
    source.extend(target[cursor:])
    return SyntheticSample(
        tuple(source), target, tuple(planted), tuple(requested), generator_id, sample_id
    )


def synthesize(
    pool: PatternPool,
    count: int,
    backend: GeneratorBackend,
    base_seed: int,
    error_rate: float = 0.5,
    workers: int = 1,
    attempt_budget: int | None = None,
) -> tuple[list[SyntheticSample], SynthStats]:
    """Produce ``count`` synthetic pairs from a pattern pool.

    Slot i derives its RNG from (base_seed, i) and flips its errorful
    coin first. Failed attempts (refusal, transport error, or an errorful
    slot where nothing matched) retry with fresh patterns against a global
    attempt budget (default 3 * count) shared by all slots; exhausting it
    raises SynthesisBudgetError. Output is ordered by slot.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError(f"error_rate must lie in [0, 1], got {error_rate}")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    stats = SynthStats()
    if count == 0:
        return [], stats
    sendable = restrict_sendable(pool)
    if len(sendable) == 0:
        raise ValueError("pool has no patterns with a non-empty correct side")
    budget = attempt_budget if attempt_budget is not None else 3 * count
    lock = threading.Lock()
    used = [0]

    def take_attempt() -> bool:
        with lock:
            if used[0] >= budget:
                return False
            used[0] += 1
            return True

    def run_slot(slot: int) -> SyntheticSample:
        rng = slot_rng(base_seed, slot)
        apply = rng.random() < error_rate
        local = SynthStats()
        attempt = 0
        sample: SyntheticSample | None = None
        while sample is None:
            if not take_attempt():
                with lock:
                    stats.add(local)
                raise SynthesisBudgetError(
                    f"attempt budget exhausted ({budget} attempts for {count} "
                    f"samples; slot {slot} still unfilled)",
                    stats,
                )
            local.attempts += 1
            pats = sample_patterns(sendable, rng)
            request = assemble_input(
                [p.correct for p in pats], rng, request_id=f"{slot}.{attempt}"
            )
            attempt += 1
            result = generate(request, backend)
            if result.status != STATUS_OK:
                if result.status == STATUS_REFUSED:
                    local.refused += 1
                else:
                    local.transport_errors += 1
                continue
            tokens = tuple(result.text.split())
            matches, absent, overlap = _match_indexed(tokens, pats)
            local.patterns_requested += len(pats)
            local.patterns_matched += len(matches)
            local.unmatched_absent += len(absent)
            local.unmatched_overlap += len(overlap)
            if apply and not matches:
                local.zero_match_retries += 1
                continue
            sample = substitute(
                tokens,
                matches,
                rng,
                1.0 if apply else 0.0,
                requested=pats,
                generator_id=backend.name,
                sample_id=str(slot),
            )
        local.samples += 1
        if sample.source != sample.target:
            local.errorful += 1
        with lock:
            stats.add(local)
        return sample

    if workers == 1:
        samples = [run_slot(slot) for slot in range(count)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool_ex:
            futures = [pool_ex.submit(run_slot, slot) for slot in range(count)]
            samples = [f.result() for f in futures]
    return samples, stats


def planted_counts(samples: Iterable[SyntheticSample]) -> Counter[ErrorPattern]:
    """Frequency of planted patterns over a synthetic corpus."""
    counts: Counter[ErrorPattern] = Counter()
    for s in samples:
        for p, _ in s.planted:
            counts[p] += 1
    return counts


# ---------------------------------------------------------------------------
# Serialization

def _pattern_obj(p: ErrorPattern) -> dict:
    return {"wrong": list(p.wrong), "correct": list(p.correct)}


def write_samples(samples: Iterable[SyntheticSample], path) -> int:
    """Write one JSON object per sample. Returns the number written."""
    count = 0
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        for s in samples:
            witness = s.requested or tuple(p for p, _ in s.planted)
            row = {
                "id": s.id,
                "source": " ".join(s.source),
                "target": " ".join(s.target),
                "planted": [
                    {**_pattern_obj(p), "span": list(span)} for p, span in s.planted
                ],
                "requested": [_pattern_obj(p) for p in s.requested],
                "generator": s.generator_id,
                "n": witness[0].n if witness else None,
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    return count


def _read_pattern(obj: dict, n: int, path: str, line_no: int) -> ErrorPattern:
    for key in ("wrong", "correct"):
        if key not in obj or not isinstance(obj[key], list) or any(
            not isinstance(t, str) for t in obj[key]
        ):
            raise SchemaError(path, line_no, f"pattern key {key!r} must be a string list")
    try:
        return ErrorPattern(tuple(obj["wrong"]), tuple(obj["correct"]), n)
    except ValueError as exc:
        raise SchemaError(path, line_no, str(exc)) from exc


def read_samples(path) -> Iterable[SyntheticSample]:
    """Yield samples written by write_samples, validating spans."""
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(path, line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise SchemaError(path, line_no, "row is not an object")
            for key in ("id", "source", "target", "generator"):
                if not isinstance(obj.get(key), str):
                    raise SchemaError(path, line_no, f"key {key!r} must be a string")
            for key in ("planted", "requested"):
                if not isinstance(obj.get(key), list):
                    raise SchemaError(path, line_no, f"key {key!r} must be a list")
            n = obj.get("n")
            if (obj["planted"] or obj["requested"]) and not isinstance(n, int):
                raise SchemaError(path, line_no, "key 'n' must be an int")
            source = tuple(obj["source"].split(" ")) if obj["source"] else ()
            target = tuple(obj["target"].split(" ")) if obj["target"] else ()
            planted: list[Match] = []
            for entry in obj["planted"]:
                if not isinstance(entry, dict) or "span" not in entry:
                    raise SchemaError(path, line_no, "planted entry must carry a span")
                p = _read_pattern(entry, n, path, line_no)
                span = entry["span"]
                if (
                    not isinstance(span, list)
                    or len(span) != 2
                    or any(not isinstance(v, int) for v in span)
                ):
                    raise SchemaError(path, line_no, "planted span must be [start, end]")
                a, b = span
                if a < 0 or b < a or b > len(source):
                    raise SpanOutOfBounds(
                        path, line_no, f"planted span ({a}, {b}) outside source"
                    )
                if source[a:b] != p.wrong:
                    raise SchemaError(
                        path, line_no, "planted span does not carry its wrong side"
                    )
                planted.append((p, (a, b)))
            requested = tuple(
                _read_pattern(entry, n, path, line_no) for entry in obj["requested"]
            )
            yield SyntheticSample(
                source, target, tuple(planted), requested, obj["generator"], obj["id"]
            )
