"""Error patterns and frequency-weighted pattern pools.

A pattern is a (wrong, correct) pair of short token sequences at a fixed
context width n. At n=1 the pattern is the bare edit; wider n wraps the
edit in up to (n-1)/2 shared context tokens on each side, truncated at
sentence boundaries and never crossing a neighboring edit's span.

Pools count pattern occurrences over a corpus and support frequency-
proportional sampling with replacement, so synthetic corpora inherit the
error distribution of the corpus the pool came from.
"""

from __future__ import annotations

import json
import os
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from random import Random
from typing import Iterable, Mapping, Sequence

from .align import Edit, extract_edits
from .corpus import MalformedLine, ParallelExample, SchemaError

VALID_N = (1, 3, 5)


def _check_side(tokens: tuple[str, ...], label: str) -> None:
    for tok in tokens:
        if tok == "" or any(ch.isspace() for ch in tok):
            raise ValueError(f"{label} side token {tok!r} is empty or has whitespace")


@dataclass(frozen=True)
class ErrorPattern:
    """One (wrong, correct) n-gram pair. Either side may be empty at n=1."""

    wrong: tuple[str, ...]
    correct: tuple[str, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "wrong", tuple(self.wrong))
        object.__setattr__(self, "correct", tuple(self.correct))
        if self.n not in VALID_N:
            raise ValueError(f"context width must be one of {VALID_N}, got {self.n}")
        _check_side(self.wrong, "wrong")
        _check_side(self.correct, "correct")
        if self.wrong == self.correct:
            raise ValueError("pattern sides are identical")


def extend_to_ngram(
    edit: Edit,
    source: Sequence[str],
    target: Sequence[str],
    n: int,
    edits: Sequence[Edit] | None = None,
) -> ErrorPattern:
    """Widen an edit into an n-gram pattern with shared context.

    Up to (n-1)/2 tokens are taken on each side, stopping at the sentence
    boundary, at a neighboring edit's span (pass the pair's full edit list
    as ``edits``), or at the first position where source and target
    disagree. Inside the corridor between neighboring edits the last two
    conditions coincide, so omitting ``edits`` only matters for pairs with
    pathological multi-edit geometry.
    """
    if n not in VALID_N:
        raise ValueError(f"context width must be one of {VALID_N}, got {n}")
    k = (n - 1) // 2
    start, end = edit.src_span
    t_start, t_end = edit.tgt_span

    lo = 0
    hi = len(source)
    if edits is not None:
        for e in edits:
            if e.src_span == edit.src_span and e.tgt_span == edit.tgt_span:
                continue
            if e.src_span[1] <= start:
                lo = max(lo, e.src_span[1])
            if e.src_span[0] >= end:
                hi = min(hi, e.src_span[0])

    p = 0
    while (
        p < k
        and start - p - 1 >= lo
        and t_start - p - 1 >= 0
        and source[start - p - 1] == target[t_start - p - 1]
    ):
        p += 1
    s = 0
    while (
        s < k
        and end + s < hi
        and t_end + s < len(target)
        and source[end + s] == target[t_end + s]
    ):
        s += 1

    prefix = tuple(source[start - p:start])
    suffix = tuple(source[end:end + s])
    wrong = prefix + tuple(source[start:end]) + suffix
    correct = prefix + edit.replacement + suffix
    return ErrorPattern(wrong, correct, n)


class PatternPool:
    """Pattern occurrence counts at one context width.

    ``provenance`` lists the corpus ids the counts came from. Pools are
    treated as immutable after construction; sampling structures are built
    lazily and cached.
    """

    def __init__(
        self,
        counts: Mapping[ErrorPattern, int],
        n: int,
        provenance: Sequence[str] = (),
    ):
        if n not in VALID_N:
            raise ValueError(f"context width must be one of {VALID_N}, got {n}")
        for pattern, count in counts.items():
            if pattern.n != n:
                raise ValueError(
                    f"pattern width {pattern.n} does not match pool width {n}"
                )
            if not isinstance(count, int) or count < 1:
                raise ValueError(f"count for {pattern} must be a positive int")
        self.counts: dict[ErrorPattern, int] = dict(counts)
        self.n = n
        self.provenance = tuple(provenance)
        self.total = sum(self.counts.values())
        self._keys: list[ErrorPattern] | None = None
        self._cum: list[int] | None = None

    def __len__(self) -> int:
        return len(self.counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatternPool):
            return NotImplemented
        return (
            self.counts == other.counts
            and self.n == other.n
            and self.provenance == other.provenance
        )

    def __repr__(self) -> str:
        return f"PatternPool(n={self.n}, patterns={len(self.counts)}, total={self.total})"

    def patterns_by_frequency(self) -> list[ErrorPattern]:
        """Patterns ordered by descending count, ties lexicographic."""
        return sorted(
            self.counts, key=lambda p: (-self.counts[p], p.wrong, p.correct)
        )

    def _sampling_arrays(self) -> tuple[list[ErrorPattern], list[int]]:
        # Keys are sorted, not insertion-ordered, so pools with equal
        # content sample identically however they were built.
        if self._keys is None:
            keys = sorted(self.counts, key=lambda p: (p.wrong, p.correct))
            cum: list[int] = []
            running = 0
            for key in keys:
                running += self.counts[key]
                cum.append(running)
            self._keys = keys
            self._cum = cum
        assert self._cum is not None
        return self._keys, self._cum


def build_pool(
    corpus: Iterable[ParallelExample], n: int, provenance: Sequence[str] = ()
) -> PatternPool:
    """Extract every edit in ``corpus`` and count its n-gram pattern."""
    counts: Counter[ErrorPattern] = Counter()
    for pair in corpus:
        edits = extract_edits(pair)
        for edit in edits:
            counts[extend_to_ngram(edit, pair.source, pair.target, n, edits)] += 1
    return PatternPool(counts, n, provenance)


def merge_pools(pools: Sequence[PatternPool]) -> PatternPool:
    """Sum counts across pools of the same width; provenance concatenates."""
    if not pools:
        raise ValueError("no pools to merge")
    n = pools[0].n
    for pool in pools[1:]:
        if pool.n != n:
            raise ValueError(f"cannot merge widths {n} and {pool.n}")
    counts: Counter[ErrorPattern] = Counter()
    provenance: list[str] = []
    for pool in pools:
        counts.update(pool.counts)
        provenance.extend(pool.provenance)
    return PatternPool(counts, n, provenance)


def restrict_sendable(pool: PatternPool) -> PatternPool:
    """Drop patterns whose correct side is empty.

    A pattern with no correct-side tokens cannot be located in a generated
    sentence, so it can never be planted.
    """
    counts = {p: c for p, c in pool.counts.items() if p.correct}
    return PatternPool(counts, pool.n, pool.provenance)


# ---------------------------------------------------------------------------
# Sampling

def draw_pattern(pool: PatternPool, rng: Random) -> ErrorPattern:
    """One frequency-proportional draw (with replacement)."""
    if pool.total == 0:
        raise ValueError("cannot sample from an empty pool")
    keys, cum = pool._sampling_arrays()
    r = rng.randrange(pool.total)
    return keys[bisect_right(cum, r)]


def sides_overlap(a: tuple[str, ...], b: tuple[str, ...]) -> bool:
    """True if one token sequence contains the other or their ends overlap.

    Empty sequences overlap everything. Boundary overlap means a suffix of
    one equals a prefix of the other, which would let the two sequences
    share tokens when planted into one sentence.
    """
    if not a or not b:
        return True
    la, lb = len(a), len(b)
    if la <= lb:
        shorter, longer = a, b
    else:
        shorter, longer = b, a
    ls, ll = len(shorter), len(longer)
    if any(longer[i:i + ls] == shorter for i in range(ll - ls + 1)):
        return True
    for k in range(1, min(la, lb)):
        if a[-k:] == b[:k] or b[-k:] == a[:k]:
            return True
    return False


def patterns_overlap(p: ErrorPattern, q: ErrorPattern) -> bool:
    """Overlap test on correct sides, the sides that appear in candidates."""
    return sides_overlap(p.correct, q.correct)


def sample_patterns(pool: PatternPool, rng: Random) -> list[ErrorPattern]:
    """Draw 1 or 2 non-overlapping patterns for one generation slot.

    RNG order: one draw for the pattern count (uniform 1 or 2), then the
    pattern draws. A 2-draw whose patterns overlap is redrawn as a pair up
    to 8 times; if every attempt overlaps, the draw is truncated to the
    first pattern of the final attempt.
    """
    count = rng.randint(1, 2)
    if count == 1:
        return [draw_pattern(pool, rng)]
    a = draw_pattern(pool, rng)
    b = draw_pattern(pool, rng)
    for _ in range(8):
        if not patterns_overlap(a, b):
            return [a, b]
        a = draw_pattern(pool, rng)
        b = draw_pattern(pool, rng)
    if not patterns_overlap(a, b):
        return [a, b]
    return [a]


# ---------------------------------------------------------------------------
# Serialization

def save_pool(pool: PatternPool, path) -> int:
    """Write one {wrong, correct, count} JSON object per line.

    Rows are ordered by descending count with lexicographic tie-breaks, so
    equal pools serialize to identical bytes. Width and provenance are not
    stored; loading takes the width explicitly.
    """
    count = 0
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        for pattern in pool.patterns_by_frequency():
            row = {
                "wrong": list(pattern.wrong),
                "correct": list(pattern.correct),
                "count": pool.counts[pattern],
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    return count


def load_pool(path, n: int, provenance: Sequence[str] = ()) -> PatternPool:
    """Read a pool written by save_pool. ``n`` must be supplied by the caller."""
    path = os.fspath(path)
    counts: dict[ErrorPattern, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(path, line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise SchemaError(path, line_no, "row is not an object")
            for key in ("wrong", "correct"):
                if key not in obj or not isinstance(obj[key], list) or any(
                    not isinstance(t, str) for t in obj[key]
                ):
                    raise SchemaError(path, line_no, f"key {key!r} must be a string list")
            if not isinstance(obj.get("count"), int) or obj["count"] < 1:
                raise SchemaError(path, line_no, "key 'count' must be a positive int")
            try:
                pattern = ErrorPattern(tuple(obj["wrong"]), tuple(obj["correct"]), n)
            except ValueError as exc:
                raise SchemaError(path, line_no, str(exc)) from exc
            if pattern in counts:
                raise SchemaError(path, line_no, "duplicate pattern row")
            counts[pattern] = obj["count"]
    return PatternPool(counts, n, provenance)


def pool_stats(pool: PatternPool) -> dict[str, int]:
    """Distinct pattern count and total occurrence mass, for reporting."""
    return {"patterns": len(pool.counts), "total": pool.total}
