"""Parallel corpus containers and file formats.

Three interchange formats are supported:

* TSV: one pair per line, ``wrong<TAB>correct``, both sides pre-tokenized
  with single spaces.
* M2: blocks of one ``S`` source line plus ``A`` annotation lines, the
  shared format of GEC shared tasks. One block may carry several
  annotators, keyed by the trailing annotator id field.
* JSONL: one object per line with ``id``, ``source``, ``target`` and an
  optional ``meta`` map.

All readers are strict. Undecodable bytes, ragged rows, out-of-range edit
spans and schema violations raise typed errors carrying the file path and
line number instead of letting garbage flow downstream.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping


class CorpusError(Exception):
    """Base class for corpus ingest and validation failures."""


class MalformedLine(CorpusError):
    """A line that cannot be parsed under the declared format."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class SpanOutOfBounds(CorpusError):
    """An edit span that does not fit the source sentence."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class SchemaError(CorpusError):
    """A structurally valid record missing required fields or types."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


def _check_tokens(tokens: tuple[str, ...], label: str) -> None:
    if not tokens:
        raise ValueError(f"{label} side is empty")
    for tok in tokens:
        if tok == "":
            raise ValueError(f"{label} side contains an empty token")
        if any(ch.isspace() for ch in tok):
            raise ValueError(f"{label} token {tok!r} contains whitespace")


@dataclass(frozen=True)
class ParallelExample:
    """One wrong/correct sentence pair, both sides tokenized."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    id: str
    meta: Mapping[str, object] | None = None

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        _check_tokens(self.source, "source")
        _check_tokens(self.target, "target")


@dataclass(frozen=True)
class GoldEdit:
    """One annotated edit: replace source[start:end] with ``correction``.

    ``correction`` is empty for deletions. ``start == end`` marks an
    insertion point. ``type`` is the annotation scheme's label and is
    carried verbatim.
    """

    start: int
    end: int
    type: str
    correction: tuple[str, ...]
    required: str = "REQUIRED"
    comment: str = "-NONE-"

    def __post_init__(self):
        object.__setattr__(self, "correction", tuple(self.correction))
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"bad edit span ({self.start}, {self.end})")


@dataclass(frozen=True)
class AnnotatedExample:
    """A source sentence plus per-annotator gold edits.

    ``edits`` maps annotator id to a tuple of edits sorted by span. An
    annotator present with an empty tuple recorded an explicit "no
    correction needed" judgement; an absent annotator recorded nothing.
    """

    source: tuple[str, ...]
    edits: Mapping[int, tuple[GoldEdit, ...]] = field(default_factory=dict)
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        _check_tokens(self.source, "source")
        fixed = {int(a): tuple(es) for a, es in self.edits.items()}
        object.__setattr__(self, "edits", fixed)
        n = len(self.source)
        for annotator, edits in fixed.items():
            prev_end = -1
            for e in edits:
                if e.end > n:
                    raise ValueError(
                        f"annotator {annotator}: span ({e.start}, {e.end}) "
                        f"exceeds sentence length {n}"
                    )
                if e.start < prev_end:
                    raise ValueError(
                        f"annotator {annotator}: edits overlap or are unsorted"
                    )
                prev_end = e.end


def apply_gold_edits(source: tuple[str, ...], edits: Iterable[GoldEdit]) -> tuple[str, ...]:
    """Apply edits to ``source`` right to left and return the corrected tokens."""
    out = list(source)
    for e in sorted(edits, key=lambda e: (e.start, e.end), reverse=True):
        out[e.start:e.end] = e.correction
    return tuple(out)


# ---------------------------------------------------------------------------
# TSV

def read_parallel_tsv(path) -> Iterator[ParallelExample]:
    """Yield pairs from a ``wrong<TAB>correct`` file.

    Pair ids are 1-based line numbers as strings. Raises MalformedLine on
    ragged rows, empty sides, whitespace-broken tokens or undecodable bytes.
    """
    path = os.fspath(path)
    line_no = 0
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                fields = line.split("\t")
                if len(fields) != 2:
                    raise MalformedLine(
                        path, line_no, f"expected 2 tab-separated fields, got {len(fields)}"
                    )
                try:
                    yield ParallelExample(
                        source=tuple(fields[0].split(" ")),
                        target=tuple(fields[1].split(" ")),
                        id=str(line_no),
                    )
                except ValueError as exc:
                    raise MalformedLine(path, line_no, str(exc)) from exc
    except UnicodeDecodeError as exc:
        raise MalformedLine(path, line_no + 1, f"invalid UTF-8: {exc}") from exc


def write_parallel_tsv(examples: Iterable[ParallelExample], path) -> int:
    """Write pairs as TSV. Returns the number of lines written."""
    count = 0
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(" ".join(ex.source) + "\t" + " ".join(ex.target) + "\n")
            count += 1
    return count


# ---------------------------------------------------------------------------
# M2

_NOOP_TYPE = "noop"
_NONE_FIELD = "-NONE-"


def _parse_a_line(path: str, line_no: int, payload: str, n_source: int):
    """Parse one A-line payload. Returns (annotator, GoldEdit | None)."""
    fields = payload.split("|||")
    if len(fields) != 6:
        raise MalformedLine(
            path, line_no, f"expected 6 '|||'-separated fields, got {len(fields)}"
        )
    span_part, etype, correction, required, comment, annot_part = fields
    span_bits = span_part.split()
    if len(span_bits) != 2:
        raise MalformedLine(path, line_no, f"bad span field {span_part!r}")
    try:
        start, end = int(span_bits[0]), int(span_bits[1])
    except ValueError as exc:
        raise MalformedLine(path, line_no, f"non-integer span {span_part!r}") from exc
    try:
        annotator = int(annot_part)
    except ValueError as exc:
        raise MalformedLine(path, line_no, f"non-integer annotator {annot_part!r}") from exc

    if etype == _NOOP_TYPE or (start, end) == (-1, -1):
        # Both halves of the noop convention must appear together.
        if etype != _NOOP_TYPE or (start, end) != (-1, -1):
            raise MalformedLine(
                path, line_no, "noop requires both type 'noop' and span -1 -1"
            )
        return annotator, None

    if start < 0 or end < start or end > n_source:
        raise SpanOutOfBounds(
            path, line_no,
            f"span ({start}, {end}) does not fit sentence of length {n_source}",
        )
    if correction in (_NONE_FIELD, ""):
        corr_tokens: tuple[str, ...] = ()
    else:
        corr_tokens = tuple(correction.split(" "))
        if any(t == "" for t in corr_tokens):
            raise MalformedLine(path, line_no, "correction contains an empty token")
    return annotator, GoldEdit(start, end, etype, corr_tokens, required, comment)


def read_m2(path) -> Iterator[AnnotatedExample]:
    """Yield annotated examples from an M2 file.

    Block ids are 0-based block indices as strings. Noop annotations yield
    an annotator with an empty edit tuple. Per-annotator edits must arrive
    sorted and non-overlapping.
    """
    path = os.fspath(path)

    source: tuple[str, ...] | None = None
    source_line = 0
    edits: dict[int, list[GoldEdit]] = {}
    noop: set[int] = set()
    block_index = 0

    def flush() -> AnnotatedExample:
        nonlocal source, edits, noop, block_index
        assert source is not None
        merged: dict[int, tuple[GoldEdit, ...]] = {a: tuple(es) for a, es in edits.items()}
        for a in noop:
            merged[a] = ()
        try:
            ex = AnnotatedExample(source=source, edits=merged, id=str(block_index))
        except ValueError as exc:
            raise MalformedLine(path, source_line, str(exc)) from exc
        source, edits, noop = None, {}, set()
        block_index += 1
        return ex

    line_no = 0
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if line.strip() == "":
                    if source is not None:
                        yield flush()
                    continue
                if line.startswith("S "):
                    if source is not None:
                        yield flush()
                    source = tuple(line[2:].split(" "))
                    source_line = line_no
                    try:
                        _check_tokens(source, "source")
                    except ValueError as exc:
                        raise MalformedLine(path, line_no, str(exc)) from exc
                elif line.startswith("A "):
                    if source is None:
                        raise MalformedLine(path, line_no, "A-line before any S-line")
                    annotator, edit = _parse_a_line(path, line_no, line[2:], len(source))
                    if edit is None:
                        if annotator in edits:
                            raise MalformedLine(
                                path, line_no, f"annotator {annotator} mixes noop and edits"
                            )
                        noop.add(annotator)
                    else:
                        if annotator in noop:
                            raise MalformedLine(
                                path, line_no, f"annotator {annotator} mixes noop and edits"
                            )
                        edits.setdefault(annotator, []).append(edit)
                else:
                    raise MalformedLine(path, line_no, f"unrecognized line {line[:40]!r}")
        if source is not None:
            yield flush()
    except UnicodeDecodeError as exc:
        raise MalformedLine(path, line_no + 1, f"invalid UTF-8: {exc}") from exc


def write_m2(examples: Iterable[AnnotatedExample], path) -> int:
    """Write annotated examples as M2. Returns the number of blocks written.

    Annotators are emitted in ascending id order; an annotator with no
    edits becomes an explicit noop line, so reading the file back restores
    the same structure.
    """
    count = 0
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        for ex in examples:
            if count:
                fh.write("\n")
            fh.write("S " + " ".join(ex.source) + "\n")
            for annotator in sorted(ex.edits):
                edits = ex.edits[annotator]
                if not edits:
                    fh.write(
                        f"A -1 -1|||{_NOOP_TYPE}|||{_NONE_FIELD}|||REQUIRED"
                        f"|||{_NONE_FIELD}|||{annotator}\n"
                    )
                    continue
                for e in edits:
                    corr = " ".join(e.correction) if e.correction else _NONE_FIELD
                    fh.write(
                        f"A {e.start} {e.end}|||{e.type}|||{corr}"
                        f"|||{e.required}|||{e.comment}|||{annotator}\n"
                    )
            count += 1
    return count


# ---------------------------------------------------------------------------
# JSONL

def read_jsonl(path) -> Iterator[ParallelExample]:
    """Yield pairs from a JSONL file of {id, source, target, meta?} objects.

    Unknown keys are ignored so enriched rows (synthesis output, relabeled
    corpora) load with the same reader. Raises MalformedLine for broken
    JSON or token-level problems and SchemaError for missing or mistyped
    required keys.
    """
    path = os.fspath(path)
    line_no = 0
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedLine(path, line_no, f"invalid JSON: {exc}") from exc
                if not isinstance(obj, dict):
                    raise SchemaError(path, line_no, "row is not an object")
                for key in ("id", "source", "target"):
                    if key not in obj:
                        raise SchemaError(path, line_no, f"missing key {key!r}")
                    if not isinstance(obj[key], str):
                        raise SchemaError(path, line_no, f"key {key!r} is not a string")
                meta = obj.get("meta")
                if meta is not None and not isinstance(meta, dict):
                    raise SchemaError(path, line_no, "key 'meta' is not an object")
                try:
                    yield ParallelExample(
                        source=tuple(obj["source"].split(" ")),
                        target=tuple(obj["target"].split(" ")),
                        id=obj["id"],
                        meta=meta,
                    )
                except ValueError as exc:
                    raise MalformedLine(path, line_no, str(exc)) from exc
    except UnicodeDecodeError as exc:
        raise MalformedLine(path, line_no + 1, f"invalid UTF-8: {exc}") from exc


def jsonl_line(ex: ParallelExample) -> str:
    """One pair as its canonical JSONL row (no trailing newline)."""
    row: dict[str, object] = {
        "id": ex.id,
        "source": " ".join(ex.source),
        "target": " ".join(ex.target),
    }
    if ex.meta is not None:
        row["meta"] = ex.meta
    return json.dumps(row, ensure_ascii=False, sort_keys=True)


def write_jsonl(examples: Iterable[ParallelExample], path, append: bool = False) -> int:
    """Write pairs as JSONL. Returns the number of rows written."""
    count = 0
    with open(os.fspath(path), "a" if append else "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(jsonl_line(ex) + "\n")
            count += 1
    return count


def read_pairs(path) -> Iterator[ParallelExample]:
    """Read a parallel corpus, dispatching on extension (.tsv or .jsonl)."""
    name = os.fspath(path)
    if name.endswith(".tsv"):
        return read_parallel_tsv(name)
    if name.endswith(".jsonl"):
        return read_jsonl(name)
    raise ValueError(f"unsupported corpus format: {name!r} (want .tsv or .jsonl)")
