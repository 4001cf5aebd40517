"""Edit-based scoring and distribution diagnostics.

Scoring follows the usual GEC recipe: align each hypothesis against its
source, compare span-level edits to gold M2 annotations as exact
(span, replacement) matches, pick the annotator that flatters each
sentence most, and pool counts into corpus-level precision, recall and
F_beta (beta 0.5 by default, weighting precision).

Distribution diagnostics check that a synthetic corpus reproduces the
error-pattern frequencies of the pool it was sampled from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .align import extract_edits
from .corpus import AnnotatedExample, ParallelExample
from .patterns import ErrorPattern, PatternPool, build_pool


class ScoringError(Exception):
    """Hypothesis and gold corpora that cannot be compared."""


def f_beta(tp: int, fp: int, fn: int, beta: float = 0.5) -> float:
    """F_beta from edit counts. Zero denominators resolve to 0."""
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be non-negative")
    if beta <= 0:
        raise ValueError("beta must be positive")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return f_beta_from_rates(precision, recall, beta)


def f_beta_from_rates(precision: float, recall: float, beta: float = 0.5) -> float:
    """F_beta from precision and recall fractions."""
    if not 0.0 <= precision <= 1.0 or not 0.0 <= recall <= 1.0:
        raise ValueError("precision and recall must lie in [0, 1]")
    if beta <= 0:
        raise ValueError("beta must be positive")
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + b2) * precision * recall / denom


@dataclass(frozen=True)
class CategoryScore:
    tp: int
    fp: int
    fn: int
    f_beta: float


@dataclass(frozen=True)
class ScoreReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_beta: float
    beta: float
    per_category: Mapping[str, CategoryScore]

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f_beta": self.f_beta,
            "beta": self.beta,
            "per_category": {
                cat: {"tp": c.tp, "fp": c.fp, "fn": c.fn, "f_beta": c.f_beta}
                for cat, c in sorted(self.per_category.items())
            },
        }


def _gold_edit_keys(ex: AnnotatedExample, annotator: int):
    return {
        (e.start, e.end, e.correction): e.type for e in ex.edits.get(annotator, ())
    }


def score(
    hypothesis: Iterable[ParallelExample],
    gold: Iterable[AnnotatedExample],
    beta: float = 0.5,
) -> ScoreReport:
    """Score hypothesis corrections against gold annotations.

    Edits match when span and replacement are both exact. For each
    sentence the annotator with the best sentence-level F_beta is chosen
    (ties to the lowest annotator id), then integer counts pool across
    the corpus and rates divide once at the end. TP and FN carry the gold
    edit's type label; FP edits only exist on the hypothesis side, so
    they are tallied under the hypothesis edit's coarse type.
    """
    total_tp = total_fp = total_fn = 0
    cat_tp: dict[str, int] = {}
    cat_fp: dict[str, int] = {}
    cat_fn: dict[str, int] = {}

    hyp_list = list(hypothesis)
    gold_list = list(gold)
    if len(hyp_list) != len(gold_list):
        raise ScoringError(
            f"hypothesis has {len(hyp_list)} sentences, gold has {len(gold_list)}"
        )
    for hyp, ann in zip(hyp_list, gold_list):
        if hyp.source != ann.source:
            raise ScoringError(
                f"source mismatch at hypothesis id {hyp.id!r} / gold id {ann.id!r}"
            )
        hyp_edits = extract_edits(hyp)
        hyp_keys = {(e.src_span[0], e.src_span[1], e.replacement): e for e in hyp_edits}

        annotators = sorted(ann.edits) or [0]
        best = None
        for annotator in annotators:
            gold_keys = _gold_edit_keys(ann, annotator)
            tp = len(hyp_keys.keys() & gold_keys.keys())
            fp = len(hyp_keys) - tp
            fn = len(gold_keys) - tp
            sentence_f = f_beta(tp, fp, fn, beta)
            if best is None or sentence_f > best[0]:
                best = (sentence_f, annotator, gold_keys, tp, fp, fn)
        assert best is not None
        _, _, gold_keys, tp, fp, fn = best
        total_tp += tp
        total_fp += fp
        total_fn += fn
        for key, etype in gold_keys.items():
            if key in hyp_keys:
                cat_tp[etype] = cat_tp.get(etype, 0) + 1
            else:
                cat_fn[etype] = cat_fn.get(etype, 0) + 1
        for key, edit in hyp_keys.items():
            if key not in gold_keys:
                cat_fp[edit.coarse_type] = cat_fp.get(edit.coarse_type, 0) + 1

    precision = total_tp / (total_tp + total_fp) if total_tp + total_fp else 0.0
    recall = total_tp / (total_tp + total_fn) if total_tp + total_fn else 0.0
    per_category = {}
    for cat in sorted(set(cat_tp) | set(cat_fp) | set(cat_fn)):
        tp = cat_tp.get(cat, 0)
        fp = cat_fp.get(cat, 0)
        fn = cat_fn.get(cat, 0)
        per_category[cat] = CategoryScore(tp, fp, fn, f_beta(tp, fp, fn, beta))
    return ScoreReport(
        total_tp,
        total_fp,
        total_fn,
        precision,
        recall,
        f_beta_from_rates(precision, recall, beta),
        beta,
        per_category,
    )


def error_rate(corpus: Iterable[ParallelExample]) -> float:
    """Fraction of pairs whose sides differ. Empty corpus scores 0.

    Side inequality is exactly "the pair has at least one edit": the
    aligner round-trips, so edits are empty iff the sides already agree.
    """
    total = 0
    errorful = 0
    for pair in corpus:
        total += 1
        errorful += pair.source != pair.target
    return errorful / total if total else 0.0


@dataclass(frozen=True)
class DistributionReport:
    """Reference vs candidate frequencies over the reference's head patterns."""

    top_k: int
    patterns: tuple[ErrorPattern, ...]
    reference_counts: tuple[int, ...]
    candidate_counts: tuple[int, ...]
    cosine: float
    spearman: float

    def as_dict(self) -> dict:
        return {
            "top_k": self.top_k,
            "cosine": self.cosine,
            "spearman": self.spearman,
            "patterns": [
                {
                    "wrong": list(p.wrong),
                    "correct": list(p.correct),
                    "reference_count": rc,
                    "candidate_count": cc,
                }
                for p, rc, cc in zip(
                    self.patterns, self.reference_counts, self.candidate_counts
                )
            ],
        }


def distribution_from_counts(
    reference: PatternPool,
    candidate_counts: Mapping[ErrorPattern, int],
    top_k: int = 100,
) -> DistributionReport:
    """Compare candidate pattern counts against a reference pool.

    The comparison vector runs over the reference pool's ``top_k`` most
    frequent patterns (ties broken lexicographically); candidate patterns
    outside that head are ignored. Cosine of a zero candidate vector is 0;
    Spearman of a constant vector is 0.
    """
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    head = reference.patterns_by_frequency()[:top_k]
    if not head:
        raise ValueError("reference pool is empty")
    ref = np.array([reference.counts[p] for p in head], dtype=float)
    cand = np.array([candidate_counts.get(p, 0) for p in head], dtype=float)

    ref_norm = float(np.linalg.norm(ref))
    cand_norm = float(np.linalg.norm(cand))
    if ref_norm == 0.0 or cand_norm == 0.0:
        cosine = 0.0
    else:
        cosine = float(np.dot(ref, cand) / (ref_norm * cand_norm))

    if len(head) < 2 or np.all(ref == ref[0]) or np.all(cand == cand[0]):
        spearman = 0.0
    else:
        rho = _scipy_stats.spearmanr(ref, cand).statistic
        spearman = 0.0 if math.isnan(rho) else float(rho)

    return DistributionReport(
        top_k=len(head),
        patterns=tuple(head),
        reference_counts=tuple(int(c) for c in ref),
        candidate_counts=tuple(int(c) for c in cand),
        cosine=cosine,
        spearman=spearman,
    )


def distribution_consistency(
    reference: PatternPool,
    candidate: Iterable[ParallelExample],
    top_k: int = 100,
) -> DistributionReport:
    """Re-extract patterns from a candidate corpus and compare to the pool."""
    candidate_pool = build_pool(candidate, reference.n)
    return distribution_from_counts(reference, candidate_pool.counts, top_k)
