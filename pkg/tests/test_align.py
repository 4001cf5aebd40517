from __future__ import annotations

import itertools
import random

from gecaug import (
    AlignOp,
    ParallelExample,
    align_tokens,
    alignment_cost,
    apply_edits,
    extract_edits,
    merge_edits,
    substitution_cost,
)

from _oracles import oracle_alignment_cost
from conftest import random_pair


def _reconstruct(source, target, ops):
    """Replay an op sequence and check it tiles both sentences exactly."""
    i = j = 0
    for op in ops:
        assert op.src_span[0] == i and op.tgt_span[0] == j
        i, j = op.src_span[1], op.tgt_span[1]
    assert (i, j) == (len(source), len(target))


def test_insertion_example():
    pair = ParallelExample(
        ("They", "are", "coming", "the", "city", "center", "."),
        ("They", "are", "coming", "from", "the", "city", "center", "."),
        id="t",
    )
    edits = extract_edits(pair)
    assert len(edits) == 1
    edit = edits[0]
    assert edit.src_span == (3, 3)
    assert edit.replacement == ("from",)
    assert edit.tgt_span == (3, 4)
    assert edit.coarse_type == "insertion"
    assert apply_edits(pair.source, edits) == pair.target


def test_identical_pair_has_no_edits():
    pair = ParallelExample(("a", "b", "c"), ("a", "b", "c"), id="t")
    assert extract_edits(pair) == []
    ops = align_tokens(pair.source, pair.target)
    assert all(op.kind == "match" for op in ops)


def test_substitution_cost_tiers():
    assert substitution_cost("The", "the") == 1.0
    assert substitution_cost("walked", "walks") == 1.5
    assert substitution_cost("cat", "why") == 2.0
    # Similarity is LCS over max length: "ab" in "abxy" gives 0.5 exactly.
    assert substitution_cost("ab", "abxy") == 1.5


def test_costs_for_simple_pairs():
    assert alignment_cost(("a",), ("a",)) == 0.0
    assert alignment_cost(("a",), ()) == 1.0
    assert alignment_cost((), ("a",)) == 1.0
    assert alignment_cost(("The",), ("the",)) == 1.0
    assert alignment_cost(("walked",), ("walks",)) == 1.5
    assert alignment_cost(("cat",), ("why",)) == 2.0


def test_equal_cost_prefers_single_substitution():
    # Substituting a dissimilar token costs 2.0, the same as delete+insert;
    # the tie resolves to one substitute op.
    ops = align_tokens(("cat",), ("why",))
    assert [op.kind for op in ops] == ["substitute"]


def test_transposition_of_adjacent_tokens():
    ops = align_tokens(("a", "b"), ("b", "a"))
    assert ops == [AlignOp("transpose", (0, 2), (0, 2))]
    assert alignment_cost(("a", "b"), ("b", "a")) == 1.5


def test_transposition_is_case_sensitive():
    # {A, b} and {b, a} differ as multisets, so no transposition window
    # applies and the cheapest route is delete+insert around the match.
    assert alignment_cost(("A", "b"), ("b", "a")) == 2.0
    kinds = [op.kind for op in align_tokens(("A", "b"), ("b", "a"))]
    assert "transpose" not in kinds


def test_three_token_reversal_uses_wide_window():
    # Reversing three tokens costs 2.5 as one k=3 transposition; every
    # insert/delete route costs at least 3.
    assert alignment_cost(("a", "b", "c"), ("c", "b", "a")) == 2.5
    ops = align_tokens(("a", "b", "c"), ("c", "b", "a"))
    assert AlignOp("transpose", (0, 3), (0, 3)) in ops


def test_rotation_prefers_insert_delete_over_wide_transposition():
    # Rotating three tokens can be done with one insert and one delete
    # (cost 2.0), cheaper than a k=3 transposition (2.5).
    assert alignment_cost(("a", "b", "c"), ("c", "a", "b")) == 2.0
    kinds = [op.kind for op in align_tokens(("a", "b", "c"), ("c", "a", "b"))]
    assert "transpose" not in kinds


def test_transposition_skipped_when_window_is_equal():
    # ("x", "x") against ("x", "x") is multiset-equal but also
    # sequence-equal, so it must align as two matches, never a transpose.
    ops = align_tokens(("x", "x"), ("x", "x"))
    assert [op.kind for op in ops] == ["match", "match"]


def test_adjacent_operations_merge_into_one_edit():
    pair = ParallelExample(("a", "b", "c"), ("a", "x", "y", "c"), id="t")
    edits = extract_edits(pair)
    assert len(edits) == 1
    assert edits[0].src_span == (1, 2)
    assert edits[0].replacement == ("x", "y")
    assert edits[0].coarse_type == "substitution"


def test_coarse_types():
    ins = extract_edits(ParallelExample(("a", "c"), ("a", "b", "c"), id="t"))[0]
    assert ins.coarse_type == "insertion"
    dele = extract_edits(ParallelExample(("a", "b", "c"), ("a", "c"), id="t"))[0]
    assert dele.coarse_type == "deletion"
    sub = extract_edits(ParallelExample(("a", "b", "c"), ("a", "x", "c"), id="t"))[0]
    assert sub.coarse_type == "substitution"
    swap = extract_edits(ParallelExample(("a", "b"), ("b", "a"), id="t"))[0]
    assert swap.coarse_type == "substitution"
    assert swap.replacement == ("b", "a")


def test_merge_drops_vacuous_runs():
    # Defensive path: a hand-built op list that "substitutes" a token with
    # itself must not surface as an edit.
    ops = [AlignOp("substitute", (0, 1), (0, 1))]
    assert merge_edits(ops, ["a"], ["a"]) == []


def test_ops_tile_both_sentences():
    rng = random.Random(7)
    for _ in range(300):
        pair = random_pair(rng)
        ops = align_tokens(pair.source, pair.target)
        _reconstruct(pair.source, pair.target, ops)


def test_round_trip_fuzz():
    rng = random.Random(11)
    for _ in range(2000):
        pair = random_pair(rng)
        edits = extract_edits(pair)
        assert apply_edits(pair.source, edits) == pair.target
        for e in edits:
            assert tuple(pair.source[e.src_span[0]:e.src_span[1]]) != e.replacement


def test_edits_are_sorted_and_disjoint():
    rng = random.Random(13)
    for _ in range(500):
        pair = random_pair(rng)
        edits = extract_edits(pair)
        prev_end = -1
        for e in edits:
            # Touching edits would have merged, so consecutive spans are
            # separated by at least one matched token.
            assert e.src_span[0] > prev_end
            prev_end = e.src_span[1]


def test_cost_matches_oracle_exhaustive_tiny():
    vocab = ("a", "b", "A")
    sentences = [()]
    for length in (1, 2):
        sentences.extend(itertools.product(vocab, repeat=length))
    for src in sentences:
        for tgt in sentences:
            got = alignment_cost(src, tgt)
            want = oracle_alignment_cost(src, tgt)
            assert got == want, f"{src} vs {tgt}: {got} != {want}"


def test_cost_matches_oracle_random():
    rng = random.Random(17)
    vocab = ("a", "b", "c", "A", "ab", "t1", "t2")
    for _ in range(400):
        src = tuple(rng.choice(vocab) for _ in range(rng.randint(0, 5)))
        tgt = tuple(rng.choice(vocab) for _ in range(rng.randint(0, 5)))
        got = alignment_cost(src, tgt)
        want = oracle_alignment_cost(src, tgt)
        assert got == want, f"{src} vs {tgt}: {got} != {want}"


def test_apply_edits_empty_is_identity():
    tokens = ("a", "b", "c")
    assert apply_edits(tokens, []) == tokens
