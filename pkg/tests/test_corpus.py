from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from gecaug import (
    AnnotatedExample,
    GoldEdit,
    MalformedLine,
    ParallelExample,
    SchemaError,
    SpanOutOfBounds,
    apply_gold_edits,
    jsonl_line,
    read_jsonl,
    read_m2,
    read_pairs,
    read_parallel_tsv,
    write_jsonl,
    write_m2,
    write_parallel_tsv,
)

from conftest import random_pair


def test_parallel_example_validates_tokens():
    ex = ParallelExample(("He", "go", "."), ("He", "goes", "."), id="x")
    assert ex.source == ("He", "go", ".")
    with pytest.raises(ValueError):
        ParallelExample((), ("a",), id="x")
    with pytest.raises(ValueError):
        ParallelExample(("a",), ("a", ""), id="x")
    with pytest.raises(ValueError):
        ParallelExample(("a b",), ("a",), id="x")


def test_parallel_example_coerces_lists():
    ex = ParallelExample(["a", "b"], ["a"], id="1")
    assert isinstance(ex.source, tuple) and isinstance(ex.target, tuple)


def test_tsv_round_trip(tmp_path: Path):
    path = tmp_path / "pairs.tsv"
    pairs = [
        ParallelExample(
            ("They", "are", "coming", "the", "city", "center", "."),
            ("They", "are", "coming", "from", "the", "city", "center", "."),
            id="1",
        ),
        ParallelExample(("I", "goes", "."), ("I", "go", "."), id="2"),
    ]
    assert write_parallel_tsv(pairs, path) == 2
    back = list(read_parallel_tsv(path))
    assert [ex.source for ex in back] == [ex.source for ex in pairs]
    assert [ex.target for ex in back] == [ex.target for ex in pairs]
    assert [ex.id for ex in back] == ["1", "2"]


def test_tsv_rejects_ragged_rows(tmp_path: Path):
    path = tmp_path / "bad.tsv"
    path.write_text("a b\tc d\textra\n", encoding="utf-8")
    with pytest.raises(MalformedLine) as err:
        list(read_parallel_tsv(path))
    assert err.value.line_no == 1
    assert str(path) in str(err.value)


def test_tsv_rejects_empty_side(tmp_path: Path):
    path = tmp_path / "bad.tsv"
    path.write_text("good line\tok\n\tok\n", encoding="utf-8")
    with pytest.raises(MalformedLine) as err:
        list(read_parallel_tsv(path))
    assert err.value.line_no == 2


def test_tsv_rejects_double_space(tmp_path: Path):
    path = tmp_path / "bad.tsv"
    path.write_text("a  b\tc\n", encoding="utf-8")
    with pytest.raises(MalformedLine):
        list(read_parallel_tsv(path))


def test_tsv_rejects_invalid_utf8(tmp_path: Path):
    path = tmp_path / "bad.tsv"
    path.write_bytes(b"a\tb\n\xff\xfe\tc\n")
    with pytest.raises(MalformedLine):
        list(read_parallel_tsv(path))


def test_gold_edit_validates_span():
    with pytest.raises(ValueError):
        GoldEdit(3, 2, "R:OTHER", ("x",))
    with pytest.raises(ValueError):
        GoldEdit(-1, 0, "R:OTHER", ("x",))


def test_apply_gold_edits_right_to_left():
    source = ("He", "go", "to", "school", "yesterday", ".")
    edits = [
        GoldEdit(1, 2, "R:VERB:SVA", ("goes",)),
        GoldEdit(4, 5, "U:ADV", ()),
    ]
    assert apply_gold_edits(source, edits) == ("He", "goes", "to", "school", ".")
    # Insertion at a point after a replacement, applied in one call.
    edits = [GoldEdit(0, 0, "M:DET", ("The",)), GoldEdit(1, 2, "R:VERB", ("went",))]
    assert apply_gold_edits(("he", "go", ".")[:3], edits) == ("The", "he", "went", ".")


def test_annotated_example_rejects_bad_edits():
    source = ("a", "b", "c")
    with pytest.raises(ValueError):
        AnnotatedExample(source, {0: (GoldEdit(2, 4, "X", ("y",)),)})
    with pytest.raises(ValueError):
        AnnotatedExample(
            source,
            {0: (GoldEdit(1, 3, "X", ("y",)), GoldEdit(2, 3, "X", ("z",)))},
        )


def test_m2_parse_block(tmp_path: Path):
    path = tmp_path / "gold.m2"
    path.write_text(
        "S He go to school .\n"
        "A 1 2|||R:VERB:SVA|||goes|||REQUIRED|||-NONE-|||0\n"
        "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||1\n"
        "\n"
        "S I like apple .\n"
        "A 2 3|||R:NOUN:NUM|||apples|||REQUIRED|||-NONE-|||0\n",
        encoding="utf-8",
    )
    blocks = list(read_m2(path))
    assert len(blocks) == 2
    first = blocks[0]
    assert first.id == "0"
    assert first.source == ("He", "go", "to", "school", ".")
    assert set(first.edits) == {0, 1}
    assert first.edits[1] == ()
    edit = first.edits[0][0]
    assert (edit.start, edit.end, edit.type, edit.correction) == (1, 2, "R:VERB:SVA", ("goes",))
    assert apply_gold_edits(first.source, first.edits[0]) == ("He", "goes", "to", "school", ".")
    assert blocks[1].id == "1"


def test_m2_deletion_uses_none_marker(tmp_path: Path):
    path = tmp_path / "gold.m2"
    path.write_text(
        "S He go to to school .\n"
        "A 2 3|||U:PREP|||-NONE-|||REQUIRED|||-NONE-|||0\n",
        encoding="utf-8",
    )
    block = next(read_m2(path))
    assert block.edits[0][0].correction == ()
    assert apply_gold_edits(block.source, block.edits[0]) == ("He", "go", "to", "school", ".")


def test_m2_round_trip_structure_and_bytes(tmp_path: Path):
    examples = [
        AnnotatedExample(
            ("He", "go", "to", "school", "."),
            {
                0: (GoldEdit(1, 2, "R:VERB:SVA", ("goes",)),),
                2: (),
                1: (GoldEdit(0, 1, "R:PRON", ("She",)), GoldEdit(3, 4, "R:NOUN", ("work",))),
            },
            id="0",
        ),
        AnnotatedExample(("All", "good", "."), {0: ()}, id="1"),
    ]
    path = tmp_path / "out.m2"
    assert write_m2(examples, path) == 2
    back = list(read_m2(path))
    assert [b.source for b in back] == [e.source for e in examples]
    assert [b.edits for b in back] == [e.edits for e in examples]
    path2 = tmp_path / "again.m2"
    write_m2(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_m2_rejects_wrong_field_count(tmp_path: Path):
    path = tmp_path / "bad.m2"
    path.write_text("S a b\nA 0 1|||X|||y|||REQUIRED|||0\n", encoding="utf-8")
    with pytest.raises(MalformedLine) as err:
        list(read_m2(path))
    assert "6" in err.value.reason


def test_m2_rejects_span_out_of_bounds(tmp_path: Path):
    path = tmp_path / "bad.m2"
    path.write_text(
        "S a b\nA 1 3|||X|||y|||REQUIRED|||-NONE-|||0\n", encoding="utf-8"
    )
    with pytest.raises(SpanOutOfBounds) as err:
        list(read_m2(path))
    assert err.value.line_no == 2


def test_m2_rejects_half_noop(tmp_path: Path):
    path = tmp_path / "bad.m2"
    path.write_text(
        "S a b\nA -1 -1|||X|||y|||REQUIRED|||-NONE-|||0\n", encoding="utf-8"
    )
    with pytest.raises(MalformedLine):
        list(read_m2(path))
    path.write_text(
        "S a b\nA 0 1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n", encoding="utf-8"
    )
    with pytest.raises(MalformedLine):
        list(read_m2(path))


def test_m2_rejects_noop_mixed_with_edits(tmp_path: Path):
    path = tmp_path / "bad.m2"
    path.write_text(
        "S a b\n"
        "A 0 1|||X|||y|||REQUIRED|||-NONE-|||0\n"
        "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n",
        encoding="utf-8",
    )
    with pytest.raises(MalformedLine):
        list(read_m2(path))


def test_m2_rejects_junk_and_orphan_lines(tmp_path: Path):
    path = tmp_path / "bad.m2"
    path.write_text("T not a real line\n", encoding="utf-8")
    with pytest.raises(MalformedLine):
        list(read_m2(path))
    path.write_text("A 0 1|||X|||y|||REQUIRED|||-NONE-|||0\n", encoding="utf-8")
    with pytest.raises(MalformedLine):
        list(read_m2(path))


def test_m2_block_without_annotations(tmp_path: Path):
    path = tmp_path / "gold.m2"
    path.write_text("S a b .\n\nS c d .\n", encoding="utf-8")
    blocks = list(read_m2(path))
    assert len(blocks) == 2
    assert blocks[0].edits == {}


def test_jsonl_round_trip_with_meta(tmp_path: Path):
    path = tmp_path / "pairs.jsonl"
    pairs = [
        ParallelExample(("a", "b"), ("a", "c"), id="p1", meta={"flag": True}),
        ParallelExample(("x",), ("x",), id="p2"),
    ]
    assert write_jsonl(pairs, path) == 2
    back = list(read_jsonl(path))
    assert back[0].meta == {"flag": True}
    assert back[1].meta is None
    assert [b.id for b in back] == ["p1", "p2"]
    assert [b.source for b in back] == [p.source for p in pairs]


def test_jsonl_line_is_canonical():
    ex = ParallelExample(("a",), ("b",), id="z", meta={"b": 1, "a": 2})
    row = jsonl_line(ex)
    assert row == '{"id": "z", "meta": {"a": 2, "b": 1}, "source": "a", "target": "b"}'


def test_jsonl_append_mode(tmp_path: Path):
    path = tmp_path / "pairs.jsonl"
    write_jsonl([ParallelExample(("a",), ("b",), id="1")], path)
    write_jsonl([ParallelExample(("c",), ("d",), id="2")], path, append=True)
    assert [ex.id for ex in read_jsonl(path)] == ["1", "2"]


def test_jsonl_ignores_unknown_keys(tmp_path: Path):
    path = tmp_path / "pairs.jsonl"
    path.write_text(
        json.dumps({"id": "1", "source": "a", "target": "b", "extra": [1, 2]}) + "\n",
        encoding="utf-8",
    )
    ex = next(read_jsonl(path))
    assert ex.source == ("a",)


def test_jsonl_schema_errors(tmp_path: Path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "1", "source": "a"}\n', encoding="utf-8")
    with pytest.raises(SchemaError):
        list(read_jsonl(path))
    path.write_text('{"id": 1, "source": "a", "target": "b"}\n', encoding="utf-8")
    with pytest.raises(SchemaError):
        list(read_jsonl(path))
    path.write_text('{"id": "1", "source": "a", "target": "b", "meta": 3}\n', encoding="utf-8")
    with pytest.raises(SchemaError):
        list(read_jsonl(path))
    path.write_text('["not", "an", "object"]\n', encoding="utf-8")
    with pytest.raises(SchemaError):
        list(read_jsonl(path))


def test_jsonl_malformed_errors(tmp_path: Path):
    path = tmp_path / "bad.jsonl"
    path.write_text("{not json\n", encoding="utf-8")
    with pytest.raises(MalformedLine) as err:
        list(read_jsonl(path))
    assert err.value.line_no == 1
    path.write_text('{"id": "1", "source": "a  b", "target": "c"}\n', encoding="utf-8")
    with pytest.raises(MalformedLine):
        list(read_jsonl(path))


def test_read_pairs_dispatch(tmp_path: Path):
    tsv = tmp_path / "x.tsv"
    write_parallel_tsv([ParallelExample(("a",), ("b",), id="1")], tsv)
    jl = tmp_path / "x.jsonl"
    write_jsonl([ParallelExample(("c",), ("d",), id="1")], jl)
    assert next(read_pairs(tsv)).source == ("a",)
    assert next(read_pairs(jl)).source == ("c",)
    with pytest.raises(ValueError):
        read_pairs(tmp_path / "x.txt")


def test_jsonl_fuzz_round_trip(tmp_path: Path):
    rng = random.Random(20260818)
    pairs = []
    for i in range(500):
        ex = random_pair(rng)
        meta = {"k": rng.randint(0, 9)} if rng.random() < 0.5 else None
        pairs.append(ParallelExample(ex.source, ex.target, id=f"r{i}", meta=meta))
    path = tmp_path / "fuzz.jsonl"
    write_jsonl(pairs, path)
    back = list(read_jsonl(path))
    assert back == pairs
    # A second write of what was read is byte-identical.
    path2 = tmp_path / "fuzz2.jsonl"
    write_jsonl(back, path2)
    assert path.read_bytes() == path2.read_bytes()
