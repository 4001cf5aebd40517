from __future__ import annotations

import json
import threading
from pathlib import Path

import pytest

from gecaug import (
    CorrectorBackend,
    HttpCorrector,
    IdentityCorrector,
    OracleCorrector,
    ParallelExample,
    StubGenerator,
    TransportError,
    completed_from_checkpoint,
    relabel,
    relabel_diff_stats,
    synthesize,
)

from _server import ScriptedServer
from conftest import insertion_pool


def _corpus(count: int = 30, error_rate: float = 0.7):
    samples, _ = synthesize(
        insertion_pool(10), count, StubGenerator(seed=3), base_seed=9, error_rate=error_rate
    )
    return samples


def test_identity_relabel():
    samples = _corpus()
    pairs = list(relabel(samples, IdentityCorrector()))
    assert len(pairs) == len(samples)
    for s, ex in zip(samples, pairs):
        assert ex.id == s.id
        assert ex.source == s.source
        assert ex.target == s.source
        assert ex.meta == {
            "matches_target": s.source == s.target,
            "matches_source": True,
        }


def test_oracle_relabel_recovers_targets():
    samples = _corpus(50)
    pairs = list(relabel(samples, OracleCorrector(samples)))
    for s, ex in zip(samples, pairs):
        assert ex.target == s.target
        assert ex.meta["matches_target"] is True
        assert ex.meta["matches_source"] == (s.source == s.target)


def test_relabel_third_string_flags():
    class Shouting(CorrectorBackend):
        name = "loud"

        def correct_text(self, text: str, request_id: str = "0") -> str:
            return text.upper() + " EXTRA"

    samples = _corpus(10)
    for ex in relabel(samples, Shouting()):
        assert ex.meta == {"matches_target": False, "matches_source": False}


def test_relabel_empty_reply_falls_back_to_source():
    class Silent(CorrectorBackend):
        name = "silent"

        def correct_text(self, text: str, request_id: str = "0") -> str:
            return "  "

    samples = _corpus(5)
    for s, ex in zip(samples, relabel(samples, Silent())):
        assert ex.target == s.source
        assert ex.meta["matches_source"] is True


class FlakyCorrector(CorrectorBackend):
    """Succeeds until the configured call number, then raises once forever."""

    name = "flaky"

    def __init__(self, fail_from: int):
        self.fail_from = fail_from
        self.calls = 0
        self._lock = threading.Lock()

    def correct_text(self, text: str, request_id: str = "0") -> str:
        with self._lock:
            self.calls += 1
            if self.calls >= self.fail_from:
                raise TransportError("synthetic outage", attempts=5)
        return text


def test_relabel_checkpoint_abort_and_resume(tmp_path: Path):
    samples = _corpus(10)
    checkpoint = tmp_path / "relabel.ckpt"
    got = []
    with pytest.raises(TransportError):
        for ex in relabel(
            samples,
            FlakyCorrector(fail_from=6),
            max_in_flight=1,
            checkpoint_path=checkpoint,
            checkpoint_every=2,
        ):
            got.append(ex)
    assert len(got) == 5
    assert completed_from_checkpoint(checkpoint) == 5
    state = json.loads(checkpoint.read_text(encoding="utf-8"))
    assert state == {"completed": 5, "last_id": samples[4].id}

    skip = completed_from_checkpoint(checkpoint)
    rest = list(
        relabel(
            samples[skip:],
            IdentityCorrector(),
            max_in_flight=1,
            checkpoint_path=checkpoint,
        )
    )
    assert not checkpoint.exists()
    full = list(relabel(samples, IdentityCorrector()))
    assert got + rest == full


def test_relabel_checkpoint_records_chunk_boundary(tmp_path: Path):
    samples = _corpus(12)
    checkpoint = tmp_path / "relabel.ckpt"
    got = []
    with pytest.raises(TransportError):
        for ex in relabel(
            samples,
            FlakyCorrector(fail_from=6),
            max_in_flight=4,
            checkpoint_path=checkpoint,
        ):
            got.append(ex)
    # The second chunk of four failed, so exactly one full chunk was yielded.
    assert len(got) == 4
    assert completed_from_checkpoint(checkpoint) == 4


def test_relabel_checkpoint_removed_on_success(tmp_path: Path):
    samples = _corpus(6)
    checkpoint = tmp_path / "relabel.ckpt"
    list(
        relabel(
            samples, IdentityCorrector(), checkpoint_path=checkpoint, checkpoint_every=1
        )
    )
    assert not checkpoint.exists()


def test_completed_from_checkpoint_validation(tmp_path: Path):
    path = tmp_path / "none.ckpt"
    assert completed_from_checkpoint(path) == 0
    path.write_text("{broken", encoding="utf-8")
    with pytest.raises(ValueError):
        completed_from_checkpoint(path)
    path.write_text('{"completed": -3}', encoding="utf-8")
    with pytest.raises(ValueError):
        completed_from_checkpoint(path)
    path.write_text('{"completed": "five"}', encoding="utf-8")
    with pytest.raises(ValueError):
        completed_from_checkpoint(path)


def test_relabel_argument_validation():
    with pytest.raises(ValueError):
        list(relabel([], IdentityCorrector(), max_in_flight=0))
    with pytest.raises(ValueError):
        list(relabel([], IdentityCorrector(), checkpoint_every=0))


def test_relabel_diff_stats_hand_case():
    before = [ParallelExample(("a", "b", "c"), ("a", "b", "c"), id="0")]
    after = [ParallelExample(("a", "b", "c"), ("a", "x", "c"), id="0")]
    stats = relabel_diff_stats(before, after)
    assert stats == {
        "pairs": 1,
        "targets_changed": 1,
        "target_change_fraction": 1.0,
        "token_change_rate": pytest.approx(1 / 3),
        "errorful_before": 0.0,
        "errorful_after": 1.0,
    }


def test_relabel_diff_stats_identity_vs_oracle():
    samples = _corpus(40)
    before = list(relabel(samples, IdentityCorrector()))
    after = list(relabel(samples, OracleCorrector(samples)))
    stats = relabel_diff_stats(before, after)
    errorful = sum(s.source != s.target for s in samples)
    assert stats["pairs"] == 40
    assert stats["targets_changed"] == errorful
    assert stats["errorful_before"] == 0.0
    assert stats["errorful_after"] == pytest.approx(errorful / 40)


def test_relabel_diff_stats_validation():
    a = [ParallelExample(("a",), ("a",), id="0")]
    with pytest.raises(ValueError):
        relabel_diff_stats(a, [])
    with pytest.raises(ValueError):
        relabel_diff_stats(a, [ParallelExample(("a",), ("a",), id="1")])
    with pytest.raises(ValueError):
        relabel_diff_stats(a, [ParallelExample(("b",), ("b",), id="0")])
    empty = relabel_diff_stats([], [])
    assert empty["pairs"] == 0 and empty["token_change_rate"] == 0.0


def test_http_corrector_wire_shape():
    with ScriptedServer([(200, {"text": "fixed sentence"})]) as server:
        corrector = HttpCorrector(endpoint=server.url, auth_token="tok")
        assert corrector.correct_text("broken sentence", request_id="r1") == "fixed sentence"
    assert server.requests[0] == {"id": "r1", "text": "broken sentence"}
    assert server.headers[0].get("Authorization") == "Bearer tok"


def test_http_corrector_env_and_errors(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.delenv("GECAUG_CORRECTOR_URL", raising=False)
    with pytest.raises(ValueError):
        HttpCorrector()
    with ScriptedServer([(500, {}), (200, {"text": "ok then"})]) as server:
        monkeypatch.setenv("GECAUG_CORRECTOR_URL", server.url)
        corrector = HttpCorrector(backoff_base=0.001)
        assert corrector.correct_text("x") == "ok then"
        assert len(server.requests) == 2
    with ScriptedServer([(200, {"nope": 1})]) as server:
        corrector = HttpCorrector(endpoint=server.url)
        with pytest.raises(TransportError):
            corrector.correct_text("x")
