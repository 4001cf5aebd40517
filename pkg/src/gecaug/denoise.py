"""Relabel-based denoising of synthetic corpora.

A generated target can contain its own mistakes. Relabeling feeds each
synthetic source through a corrector and keeps (source, corrector output)
as the training pair, so label quality no longer depends on the
generator. Agreement metadata rides on each pair: whether the corrector
reproduced the generated target, echoed the source, or produced a third
string.
"""

from __future__ import annotations

import json
import os
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from itertools import islice, zip_longest
from typing import Iterable, Iterator

import requests

from ._http import JsonHttpClient, TransportError
from .align import align_tokens, merge_edits
from .corpus import ParallelExample
from .synthesis import SyntheticSample


class CorrectorBackend(ABC):
    """A sentence corrector. Raises TransportError on remote failure."""

    name: str = "abstract"

    @abstractmethod
    def correct_text(self, text: str, request_id: str = "0") -> str:
        raise NotImplementedError


class IdentityCorrector(CorrectorBackend):
    """Returns the input unchanged. Baseline and determinism fixture."""

    name = "identity"

    def correct_text(self, text: str, request_id: str = "0") -> str:
        return text


class OracleCorrector(CorrectorBackend):
    """Inverts planting using recorded spans.

    Built from the synthetic samples themselves: each source string maps
    back to the sentence obtained by restoring every planted pattern's
    correct side at its recorded span. Unknown inputs pass through
    unchanged. Used to verify the plant/unplant round trip.
    """

    name = "oracle"

    def __init__(self, samples: Iterable[SyntheticSample]):
        self._table: dict[str, str] = {}
        for s in samples:
            out = list(s.source)
            for p, (a, b) in sorted(s.planted, key=lambda m: m[1], reverse=True):
                out[a:b] = p.correct
            self._table[" ".join(s.source)] = " ".join(out)

    def correct_text(self, text: str, request_id: str = "0") -> str:
        return self._table.get(text, text)


class HttpCorrector(CorrectorBackend):
    """Client for a correction service.

    Wire shape: POST {"id", "text"} as JSON, response {"text": "..."}.
    Endpoint and bearer token default to GECAUG_CORRECTOR_URL /
    GECAUG_CORRECTOR_TOKEN. Retry policy matches the generator client.
    """

    name = "http"

    def __init__(
        self,
        endpoint: str | None = None,
        auth_token: str | None = None,
        timeout: float = 30.0,
        max_attempts: int = 5,
        backoff_base: float = 0.5,
        session: requests.Session | None = None,
    ):
        endpoint = endpoint or os.environ.get("GECAUG_CORRECTOR_URL")
        if not endpoint:
            raise ValueError(
                "corrector endpoint not configured "
                "(pass endpoint= or set GECAUG_CORRECTOR_URL)"
            )
        auth_token = auth_token or os.environ.get("GECAUG_CORRECTOR_TOKEN")
        self._client = JsonHttpClient(
            endpoint,
            auth_token=auth_token,
            timeout=timeout,
            max_attempts=max_attempts,
            backoff_base=backoff_base,
            session=session,
        )

    def correct_text(self, text: str, request_id: str = "0") -> str:
        body = self._client.post({"id": request_id, "text": text})
        if "text" not in body or not isinstance(body["text"], str):
            raise TransportError("response object has no string 'text'", attempts=1)
        return body["text"]


def completed_from_checkpoint(checkpoint_path) -> int:
    """Pairs already completed according to a checkpoint file (0 if absent)."""
    path = os.fspath(checkpoint_path)
    if not os.path.exists(path):
        return 0
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    completed = obj.get("completed")
    if not isinstance(completed, int) or completed < 0:
        raise ValueError(f"{path}: bad checkpoint, 'completed' must be a non-negative int")
    return completed


def relabel(
    samples: Iterable[SyntheticSample],
    corrector: CorrectorBackend,
    max_in_flight: int = 8,
    checkpoint_path=None,
    checkpoint_every: int = 1000,
) -> Iterator[ParallelExample]:
    """Yield (source, corrector(source)) pairs in input order.

    Corrector calls run in bounded chunks; a chunk either completes or the
    run aborts with the checkpoint recording the last pair actually
    yielded, so a resume can skip exactly that many inputs. The
    checkpoint file is removed when the run finishes. An empty corrector
    reply falls back to the uncorrected source. Meta flags on each pair:
    matches_target (corrector agreed with the generated sentence) and
    matches_source (corrector left the input unchanged).
    """
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be at least 1")
    if checkpoint_every < 1:
        raise ValueError("checkpoint_every must be at least 1")
    checkpoint = os.fspath(checkpoint_path) if checkpoint_path is not None else None
    completed = 0
    last_id = ""

    def write_checkpoint() -> None:
        if checkpoint is None:
            return
        with open(checkpoint, "w", encoding="utf-8") as fh:
            json.dump({"completed": completed, "last_id": last_id}, fh, sort_keys=True)
            fh.write("\n")

    it = iter(samples)
    executor = ThreadPoolExecutor(max_workers=max_in_flight) if max_in_flight > 1 else None
    try:
        while True:
            chunk = list(islice(it, max_in_flight))
            if not chunk:
                break
            try:
                if executor is None:
                    corrected = [
                        corrector.correct_text(" ".join(s.source), s.id) for s in chunk
                    ]
                else:
                    futures = [
                        executor.submit(corrector.correct_text, " ".join(s.source), s.id)
                        for s in chunk
                    ]
                    corrected = [f.result() for f in futures]
            except TransportError:
                write_checkpoint()
                raise
            for s, text in zip(chunk, corrected):
                tokens = tuple(text.split())
                if not tokens:
                    tokens = s.source
                meta = {
                    "matches_target": tokens == s.target,
                    "matches_source": tokens == s.source,
                }
                yield ParallelExample(source=s.source, target=tokens, id=s.id, meta=meta)
                completed += 1
                last_id = s.id
                if checkpoint is not None and completed % checkpoint_every == 0:
                    write_checkpoint()
    finally:
        if executor is not None:
            executor.shutdown(wait=False, cancel_futures=True)
    if checkpoint is not None and os.path.exists(checkpoint):
        os.remove(checkpoint)


def relabel_diff_stats(
    before: Iterable[ParallelExample], after: Iterable[ParallelExample]
) -> dict:
    """Compare a corpus before and after relabeling, aligned by id.

    token_change_rate is the summed edit mass between old and new targets
    (per edit, the larger of source-span length and replacement length)
    divided by the total token count of the old targets.
    """
    pairs = 0
    targets_changed = 0
    changed_mass = 0
    target_tokens = 0
    errorful_before = 0
    errorful_after = 0
    for b, a in zip_longest(before, after):
        if b is None or a is None:
            raise ValueError("corpora differ in length")
        if b.id != a.id:
            raise ValueError(f"id mismatch: {b.id!r} vs {a.id!r}")
        if b.source != a.source:
            raise ValueError(f"source changed for id {b.id!r}; relabel preserves sources")
        pairs += 1
        target_tokens += len(b.target)
        errorful_before += b.source != b.target
        errorful_after += a.source != a.target
        if b.target != a.target:
            targets_changed += 1
            edits = merge_edits(align_tokens(b.target, a.target), b.target, a.target)
            changed_mass += sum(
                max(e.src_span[1] - e.src_span[0], len(e.replacement)) for e in edits
            )
    return {
        "pairs": pairs,
        "targets_changed": targets_changed,
        "target_change_fraction": targets_changed / pairs if pairs else 0.0,
        "token_change_rate": changed_mass / target_tokens if target_tokens else 0.0,
        "errorful_before": errorful_before / pairs if pairs else 0.0,
        "errorful_after": errorful_after / pairs if pairs else 0.0,
    }
