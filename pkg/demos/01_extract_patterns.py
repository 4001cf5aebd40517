"""Walk a tiny parallel corpus through edit extraction and pattern pooling.

Alignment finds the token-level edits between each learner sentence and
its correction, and every edit is then widened into n-gram patterns that
keep a little context on both sides. Pooling the patterns over the corpus
gives the frequency table that later drives sampling.
"""

from __future__ import annotations

import os

from gecaug import (
    ParallelExample,
    build_pool,
    extend_to_ngram,
    extract_edits,
    pool_stats,
    save_pool,
)

PAIRS = [
    ("Public transport enables our body to move one place to another .",
     "Public transport enables our body to move from one place to another ."),
    ("He go to school every day .",
     "He goes to school every day ."),
    ("She go to work by bus .",
     "She goes to work by bus ."),
    ("I like read books in evening .",
     "I like reading books in the evening ."),
    ("They was late for a meeting .",
     "They were late for a meeting ."),
    ("We discussed about the plan yesterday .",
     "We discussed the plan yesterday ."),
    ("He go to the gym on weekends .",
     "He goes to the gym on weekends ."),
    ("There is many reasons to stay .",
     "There are many reasons to stay ."),
]

OUT_DIR = "demo_out"


def main() -> None:
    corpus = [
        ParallelExample(tuple(src.split()), tuple(tgt.split()), id=str(i + 1))
        for i, (src, tgt) in enumerate(PAIRS)
    ]

    print("== Edits per sentence ==")
    for pair in corpus:
        edits = extract_edits(pair)
        print(f"[{pair.id}] {' '.join(pair.source)}")
        for e in edits:
            was = " ".join(pair.source[e.src_span[0]:e.src_span[1]]) or "(nothing)"
            now = " ".join(e.replacement) or "(deleted)"
            print(f"     {e.coarse_type:>12} @ {e.src_span}: {was!r} -> {now!r}")

    first = corpus[0]
    edit = extract_edits(first)[0]
    print("\n== Widening one edit into n-gram patterns ==")
    for n in (1, 3, 5):
        pat = extend_to_ngram(edit, first.source, first.target, n)
        print(f"  n={n}: {' '.join(pat.wrong) or '(empty)'}  =>  {' '.join(pat.correct)}")

    print("\n== Pooled patterns at n=3 ==")
    pool = build_pool(corpus, n=3)
    head = sorted(pool.counts.items(), key=lambda kv: (-kv[1], kv[0].wrong, kv[0].correct))
    for pattern, count in head[:10]:
        print(f"  count={count}  {' '.join(pattern.wrong) or '(empty)'}  =>  {' '.join(pattern.correct)}")
    print(f"  stats: {pool_stats(pool)}")

    os.makedirs(OUT_DIR, exist_ok=True)
    path = os.path.join(OUT_DIR, "pool.jsonl")
    rows = save_pool(pool, path)
    print(f"\nWrote {rows} pool rows to {path}")


if __name__ == "__main__":
    main()
