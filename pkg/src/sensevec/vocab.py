"""Vocabulary over an annotated corpus: words and senses, counted and cut.

Words and senses live in disjoint namespaces with their own dense index
ranges.  Multiword mentions count once under their ``_``-joined form; every
sense occurrence attached to a mention counts for that sense.  Entries are
ordered by descending count (ties by label) so indices are reproducible.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable

import numpy as np

from .annotate import parse_annotated_line

__all__ = ["Vocabulary", "build_vocab"]


class Vocabulary:
    """Indexed word and sense inventories with corpus counts."""

    def __init__(
        self,
        word_counts: dict[str, int],
        sense_counts: dict[str, int],
        min_count: int,
    ):
        def ordered(counts: dict[str, int]) -> list[str]:
            return sorted(counts, key=lambda lab: (-counts[lab], lab))

        self.min_count = min_count
        self.words: list[str] = ordered(word_counts)
        self.senses: list[str] = ordered(sense_counts)
        self.word_counts = np.asarray([word_counts[w] for w in self.words], dtype=np.int64)
        self.sense_counts = np.asarray([sense_counts[s] for s in self.senses], dtype=np.int64)
        self.word_index: dict[str, int] = {w: i for i, w in enumerate(self.words)}
        self.sense_index: dict[str, int] = {s: i for i, s in enumerate(self.senses)}

    @property
    def num_words(self) -> int:
        return len(self.words)

    @property
    def num_senses(self) -> int:
        return len(self.senses)

    def __repr__(self) -> str:
        return f"Vocabulary(words={self.num_words}, senses={self.num_senses}, min_count={self.min_count})"


def build_vocab(annotated_lines: Iterable[str], min_count: int = 5) -> Vocabulary:
    """Count words and senses in an annotated corpus and apply the cutoff.

    Entries below ``min_count`` are dropped; senses dropped here simply
    disappear from training.  An empty corpus (no tokens at all) is an
    error, as is a cutoff that eliminates every word.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    word_counts: Counter[str] = Counter()
    sense_counts: Counter[str] = Counter()
    for lineno, line in enumerate(annotated_lines, 1):
        for form, senses in parse_annotated_line(line, lineno):
            word_counts[form] += 1
            for sid in senses:
                sense_counts[sid] += 1
    if not word_counts:
        raise ValueError("empty corpus: no tokens found")
    kept_words = {w: c for w, c in word_counts.items() if c >= min_count}
    kept_senses = {s: c for s, c in sense_counts.items() if c >= min_count}
    if not kept_words:
        raise ValueError(
            f"min_count={min_count} removed every word (most frequent count: "
            f"{max(word_counts.values())})"
        )
    return Vocabulary(kept_words, kept_senses, min_count)
