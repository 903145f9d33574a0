"""Evaluation of a trained word/sense vector space.

Covers word similarity (closest-sense and direct word cosine, scored with
Pearson and Spearman correlations), binary sense clustering with a tunable
cosine threshold, most-common-sense selection and its WSD-style scoring,
and nearest-neighbor inspection of the joint space.

Pairs or instances the space cannot cover are excluded and reported, never
silently scored; every report carries its coverage.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import SENSE_LABEL_PREFIX
from .semnet import Lexicon, ParseError

__all__ = [
    "VectorSpace",
    "EvalReport",
    "load_embedding_file",
    "load_similarity_dataset",
    "load_clustering_dataset",
    "load_wsd_dataset",
    "cosine",
    "closest_sense_sim",
    "word_cosine_sim",
    "pearson",
    "spearman",
    "eval_similarity",
    "sense_clustering",
    "tune_gamma",
    "GAMMA_GRID",
    "mcs",
    "eval_mcs",
    "nearest_neighbors",
]

logger = logging.getLogger(__name__)

# clustering-threshold search grid: 0.00, 0.05, ..., 1.00
GAMMA_GRID = tuple(i / 20 for i in range(21))


class VectorSpace:
    """Labelled joint space of word vectors and ``s#``-prefixed sense vectors."""

    def __init__(
        self,
        labels: Sequence[str],
        vectors: np.ndarray,
        lexicon: Lexicon | None = None,
    ):
        if len(labels) != vectors.shape[0]:
            raise ValueError("label count does not match vector count")
        self.labels = list(labels)
        self.vectors = np.asarray(vectors, dtype=np.float64)
        self.index: dict[str, int] = {}
        for i, lab in enumerate(self.labels):
            if lab in self.index:
                raise ValueError(f"duplicate label {lab!r}")
            self.index[lab] = i
        self._norms = np.linalg.norm(self.vectors, axis=1)
        self._candidates: dict[str, list[str]] = {}
        if lexicon is not None:
            for form in lexicon.forms():
                cands = [
                    SENSE_LABEL_PREFIX + sid
                    for sid in lexicon.candidates(form)
                    if SENSE_LABEL_PREFIX + sid in self.index
                ]
                if cands:
                    self._candidates[form] = cands

    def __contains__(self, label: str) -> bool:
        return label in self.index

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, label: str) -> np.ndarray:
        return self.vectors[self.index[label]]

    def word_candidates(self, word: str) -> list[str]:
        """Sense labels of a word's candidate synsets present in the space."""
        return self._candidates.get(word, [])


def load_embedding_file(source: Iterable[str], path: str | None = None) -> tuple[list[str], np.ndarray]:
    """Read the text embedding format: ``count dim`` header, one labelled
    row per line."""
    it = iter(source)
    try:
        header = next(it)
    except StopIteration:
        raise ParseError("empty embedding file", 1, path) from None
    fields = header.split()
    if len(fields) != 2:
        raise ParseError("expected header '<count> <dim>'", 1, path)
    try:
        count, dim = int(fields[0]), int(fields[1])
    except ValueError:
        raise ParseError("expected integer header '<count> <dim>'", 1, path) from None
    labels: list[str] = []
    rows: list[np.ndarray] = []
    for lineno, line in enumerate(it, 2):
        parts = line.rstrip("\n").split(" ")
        if len(parts) != dim + 1:
            raise ParseError(f"expected 1 label + {dim} values, got {len(parts)} fields", lineno, path)
        labels.append(parts[0])
        try:
            rows.append(np.asarray([float(v) for v in parts[1:]], dtype=np.float64))
        except ValueError:
            raise ParseError("non-numeric vector component", lineno, path) from None
    if len(labels) != count:
        raise ParseError(f"header promised {count} rows, found {len(labels)}", None, path)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return labels, matrix


@dataclass
class EvalReport:
    """Metric values plus the coverage bookkeeping behind them."""

    task: str
    metrics: dict[str, float]
    covered: int
    total: int
    excluded: list = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def coverage(self) -> float:
        return self.covered / self.total if self.total else 0.0

    def to_keyvalues(self) -> list[str]:
        lines = [
            f"task={self.task}",
            f"covered={self.covered}",
            f"total={self.total}",
            f"coverage={self.coverage!r}",
        ]
        lines += [f"{key}={float(val)!r}" for key, val in self.metrics.items()]
        return lines

    def to_table(self) -> str:
        width = max(len(k) for k in self.metrics) if self.metrics else 8
        out = [self.task]
        out.append(f"  {'pairs':<{width}}  {self.covered}/{self.total} covered ({100 * self.coverage:.1f}%)")
        for key, val in self.metrics.items():
            out.append(f"  {key:<{width}}  {float(val):.6f}")
        for note in self.notes:
            out.append(f"  note: {note}")
        return "\n".join(out)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity, defined as 0 for zero vectors (untrained rows)."""
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        logger.warning("cosine against a zero vector (untrained entry?); returning 0")
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def closest_sense_sim(space: VectorSpace, w1: str, w2: str) -> float | None:
    """Similarity of two words as the best cosine over their candidate
    sense pairs; None when either word has no candidate senses in space."""
    c1 = space.word_candidates(w1)
    c2 = space.word_candidates(w2)
    if not c1 or not c2:
        return None
    return max(cosine(space.vector(a), space.vector(b)) for a in c1 for b in c2)


def word_cosine_sim(space: VectorSpace, w1: str, w2: str) -> float | None:
    """Plain cosine of two word vectors; None when either is missing."""
    if w1 not in space or w2 not in space:
        return None
    return cosine(space.vector(w1), space.vector(w2))


def _ranks(values: Sequence[float]) -> np.ndarray:
    """Ranks starting at 1, ties carrying the average rank of their run."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr))
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation; constant inputs are an error."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if len(x) != len(y):
        raise ValueError("length mismatch")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        raise ValueError("correlation undefined for constant input")
    return float(dx @ dy) / denom


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation: Pearson over average ranks."""
    return pearson(_ranks(xs), _ranks(ys))


def eval_similarity(
    space: VectorSpace,
    dataset: Sequence[tuple[str, str, float]],
    strategy: str = "closest-sense",
) -> EvalReport:
    """Correlate model similarities with gold scores over covered pairs."""
    if strategy == "closest-sense":
        sim = lambda a, b: closest_sense_sim(space, a, b)
    elif strategy == "word":
        sim = lambda a, b: word_cosine_sim(space, a, b)
    else:
        raise ValueError(f"unknown strategy {strategy!r} (want 'closest-sense' or 'word')")
    gold = []
    scores = []
    excluded = []
    for w1, w2, g in dataset:
        s = sim(w1, w2)
        if s is None:
            excluded.append((w1, w2))
        else:
            gold.append(g)
            scores.append(s)
    if not scores:
        raise ValueError("empty evaluation: no dataset pair is covered by the space")
    metrics = {
        "pearson_r": pearson(scores, gold),
        "spearman_rho": spearman(scores, gold),
    }
    return EvalReport(
        task=f"word-similarity ({strategy})",
        metrics=metrics,
        covered=len(scores),
        total=len(dataset),
        excluded=excluded,
    )


def _clustering_scores(
    space: VectorSpace, dataset: Sequence[tuple[str, str, int]]
) -> tuple[list[float], list[int], list[tuple[str, str]]]:
    sims = []
    labels = []
    excluded = []
    for a, b, gold in dataset:
        la = SENSE_LABEL_PREFIX + a
        lb = SENSE_LABEL_PREFIX + b
        if la not in space or lb not in space:
            excluded.append((a, b))
            continue
        sims.append(cosine(space.vector(la), space.vector(lb)))
        labels.append(int(gold))
    return sims, labels, excluded


def _f_measure(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f


def sense_clustering(
    space: VectorSpace,
    dataset: Sequence[tuple[str, str, int]],
    gamma: float = 0.35,
) -> EvalReport:
    """Cluster synset pairs whose cosine exceeds ``gamma``; score against
    gold binary labels.

    Accuracy is reported over covered pairs and, since exclusions count as
    misses, over all pairs too.  Precision/recall/F cover the positive
    (cluster) class and reconstruct exactly from the reported confusion
    counts.
    """
    sims, labels, excluded = _clustering_scores(space, dataset)
    if not sims:
        raise ValueError("empty evaluation: no dataset pair is covered by the space")
    tp = fp = fn = tn = 0
    for s, gold in zip(sims, labels):
        predicted = s > gamma
        if predicted and gold:
            tp += 1
        elif predicted:
            fp += 1
        elif gold:
            fn += 1
        else:
            tn += 1
    precision, recall, f = _f_measure(tp, fp, fn)
    covered = len(sims)
    metrics = {
        "accuracy": (tp + tn) / covered,
        "accuracy_all_pairs": (tp + tn) / len(dataset),
        "precision": precision,
        "recall": recall,
        "f_measure": f,
        "gamma": gamma,
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "tn": tn,
    }
    return EvalReport(
        task="sense-clustering",
        metrics=metrics,
        covered=covered,
        total=len(dataset),
        excluded=excluded,
    )


def tune_gamma(space: VectorSpace, dev_dataset: Sequence[tuple[str, str, int]]) -> float:
    """Grid-search the clustering threshold maximizing F on a dev set.

    Scans 0.00..1.00 in 0.05 steps; ties go to the smallest threshold.
    """
    sims, labels, _ = _clustering_scores(space, dev_dataset)
    if not sims:
        raise ValueError("empty dev set: no pair is covered by the space")
    best_gamma = GAMMA_GRID[0]
    best_f = -1.0
    for gamma in GAMMA_GRID:
        tp = fp = fn = 0
        for s, gold in zip(sims, labels):
            predicted = s > gamma
            if predicted and gold:
                tp += 1
            elif predicted:
                fp += 1
            elif gold:
                fn += 1
        _, _, f = _f_measure(tp, fp, fn)
        if f > best_f:
            best_f = f
            best_gamma = gamma
    return best_gamma


def mcs(space: VectorSpace, word: str) -> str | None:
    """Most common sense: the candidate closest to the word's own vector.

    Ties keep the first candidate in lexicon order; None when the word
    vector or all candidate vectors are missing.
    """
    if word not in space:
        return None
    candidates = space.word_candidates(word)
    if not candidates:
        return None
    wv = space.vector(word)
    best = candidates[0]
    best_sim = cosine(wv, space.vector(best))
    for cand in candidates[1:]:
        sim = cosine(wv, space.vector(cand))
        if sim > best_sim:
            best = cand
            best_sim = sim
    return best


def eval_mcs(
    space: VectorSpace,
    dataset: Sequence[tuple[str, str, frozenset[str]]],
) -> EvalReport:
    """Score most-common-sense picks against gold synset sets.

    Precision is over attempted instances, recall over all instances, and
    F combines the two; uncovered lemmas are excluded and reported.
    """
    attempted = 0
    correct = 0
    excluded = []
    for instance_id, lemma, gold in dataset:
        label = mcs(space, lemma)
        if label is None:
            excluded.append(instance_id)
            continue
        attempted += 1
        if label[len(SENSE_LABEL_PREFIX):] in gold:
            correct += 1
    total = len(dataset)
    precision = correct / attempted if attempted else 0.0
    recall = correct / total if total else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    metrics = {
        "precision": precision,
        "recall": recall,
        "f_measure": f,
        "attempted": attempted,
        "correct": correct,
    }
    return EvalReport(
        task="mcs-wsd",
        metrics=metrics,
        covered=attempted,
        total=total,
        excluded=excluded,
    )


def nearest_neighbors(space: VectorSpace, label: str, k: int) -> list[tuple[str, float]]:
    """Top-k labels by cosine over the whole joint space, query excluded."""
    if label not in space:
        raise KeyError(f"label {label!r} not in space")
    qi = space.index[label]
    v = space.vectors[qi]
    nv = np.linalg.norm(v)
    sims = space.vectors @ v
    denom = space._norms * nv
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(denom > 0, sims / np.where(denom > 0, denom, 1.0), 0.0)
    order = np.argsort(-sims, kind="stable")
    out = []
    for i in order:
        if i == qi:
            continue
        out.append((space.labels[i], float(sims[i])))
        if len(out) == k:
            break
    return out


def load_similarity_dataset(
    source: Iterable[str], path: str | None = None
) -> list[tuple[str, str, float]]:
    """TSV rows ``word1<TAB>word2<TAB>score``; words lowercased."""
    rows = []
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", lineno, path)
        try:
            score = float(fields[2])
        except ValueError:
            raise ParseError(f"non-numeric gold score {fields[2]!r}", lineno, path) from None
        if not math.isfinite(score):
            raise ParseError("gold score must be finite", lineno, path)
        rows.append((fields[0].lower(), fields[1].lower(), score))
    return rows


def load_clustering_dataset(
    source: Iterable[str], path: str | None = None
) -> list[tuple[str, str, int]]:
    """TSV rows ``synsetId1<TAB>synsetId2<TAB>{0|1}``."""
    rows = []
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", lineno, path)
        if fields[2] not in ("0", "1"):
            raise ParseError(f"gold label must be 0 or 1, got {fields[2]!r}", lineno, path)
        if not fields[0] or not fields[1]:
            raise ParseError("empty synset id", lineno, path)
        rows.append((fields[0], fields[1], int(fields[2])))
    return rows


def load_wsd_dataset(
    source: Iterable[str], path: str | None = None
) -> list[tuple[str, str, frozenset[str]]]:
    """TSV rows ``instanceId<TAB>lemma<TAB>gold1,gold2,...``; lemmas lowercased."""
    rows = []
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", lineno, path)
        gold = frozenset(g for g in fields[2].split(",") if g)
        if not gold:
            raise ParseError("empty gold sense set", lineno, path)
        rows.append((fields[0], fields[1].lower(), gold))
    return rows
