"""Shallow word-sense connectivity: attach senses to words in running text.

Each text unit (one input line) is scanned for lexicon mentions (unigrams,
bigrams and trigrams).  Every candidate synset of every mention is scored by
how many distinct synsets it connects to, inside the unit's candidate pool,
through the semantic network; only connections to candidates of *other*
mentions count.  A mention keeps its top-scoring candidates when their score
clears the pool-size-dependent threshold; overlapping mentions are resolved
in favor of better-connected, then longer, then leftmost ones.

Annotated output format, one unit per line: tokens separated by single
spaces, an annotated mention rendered ``form|id1,id2`` with multiword forms
joined by ``_``, all other tokens bare.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

from .semnet import MAX_FORM_TOKENS, Lexicon, ParseError, SemanticNetwork

__all__ = [
    "ConnectivityParams",
    "Mention",
    "ScoredSense",
    "AnnotatedUnit",
    "CorpusStats",
    "tokenize",
    "extract_mentions",
    "candidate_pool",
    "connection_threshold",
    "score_sense",
    "resolve_overlaps",
    "connect",
    "render_unit",
    "parse_annotated_line",
    "render_annotated_tokens",
    "annotate_corpus",
    "corpus_stats",
]


@dataclass(frozen=True)
class ConnectivityParams:
    """Knobs of the connectivity annotator.

    ``delta`` controls the minimum-connections threshold: larger values
    lower the threshold and favor recall, smaller values favor precision.
    """

    delta: float = 100.0
    max_ngram: int = MAX_FORM_TOKENS

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 1 <= self.max_ngram <= MAX_FORM_TOKENS:
            raise ValueError(f"max_ngram must be in 1..{MAX_FORM_TOKENS}")


@dataclass(frozen=True)
class Mention:
    """A lexicon hit covering tokens [start, end) of a unit."""

    start: int
    end: int
    form: str
    candidates: tuple[str, ...]

    @property
    def length(self) -> int:
        return self.end - self.start


class ScoredSense(NamedTuple):
    sense: str
    n: int


@dataclass
class AnnotatedUnit:
    """A unit's tokens plus the sense sets attached to selected mentions.

    ``annotations`` holds (mention, senses) pairs sorted by start position,
    only for mentions that received at least one sense; their spans never
    overlap.  All senses attached to one mention share the same connection
    count.
    """

    tokens: list[str]
    annotations: list[tuple[Mention, tuple[str, ...]]] = field(default_factory=list)


def tokenize(line: str) -> list[str]:
    """Lowercase and split on whitespace; no other normalization.

    Tokens containing ``|`` or ``,`` would corrupt the annotated output
    format and are rejected.
    """
    tokens = line.lower().split()
    for tok in tokens:
        if "|" in tok or "," in tok:
            raise ParseError(f"token {tok!r} contains a reserved character ('|' or ',')")
    return tokens


def extract_mentions(tokens: Sequence[str], lex: Lexicon, max_ngram: int = MAX_FORM_TOKENS) -> list[Mention]:
    """All n-gram lexicon hits (n <= max_ngram), overlaps included.

    Mentions are ordered by (start, length); each qualifying span appears
    exactly once.
    """
    mentions = []
    for start in range(len(tokens)):
        for n in range(1, min(max_ngram, len(tokens) - start) + 1):
            form = "_".join(tokens[start : start + n])
            cands = lex.candidates(form)
            if cands:
                mentions.append(Mention(start, start + n, form, cands))
    return mentions


def candidate_pool(mentions: Iterable[Mention]) -> set[str]:
    """Distinct union of all mentions' candidate synsets."""
    pool: set[str] = set()
    for m in mentions:
        pool.update(m.candidates)
    return pool


def connection_threshold(pool_size: int, unit_len: int, params: ConnectivityParams) -> float:
    """Minimum connections a sense must have to be attached to its mention."""
    if unit_len < 1:
        raise ValueError("unit must contain at least one token")
    return (pool_size + unit_len) / (2.0 * params.delta)


def score_sense(
    sense: str,
    owner: Mention,
    mentions: Sequence[Mention],
    net: SemanticNetwork,
) -> ScoredSense:
    """Connection count of one candidate sense of ``owner``.

    Counts distinct synsets adjacent to ``sense`` in the network that are
    candidates of at least one mention other than ``owner``; synsets that
    appear only among the owner's own candidates never count.
    """
    if sense not in owner.candidates:
        raise ValueError(f"{sense!r} is not a candidate of mention {owner.form!r}")
    others: set[str] = set()
    for m in mentions:
        if m is not owner:
            others.update(m.candidates)
    adjacency = net.adjacent(sense) if sense in net else set()
    if len(adjacency) <= len(others):
        n = sum(1 for s in adjacency if s in others)
    else:
        n = sum(1 for s in others if s in adjacency)
    return ScoredSense(sense, n)


def resolve_overlaps(scored_mentions: Sequence[tuple[Mention, int]]) -> list[Mention]:
    """Greedy selection of non-overlapping mentions.

    Repeatedly keeps the mention with the highest best connection count,
    breaking ties by longer span and then leftmost start, and drops every
    mention sharing a token with it.  Input pairs carry each mention's
    maximum count over its candidates.
    """
    order = sorted(scored_mentions, key=lambda mn: (-mn[1], -mn[0].length, mn[0].start))
    taken: list[Mention] = []
    covered: set[int] = set()
    for mention, _ in order:
        span = range(mention.start, mention.end)
        if any(i in covered for i in span):
            continue
        taken.append(mention)
        covered.update(span)
    taken.sort(key=lambda m: m.start)
    return taken


def connect(
    tokens: Sequence[str],
    lex: Lexicon,
    net: SemanticNetwork,
    params: ConnectivityParams | None = None,
) -> AnnotatedUnit:
    """Attach to each mention its most connected candidate senses.

    Every extracted mention contributes candidates to the pool that defines
    both the threshold and the connection counts; mentions dropped by
    overlap resolution still contribute but emit no annotations.  A mention
    keeps all candidates tied at the maximal count when that count meets
    the threshold, otherwise nothing.
    """
    params = params or ConnectivityParams()
    tokens = list(tokens)
    if not tokens:
        return AnnotatedUnit([])
    mentions = extract_mentions(tokens, lex, params.max_ngram)
    if not mentions:
        return AnnotatedUnit(tokens)

    # owners: candidate synset -> indices of the mentions carrying it
    owners: dict[str, list[int]] = {}
    for i, m in enumerate(mentions):
        for s in m.candidates:
            owners.setdefault(s, []).append(i)

    theta = connection_threshold(len(owners), len(tokens), params)

    scores: list[list[int]] = []
    for i, m in enumerate(mentions):
        row = []
        for s in m.candidates:
            adjacency = net.adjacent(s) if s in net else set()
            n = 0
            if len(adjacency) <= len(owners):
                for nb in adjacency:
                    ow = owners.get(nb)
                    if ow is not None and (len(ow) > 1 or ow[0] != i):
                        n += 1
            else:
                for nb, ow in owners.items():
                    if nb in adjacency and (len(ow) > 1 or ow[0] != i):
                        n += 1
            row.append(n)
        scores.append(row)

    best = [max(row) for row in scores]
    survivors = resolve_overlaps(list(zip(mentions, best)))

    annotations = []
    index_of = {id(m): i for i, m in enumerate(mentions)}
    for m in survivors:
        i = index_of[id(m)]
        top = best[i]
        if top >= theta:
            senses = tuple(s for s, n in zip(m.candidates, scores[i]) if n == top)
            annotations.append((m, senses))
    return AnnotatedUnit(tokens, annotations)


def render_unit(unit: AnnotatedUnit) -> str:
    """Serialize one annotated unit to its line format."""
    parts = []
    ann = {m.start: (m, senses) for m, senses in unit.annotations}
    pos = 0
    while pos < len(unit.tokens):
        hit = ann.get(pos)
        if hit is not None:
            mention, senses = hit
            parts.append(mention.form + "|" + ",".join(senses))
            pos = mention.end
        else:
            parts.append(unit.tokens[pos])
            pos += 1
    return " ".join(parts)


def parse_annotated_line(line: str, lineno: int | None = None) -> list[tuple[str, tuple[str, ...]]]:
    """Parse one annotated line into (form, senses) pairs.

    Annotated multiword mentions stay single positions with their tokens
    ``_``-joined, mirroring how they train.
    """
    out = []
    for tok in line.split():
        if "|" in tok:
            form, _, senses = tok.partition("|")
            if not form or not senses:
                raise ParseError(f"malformed annotated token {tok!r}", lineno)
            ids = tuple(senses.split(","))
            if not all(ids):
                raise ParseError(f"malformed sense list in {tok!r}", lineno)
            out.append((form, ids))
        else:
            out.append((tok, ()))
    return out


def render_annotated_tokens(positions: Iterable[tuple[str, tuple[str, ...]]]) -> str:
    """Inverse of :func:`parse_annotated_line`."""
    return " ".join(f + ("|" + ",".join(s) if s else "") for f, s in positions)


@dataclass
class CorpusStats:
    """Token and polysemy statistics gathered while scanning a corpus.

    ``content_tokens`` counts unigram tokens with at least one candidate
    synset; tokens without candidates are excluded from the average
    polysemy degree.
    """

    units: int = 0
    tokens: int = 0
    content_tokens: int = 0
    candidate_sum: int = 0
    annotated_mentions: int = 0
    attached_senses: int = 0

    @property
    def avg_polysemy(self) -> float:
        """Mean candidate count over content tokens; 0.0 when none exist."""
        if self.content_tokens == 0:
            return 0.0
        return self.candidate_sum / self.content_tokens

    @property
    def has_content(self) -> bool:
        return self.content_tokens > 0

    def add_unit(self, tokens: Sequence[str], lex: Lexicon) -> None:
        self.units += 1
        self.tokens += len(tokens)
        for tok in tokens:
            k = len(lex.candidates(tok))
            if k > 0:
                self.content_tokens += 1
                self.candidate_sum += k

    def to_keyvalues(self) -> list[str]:
        lines = [
            f"units={self.units}",
            f"tokens={self.tokens}",
            f"content_tokens={self.content_tokens}",
            f"avg_polysemy={self.avg_polysemy!r}",
            f"avg_polysemy_defined={'true' if self.has_content else 'false'}",
            f"annotated_mentions={self.annotated_mentions}",
            f"attached_senses={self.attached_senses}",
        ]
        return lines


def _annotate_line(
    numbered: tuple[int, str],
    lex: Lexicon,
    net: SemanticNetwork,
    params: ConnectivityParams,
) -> tuple[str, list[str], int, int]:
    lineno, raw = numbered
    try:
        tokens = tokenize(raw)
    except ParseError as err:
        raise ParseError(str(err), lineno) from None
    unit = connect(tokens, lex, net, params)
    n_senses = sum(len(senses) for _, senses in unit.annotations)
    return render_unit(unit), tokens, len(unit.annotations), n_senses


def annotate_corpus(
    lines: Iterable[str],
    lex: Lexicon,
    net: SemanticNetwork,
    params: ConnectivityParams | None = None,
    threads: int = 1,
    stats: CorpusStats | None = None,
) -> Iterator[str]:
    """Annotate a corpus line by line, preserving input order.

    Yields one annotated line per input line.  With ``threads > 1`` units
    are scored in a worker pool; the output order and bytes are identical
    to a single-threaded run.  When given, ``stats`` accumulates corpus
    statistics during the same pass.
    """
    params = params or ConnectivityParams()
    numbered = enumerate(lines, 1)

    def emit(result: tuple[str, list[str], int, int]) -> str:
        rendered, tokens, n_mentions, n_senses = result
        if stats is not None:
            stats.add_unit(tokens, lex)
            stats.annotated_mentions += n_mentions
            stats.attached_senses += n_senses
        return rendered

    if threads <= 1:
        for item in numbered:
            yield emit(_annotate_line(item, lex, net, params))
        return

    # Bounded window of in-flight futures: parallel scoring, ordered output,
    # constant memory on arbitrarily long streams.
    window: deque = deque()
    with ThreadPoolExecutor(max_workers=threads) as executor:
        for item in numbered:
            window.append(executor.submit(_annotate_line, item, lex, net, params))
            if len(window) >= threads * 16:
                yield emit(window.popleft().result())
        while window:
            yield emit(window.popleft().result())


def corpus_stats(lines: Iterable[str], lex: Lexicon) -> CorpusStats:
    """Token count and average polysemy degree of a raw corpus."""
    stats = CorpusStats()
    for lineno, raw in enumerate(lines, 1):
        try:
            tokens = tokenize(raw)
        except ParseError as err:
            raise ParseError(str(err), lineno) from None
        stats.add_unit(tokens, lex)
    return stats
