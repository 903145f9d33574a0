"""Semantic network and lexicon: loading, validation and lookup.

The semantic network is an undirected graph of synsets.  The lexicon maps
surface forms (single words or multiword expressions of up to three
``_``-joined tokens) to their candidate synsets.  Both structures are
immutable after loading and safe for concurrent reads.

File formats (UTF-8, tab-separated):

* edge file: ``synsetA<TAB>synsetB`` per line; ``#``-prefixed lines are
  comments, except ``#node<TAB>synsetId`` which declares an isolated synset;
* lexicon file: ``surface_form<TAB>id1,id2,...`` per line.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

__all__ = [
    "ParseError",
    "SemanticNetwork",
    "Lexicon",
    "load_network",
    "load_lexicon",
    "MAX_FORM_TOKENS",
]

# Longest surface form handled anywhere: unigrams, bigrams, trigrams.
MAX_FORM_TOKENS = 3

_FORBIDDEN_ID_CHARS = "|,"


class ParseError(ValueError):
    """Malformed input data, annotated with its source location."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


def _check_synset_id(sid: str, line: int | None = None) -> str:
    if not sid:
        raise ParseError("empty synset id", line)
    if any(ch.isspace() for ch in sid) or any(ch in _FORBIDDEN_ID_CHARS for ch in sid):
        raise ParseError(f"invalid synset id {sid!r} (whitespace, '|' and ',' not allowed)", line)
    return sid


class SemanticNetwork:
    """Undirected, unweighted graph over synsets with O(1) adjacency lookup."""

    def __init__(self) -> None:
        self._adj: dict[str, set[str]] = {}

    def __contains__(self, synset: str) -> bool:
        return synset in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    @property
    def synsets(self) -> Iterable[str]:
        return self._adj.keys()

    @property
    def num_edges(self) -> int:
        return sum(len(neigh) for neigh in self._adj.values()) // 2

    def _add_node(self, synset: str) -> None:
        self._adj.setdefault(synset, set())

    def _add_edge(self, a: str, b: str) -> None:
        self._adj.setdefault(a, set()).add(b)
        self._adj.setdefault(b, set()).add(a)

    def adjacent(self, synset: str) -> set[str]:
        """Neighbors of ``synset``; raises KeyError for unknown synsets."""
        return self._adj[synset]

    def degree(self, synset: str) -> int:
        return len(self._adj[synset])

    def edges(self) -> Iterator[tuple[str, str]]:
        """Each undirected edge exactly once, in sorted order."""
        for a in sorted(self._adj):
            for b in sorted(self._adj[a]):
                if a < b:
                    yield a, b

    def isolated_synsets(self) -> list[str]:
        return sorted(s for s, neigh in self._adj.items() if not neigh)


class Lexicon:
    """Surface form -> ordered candidate synsets, normalized to lowercase."""

    def __init__(self, entries: dict[str, tuple[str, ...]]):
        self._entries = entries

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, form: str) -> bool:
        return form in self._entries

    def forms(self) -> Iterable[str]:
        return self._entries.keys()

    def candidates(self, form: str) -> tuple[str, ...]:
        """Candidate synsets of a normalized joined form (empty if absent)."""
        return self._entries.get(form, ())

    def candidate_synsets(self, tokens: Sequence[str]) -> tuple[str, ...]:
        """Candidate synsets of a 1-3 token sequence, joined with ``_``.

        Tokens are lowercased before lookup; unknown forms give ().
        """
        if not 1 <= len(tokens) <= MAX_FORM_TOKENS:
            raise ValueError(f"expected 1..{MAX_FORM_TOKENS} tokens, got {len(tokens)}")
        return self.candidates("_".join(t.lower() for t in tokens))


def load_network(source: Iterable[str], path: str | None = None) -> SemanticNetwork:
    """Parse an edge stream into a symmetric, self-loop-free network.

    Duplicate edges collapse silently; self-loops and lines without exactly
    two tab-separated fields are rejected with their line number.
    """
    net = SemanticNetwork()
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#node\t"):
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError("expected '#node<TAB>synsetId'", lineno, path)
            net._add_node(_check_synset_id(fields[1], lineno))
            continue
        if line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(
                f"expected 'synsetA<TAB>synsetB', got {len(fields)} field(s)", lineno, path
            )
        a = _check_synset_id(fields[0], lineno)
        b = _check_synset_id(fields[1], lineno)
        if a == b:
            raise ParseError(f"self-loop on {a!r}", lineno, path)
        net._add_edge(a, b)
    return net


def normalize_form(form: str) -> str:
    return form.lower()


def load_lexicon(
    source: Iterable[str],
    net: SemanticNetwork | None,
    path: str | None = None,
) -> Lexicon:
    """Parse a lexicon stream, validating candidates against ``net``.

    Candidate validation is skipped when ``net`` is None (enough for
    evaluation-time use where only the word->senses map is needed).
    Repeated forms merge; duplicate candidates collapse keeping first
    occurrence, so candidate order stays deterministic.
    """
    entries: dict[str, list[str]] = {}
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(
                f"expected 'surface_form<TAB>id1,id2,...', got {len(fields)} field(s)",
                lineno,
                path,
            )
        form = normalize_form(fields[0])
        tokens = form.split("_")
        if len(tokens) > MAX_FORM_TOKENS:
            raise ParseError(
                f"form {fields[0]!r} has {len(tokens)} tokens (at most {MAX_FORM_TOKENS})",
                lineno,
                path,
            )
        if not all(tokens):
            raise ParseError(f"form {fields[0]!r} has an empty token", lineno, path)
        cands = entries.setdefault(form, [])
        for sid in fields[1].split(","):
            _check_synset_id(sid, lineno)
            if net is not None and sid not in net:
                raise ParseError(f"candidate synset {sid!r} not in the network", lineno, path)
            if sid not in cands:
                cands.append(sid)
    return Lexicon({form: tuple(cands) for form, cands in entries.items()})
