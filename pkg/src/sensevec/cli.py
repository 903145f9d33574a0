"""Pipeline driver: annotate -> train -> evaluate, plus inspection tools.

One executable with subcommands; every option can also come from a
``key=value`` config file (``#`` comments allowed), with explicit flags
taking precedence and unknown keys rejected.  Output files are written
atomically (temp file + rename).  Exit status: 0 success, 1 data error,
2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass

from . import annotate as ann
from . import evaluate as ev
from .model import TrainConfig, export_embeddings, train
from .semnet import Lexicon, ParseError, SemanticNetwork, load_lexicon, load_network
from .vocab import build_vocab

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Opt:
    """One subcommand option; ``kind`` None means a boolean flag."""

    name: str
    kind: type | None
    default: object = None
    required: bool = False
    help: str = ""
    choices: tuple | None = None

    @property
    def attr(self) -> str:
        return self.name.replace("-", "_")


_ANNOTATE_OPTS = (
    Opt("corpus", str, required=True, help="raw corpus, one text unit per line"),
    Opt("edges", str, required=True, help="semantic network edge file"),
    Opt("lexicon", str, required=True, help="surface form -> candidate synsets file"),
    Opt("delta", float, default=100.0, help="threshold divisor; higher favors recall"),
    Opt("out", str, required=True, help="annotated corpus output path"),
    Opt("threads", int, default=1, help="worker threads (output order is unaffected)"),
    Opt("stats", str, help="also write corpus statistics to this path"),
)

_STATS_OPTS = (
    Opt("corpus", str, required=True, help="raw corpus, one text unit per line"),
    Opt("edges", str, required=True, help="semantic network edge file"),
    Opt("lexicon", str, required=True, help="surface form -> candidate synsets file"),
    Opt("out", str, help="statistics output path (default: stdout)"),
)

_TRAIN_OPTS = (
    Opt("annotated", str, required=True, help="annotated corpus from the annotate step"),
    Opt("input-mode", str, default="senses", choices=("words", "senses", "both"),
        help="what feeds the hidden layer"),
    Opt("output-mode", str, default="both", choices=("words", "senses", "both"),
        help="what is predicted"),
    Opt("dim", int, default=300, help="embedding dimensionality"),
    Opt("window", int, default=8, help="max context positions each side"),
    Opt("epochs", int, default=5, help="training passes over the corpus"),
    Opt("min-count", int, default=5, help="drop words/senses rarer than this"),
    Opt("lr", float, default=0.025, help="initial learning rate"),
    Opt("threads", int, default=1, help="lock-free workers; >1 is nondeterministic"),
    Opt("seed", int, help="random seed (required with --deterministic)"),
    Opt("deterministic", None, help="pin the context window and run one worker"),
    Opt("subsample", float, default=0.0, help="frequent-word subsampling threshold (0=off)"),
    Opt("out", str, required=True, help="embedding output path"),
)

_EVAL_SIM_OPTS = (
    Opt("vectors", str, required=True, help="embedding file"),
    Opt("lexicon", str, required=True, help="lexicon for candidate senses"),
    Opt("dataset", str, required=True, help="TSV: word1<TAB>word2<TAB>score"),
    Opt("strategy", str, default="closest-sense", choices=("closest-sense", "word"),
        help="compare candidate senses or word vectors directly"),
)

_EVAL_CLUSTER_OPTS = (
    Opt("vectors", str, required=True, help="embedding file"),
    Opt("dataset", str, required=True, help="TSV: synsetId1<TAB>synsetId2<TAB>{0|1}"),
    Opt("gamma", float, default=0.35, help="cluster when cosine exceeds this"),
)

_TUNE_GAMMA_OPTS = (
    Opt("vectors", str, required=True, help="embedding file"),
    Opt("dataset", str, required=True, help="dev TSV: synsetId1<TAB>synsetId2<TAB>{0|1}"),
)

_EVAL_MCS_OPTS = (
    Opt("vectors", str, required=True, help="embedding file"),
    Opt("lexicon", str, required=True, help="lexicon for candidate senses"),
    Opt("dataset", str, required=True, help="TSV: instanceId<TAB>lemma<TAB>gold1,gold2,..."),
)

_NN_OPTS = (
    Opt("vectors", str, required=True, help="embedding file"),
    Opt("label", str, required=True, help="query label (word, or s#<synsetId>)"),
    Opt("k", int, default=10, help="number of neighbors"),
)


@contextmanager
def atomic_output(path: str):
    """Write to a sibling temp file, rename over ``path`` on success."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sensevec-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _read_lines(path: str):
    return open(path, encoding="utf-8")


def _load_network_file(path: str) -> SemanticNetwork:
    with _read_lines(path) as fh:
        return load_network(fh, path=path)


def _load_lexicon_file(path: str, net: SemanticNetwork | None) -> Lexicon:
    with _read_lines(path) as fh:
        return load_lexicon(fh, net, path=path)


def _load_space(vectors_path: str, lexicon_path: str | None = None) -> ev.VectorSpace:
    lex = _load_lexicon_file(lexicon_path, None) if lexicon_path else None
    with _read_lines(vectors_path) as fh:
        labels, matrix = ev.load_embedding_file(fh, path=vectors_path)
    return ev.VectorSpace(labels, matrix, lexicon=lex)


def _print_report(report: ev.EvalReport) -> None:
    print(report.to_table())
    print()
    for line in report.to_keyvalues():
        print(line)


def cmd_annotate(ns: argparse.Namespace) -> int:
    net = _load_network_file(ns.edges)
    lex = _load_lexicon_file(ns.lexicon, net)
    params = ann.ConnectivityParams(delta=ns.delta)
    stats = ann.CorpusStats()
    with _read_lines(ns.corpus) as corpus, atomic_output(ns.out) as out:
        for line in ann.annotate_corpus(corpus, lex, net, params, threads=ns.threads, stats=stats):
            out.write(line + "\n")
    logger.info(
        "annotated %d units (%d tokens, %d mentions)",
        stats.units, stats.tokens, stats.annotated_mentions,
    )
    if ns.stats:
        with atomic_output(ns.stats) as fh:
            for line in stats.to_keyvalues():
                fh.write(line + "\n")
    return 0


def cmd_stats(ns: argparse.Namespace) -> int:
    net = _load_network_file(ns.edges)
    lex = _load_lexicon_file(ns.lexicon, net)
    with _read_lines(ns.corpus) as corpus:
        stats = ann.corpus_stats(corpus, lex)
    lines = stats.to_keyvalues()
    if ns.out:
        with atomic_output(ns.out) as fh:
            for line in lines:
                fh.write(line + "\n")
    else:
        for line in lines:
            print(line)
    return 0


def cmd_train(ns: argparse.Namespace) -> int:
    config = TrainConfig(
        input_mode=ns.input_mode,
        output_mode=ns.output_mode,
        dim=ns.dim,
        window=ns.window,
        lr=ns.lr,
        epochs=ns.epochs,
        min_count=ns.min_count,
        threads=ns.threads,
        seed=ns.seed if ns.seed is not None else 1,
        deterministic=bool(ns.deterministic),
        subsample=ns.subsample,
    )
    with _read_lines(ns.annotated) as fh:
        vocabulary = build_vocab(fh, min_count=config.min_count)
    logger.info("vocabulary: %d words, %d senses", vocabulary.num_words, vocabulary.num_senses)
    with _read_lines(ns.annotated) as fh:
        state = train(fh, vocabulary, config)
    state.assert_finite()
    with atomic_output(ns.out) as fh:
        export_embeddings(state, fh)
    return 0


def cmd_eval_sim(ns: argparse.Namespace) -> int:
    space = _load_space(ns.vectors, ns.lexicon)
    with _read_lines(ns.dataset) as fh:
        dataset = ev.load_similarity_dataset(fh, path=ns.dataset)
    _print_report(ev.eval_similarity(space, dataset, strategy=ns.strategy))
    return 0


def cmd_eval_cluster(ns: argparse.Namespace) -> int:
    space = _load_space(ns.vectors)
    with _read_lines(ns.dataset) as fh:
        dataset = ev.load_clustering_dataset(fh, path=ns.dataset)
    _print_report(ev.sense_clustering(space, dataset, gamma=ns.gamma))
    return 0


def cmd_tune_gamma(ns: argparse.Namespace) -> int:
    space = _load_space(ns.vectors)
    with _read_lines(ns.dataset) as fh:
        dataset = ev.load_clustering_dataset(fh, path=ns.dataset)
    gamma = ev.tune_gamma(space, dataset)
    print(f"best clustering threshold on dev set: {gamma:.2f}")
    print(f"gamma={gamma!r}")
    return 0


def cmd_eval_mcs(ns: argparse.Namespace) -> int:
    space = _load_space(ns.vectors, ns.lexicon)
    with _read_lines(ns.dataset) as fh:
        dataset = ev.load_wsd_dataset(fh, path=ns.dataset)
    _print_report(ev.eval_mcs(space, dataset))
    return 0


def cmd_nn(ns: argparse.Namespace) -> int:
    space = _load_space(ns.vectors)
    try:
        neighbors = ev.nearest_neighbors(space, ns.label, ns.k)
    except KeyError as err:
        raise ValueError(str(err)) from None
    for label, sim in neighbors:
        print(f"{label}\t{sim!r}")
    return 0


COMMANDS = {
    "annotate": (_ANNOTATE_OPTS, cmd_annotate, "attach senses to a raw corpus"),
    "stats": (_STATS_OPTS, cmd_stats, "token and polysemy statistics of a corpus"),
    "train": (_TRAIN_OPTS, cmd_train, "train joint word/sense embeddings"),
    "eval-sim": (_EVAL_SIM_OPTS, cmd_eval_sim, "word similarity benchmark"),
    "eval-cluster": (_EVAL_CLUSTER_OPTS, cmd_eval_cluster, "binary sense clustering"),
    "tune-gamma": (_TUNE_GAMMA_OPTS, cmd_tune_gamma, "grid-search the clustering threshold"),
    "eval-mcs": (_EVAL_MCS_OPTS, cmd_eval_mcs, "most-common-sense WSD scoring"),
    "nn": (_NN_OPTS, cmd_nn, "nearest neighbors of a word or sense"),
}


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="sensevec",
        description="Joint word and sense embeddings: annotate, train, evaluate.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    by_name = {}
    for name, (opts, _, description) in COMMANDS.items():
        sub = subparsers.add_parser(name, help=description, description=description)
        for opt in opts:
            flag = f"--{opt.name}"
            if opt.kind is None:
                sub.add_argument(flag, action="store_true", default=None, help=opt.help)
            else:
                sub.add_argument(
                    flag, type=opt.kind, default=None, choices=opt.choices, help=opt.help
                )
        sub.add_argument("--config", default=None, help="key=value config file")
        by_name[name] = sub
    return parser, by_name


def parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with _read_lines(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or not key:
                raise ParseError("expected 'key=value'", lineno, path)
            values[key] = value
    return values


_TRUE_WORDS = {"true", "1", "yes", "on"}
_FALSE_WORDS = {"false", "0", "no", "off"}


def _merge_options(
    opts: tuple[Opt, ...], ns: argparse.Namespace, sub: argparse.ArgumentParser
) -> argparse.Namespace:
    """Apply CLI-over-config-over-default precedence and validate."""
    config_values = parse_config_file(ns.config) if ns.config else {}
    known = {o.name for o in opts}
    unknown = sorted(set(config_values) - known)
    if unknown:
        sub.error(f"unknown config key(s): {', '.join(unknown)}")
    merged = {}
    for opt in opts:
        value = getattr(ns, opt.attr)
        if value is None and opt.name in config_values:
            raw = config_values[opt.name]
            if opt.kind is None:
                low = raw.lower()
                if low in _TRUE_WORDS:
                    value = True
                elif low in _FALSE_WORDS:
                    value = False
                else:
                    sub.error(f"config key {opt.name}: expected a boolean, got {raw!r}")
            else:
                try:
                    value = opt.kind(raw)
                except ValueError:
                    sub.error(f"config key {opt.name}: invalid {opt.kind.__name__} {raw!r}")
            if opt.choices and value not in opt.choices:
                sub.error(f"config key {opt.name}: must be one of {', '.join(opt.choices)}")
        if value is None:
            value = opt.default
        if value is None and opt.required:
            sub.error(f"missing required option --{opt.name}")
        merged[opt.attr] = value
    return argparse.Namespace(**merged)


def run(argv: list[str] | None = None) -> int:
    parser, by_name = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.print_help(sys.stderr)
        return 2
    opts, handler, _ = COMMANDS[ns.command]
    sub = by_name[ns.command]
    merged = _merge_options(opts, ns, sub)
    if ns.command == "train" and merged.deterministic and merged.seed is None:
        sub.error("--deterministic requires an explicit --seed")
    try:
        return handler(merged)
    except (ParseError, ValueError, FloatingPointError) as err:
        print(f"sensevec {ns.command}: error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"sensevec {ns.command}: error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
