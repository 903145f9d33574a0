"""Joint training of word and sense embeddings in one vector space.

The trainer extends CBOW: each target position predicts its word and/or its
attached senses (hierarchical softmax over separate word and sense Huffman
trees) from a hidden state pooled over the surrounding words and/or their
attached senses.  When one side is absent from the input layer it is kept in
step through virtual connections: with words-only input every context
word's senses receive that word's exact update, with senses-only input every
context word receives the mean of its senses' updates.

All parameters are float64.  A deterministic single-worker mode pins the
context window width and makes runs bit-reproducible; multi-worker training
updates shared matrices without locks and is nondeterministic by design.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.special import expit

from .annotate import parse_annotated_line
from .huffman import HuffmanTree, build_huffman
from .vocab import Vocabulary

__all__ = [
    "SENSE_LABEL_PREFIX",
    "INPUT_MODES",
    "OUTPUT_MODES",
    "TrainConfig",
    "TrainingInstance",
    "ModelState",
    "init_state",
    "hs_log_prob",
    "corpus_units",
    "make_instances",
    "instance_gradients",
    "train_step",
    "train",
    "export_embeddings",
]

logger = logging.getLogger(__name__)

SENSE_LABEL_PREFIX = "s#"

INPUT_MODES = ("words", "senses", "both")
OUTPUT_MODES = ("words", "senses", "both")

# lr never decays below this fraction of its initial value
LR_FLOOR_FRACTION = 1e-4


@dataclass
class TrainConfig:
    """Training hyperparameters; defaults follow the best-performing setup
    (senses in the input layer, words and senses in the output layer)."""

    input_mode: str = "senses"
    output_mode: str = "both"
    dim: int = 300
    window: int = 8
    lr: float = 0.025
    epochs: int = 5
    min_count: int = 5
    threads: int = 1
    seed: int = 1
    deterministic: bool = False
    subsample: float = 0.0

    def __post_init__(self) -> None:
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"input_mode must be one of {INPUT_MODES}")
        if self.output_mode not in OUTPUT_MODES:
            raise ValueError(f"output_mode must be one of {OUTPUT_MODES}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.subsample < 0:
            raise ValueError("subsample must be >= 0")


@dataclass
class TrainingInstance:
    """One target position with its context, target excluded from context."""

    target_word: int
    target_senses: tuple[int, ...]
    context_words: list[int]
    context_senses: list[tuple[int, ...]]


@dataclass
class ModelState:
    """Vocabularies, Huffman trees and all trainable matrices."""

    vocab: Vocabulary
    word_tree: HuffmanTree
    sense_tree: HuffmanTree | None
    word_in: np.ndarray
    sense_in: np.ndarray
    word_out: np.ndarray
    sense_out: np.ndarray
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.word_in.shape[1]

    def assert_finite(self) -> None:
        for name in ("word_in", "sense_in", "word_out", "sense_out"):
            mat = getattr(self, name)
            if mat.size and not np.isfinite(mat).all():
                raise FloatingPointError(f"non-finite values in {name}")


def init_state(vocab: Vocabulary, config: TrainConfig) -> ModelState:
    """Fresh model state: seeded uniform input rows, zero output rows.

    Input rows are drawn uniformly from [-0.5/dim, +0.5/dim], word matrix
    first and sense matrix second from the same generator, so a seed pins
    the full initialization.
    """
    d = config.dim
    rng = np.random.default_rng(config.seed)
    word_in = rng.uniform(-0.5 / d, 0.5 / d, (vocab.num_words, d))
    if vocab.num_senses:
        sense_in = rng.uniform(-0.5 / d, 0.5 / d, (vocab.num_senses, d))
        sense_tree = build_huffman(vocab.sense_counts)
    else:
        sense_in = np.zeros((0, d))
        sense_tree = None
    word_tree = build_huffman(vocab.word_counts)
    word_out = np.zeros((word_tree.num_internal, d))
    sense_out = np.zeros((sense_tree.num_internal if sense_tree else 0, d))
    return ModelState(vocab, word_tree, sense_tree, word_in, sense_in, word_out, sense_out)


def hs_log_prob(
    target_index: int,
    tree: HuffmanTree,
    hidden: np.ndarray,
    output_matrix: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Hierarchical-softmax log-probability of one leaf given a hidden state.

    Returns ``(log_prob, grad_hidden, points, node_grads)`` where ``points``
    are the touched output-matrix rows and ``node_grads[j]`` is the gradient
    of the log-probability w.r.t. row ``points[j]``.  The probability is a
    product of sigmoid branch decisions along the leaf's path, so summing
    ``exp(log_prob)`` over all leaves gives exactly 1.
    """
    points = tree.points[target_index]
    code = tree.codes[target_index]
    if len(points) == 0:
        # single-leaf tree: probability 1
        return 0.0, np.zeros(len(hidden)), points, np.zeros((0, len(hidden)))
    nodes = output_matrix[points]
    x = nodes @ hidden
    sign = 1.0 - 2.0 * code
    log_prob = -np.logaddexp(0.0, -sign * x).sum()
    g = 1.0 - code - expit(x)  # d log_prob / d x, per node
    grad_hidden = g @ nodes
    node_grads = np.outer(g, hidden)
    return float(log_prob), grad_hidden, points, node_grads


def corpus_units(annotated_lines: Iterable[str], vocab: Vocabulary) -> list[list[tuple[int, tuple[int, ...]]]]:
    """Annotated corpus -> per-unit position lists of vocabulary indices.

    Positions whose word fell below the count cutoff are dropped entirely
    (word2vec convention); out-of-vocabulary senses are stripped from the
    positions that carried them.
    """
    units = []
    w_index = vocab.word_index
    s_index = vocab.sense_index
    for lineno, line in enumerate(annotated_lines, 1):
        positions = []
        for form, senses in parse_annotated_line(line, lineno):
            wi = w_index.get(form)
            if wi is None:
                continue
            si = tuple(s_index[s] for s in senses if s in s_index)
            positions.append((wi, si))
        units.append(positions)
    return units


def make_instances(
    positions: Sequence[tuple[int, tuple[int, ...]]],
    window: int,
    rng: np.random.Generator | None = None,
    deterministic: bool = False,
) -> Iterator[TrainingInstance]:
    """One training instance per position of a unit.

    The context spans ``b`` positions each side of the target, with ``b``
    drawn uniformly from [1, window] per target; deterministic mode pins
    ``b = window``.  The target word and its senses are never part of the
    context.
    """
    n = len(positions)
    for t in range(n):
        if deterministic or rng is None:
            b = window
        else:
            b = int(rng.integers(1, window + 1))
        lo = max(0, t - b)
        hi = min(n, t + b + 1)
        ctx_words = []
        ctx_senses = []
        for j in range(lo, hi):
            if j == t:
                continue
            wi, si = positions[j]
            ctx_words.append(wi)
            ctx_senses.append(si)
        wt, st = positions[t]
        yield TrainingInstance(wt, st, ctx_words, ctx_senses)


def _forward(instance: TrainingInstance, state: ModelState, config: TrainConfig):
    """Pooled hidden state, instance loss and raw log-prob gradients.

    Returns None when the instance has no effective input or no target
    under the configured modes.  ``grad_hidden`` accumulates the gradient
    of the total log-likelihood across every target; ``pending`` carries
    the per-target output-row gradients, all evaluated at the current
    parameters.
    """
    mode = config.input_mode
    if mode == "senses":
        w_rows: list[int] = []
    else:
        w_rows = instance.context_words
    if mode == "words":
        s_rows: list[int] = []
    else:
        s_rows = [s for senses in instance.context_senses for s in senses]
    k = len(w_rows) + len(s_rows)
    if k == 0:
        return None

    out_mode = config.output_mode
    targets: list[tuple[HuffmanTree, np.ndarray, str, int]] = []
    if out_mode != "senses":
        targets.append((state.word_tree, state.word_out, "word_out", instance.target_word))
    if out_mode != "words" and state.sense_tree is not None:
        for s in instance.target_senses:
            targets.append((state.sense_tree, state.sense_out, "sense_out", s))
    if not targets:
        return None

    acc = np.zeros(state.dim)
    if w_rows:
        acc += state.word_in[w_rows].sum(axis=0)
    if s_rows:
        acc += state.sense_in[s_rows].sum(axis=0)
    h = acc / k

    loss = 0.0
    grad_hidden = np.zeros(state.dim)
    pending = []  # (matrix_name, points, node_grads) per target
    for tree, out, name, leaf in targets:
        log_prob, gh, points, node_grads = hs_log_prob(leaf, tree, h, out)
        loss -= log_prob
        grad_hidden += gh
        if len(points):
            pending.append((name, points, node_grads))
    return h, k, w_rows, s_rows, loss, grad_hidden, pending


def instance_gradients(
    instance: TrainingInstance, state: ModelState, config: TrainConfig
) -> tuple[float, dict[tuple[str, int], np.ndarray]] | None:
    """Analytic gradient of the instance loss w.r.t. every touched row.

    Keys are ``(matrix_name, row)``; rows touched by several targets (or by
    repeated context entries) accumulate.  Virtual-connection updates are
    deliberately absent: they are update rules layered on top of these
    gradients, not part of the loss.
    """
    fw = _forward(instance, state, config)
    if fw is None:
        return None
    h, k, w_rows, s_rows, loss, grad_hidden, pending = fw
    grads: dict[tuple[str, int], np.ndarray] = {}

    def accumulate(key: tuple[str, int], value: np.ndarray) -> None:
        if key in grads:
            grads[key] = grads[key] + value
        else:
            grads[key] = value.copy()

    for name, points, node_grads in pending:
        for j, row in enumerate(points):
            accumulate((name, int(row)), -node_grads[j])
    grad_input = -grad_hidden / k
    for row in w_rows:
        accumulate(("word_in", row), grad_input)
    for row in s_rows:
        accumulate(("sense_in", row), grad_input)
    return loss, grads


def train_step(
    instance: TrainingInstance,
    state: ModelState,
    config: TrainConfig,
    lr: float,
) -> float | None:
    """One SGD step; returns the instance loss, or None when skipped.

    The hidden-state gradient is accumulated over all targets, split
    equally over the contributing input vectors, then mirrored across the
    virtual word-sense connections required by the input mode.
    """
    fw = _forward(instance, state, config)
    if fw is None:
        return None
    h, k, w_rows, s_rows, loss, grad_hidden, pending = fw

    for name, points, node_grads in pending:
        getattr(state, name)[points] += lr * node_grads
    delta = (lr / k) * grad_hidden

    word_in = state.word_in
    sense_in = state.sense_in
    mode = config.input_mode
    if mode == "words":
        for row in w_rows:
            word_in[row] += delta
        # virtual connection: senses follow their word's exact delta
        for senses in instance.context_senses:
            for s in senses:
                sense_in[s] += delta
    elif mode == "senses":
        for row in s_rows:
            sense_in[row] += delta
        # virtual connection: word follows the mean of its senses' deltas,
        # which coincides with delta since every contributor receives it
        for wi, senses in zip(instance.context_words, instance.context_senses):
            if senses:
                word_in[wi] += delta
    else:
        for row in w_rows:
            word_in[row] += delta
        for row in s_rows:
            sense_in[row] += delta
    return loss


def _subsample_unit(
    unit: list[tuple[int, tuple[int, ...]]],
    keep_prob: np.ndarray,
    rng: np.random.Generator,
) -> list[tuple[int, tuple[int, ...]]]:
    return [p for p in unit if keep_prob[p[0]] >= 1.0 or rng.random() < keep_prob[p[0]]]


def train(
    annotated_lines: Iterable[str],
    vocab: Vocabulary,
    config: TrainConfig | None = None,
) -> ModelState:
    """Train a model over an annotated corpus.

    Runs ``epochs`` passes of :func:`train_step` with the learning rate
    decaying linearly over globally processed positions down to a floor of
    ``1e-4 * lr``.  Mean per-epoch losses land in ``state.epoch_losses``.
    With ``threads > 1`` workers update the shared matrices without locks
    and the result is nondeterministic.
    """
    config = config or TrainConfig()
    state = init_state(vocab, config)
    units = [u for u in corpus_units(annotated_lines, vocab) if u]
    positions_per_epoch = sum(len(u) for u in units)
    total = positions_per_epoch * config.epochs
    if total == 0:
        return state

    keep_prob = None
    if config.subsample > 0:
        # word2vec-style frequency cut: common words are randomly dropped
        freq = state.vocab.word_counts / positions_per_epoch
        ratio = config.subsample / np.maximum(freq, 1e-12)
        keep_prob = np.sqrt(ratio) + ratio

    lr0 = config.lr
    lr_floor = lr0 * LR_FLOOR_FRACTION
    processed = [0]  # shared across workers; racy updates tolerated

    def run_worker(worker_id: int, shard: list, loss_out: list[tuple[float, int]]) -> None:
        rng = np.random.default_rng((config.seed, worker_id))
        for _ in range(config.epochs):
            loss_sum = 0.0
            steps = 0
            for unit in shard:
                if keep_prob is not None:
                    unit = _subsample_unit(unit, keep_prob, rng)
                for inst in make_instances(unit, config.window, rng, config.deterministic):
                    lr = lr0 * (1.0 - processed[0] / total)
                    if lr < lr_floor:
                        lr = lr_floor
                    processed[0] += 1
                    loss = train_step(inst, state, config, lr)
                    if loss is not None:
                        loss_sum += loss
                        steps += 1
            loss_out.append((loss_sum, steps))

    if config.threads == 1:
        records: list[tuple[float, int]] = []
        run_worker(0, units, records)
        epoch_records = [[rec] for rec in records]
    else:
        shards = [units[w :: config.threads] for w in range(config.threads)]
        outs: list[list[tuple[float, int]]] = [[] for _ in shards]
        workers = [
            threading.Thread(target=run_worker, args=(w, shard, outs[w]))
            for w, shard in enumerate(shards)
        ]
        for t in workers:
            t.start()
        for t in workers:
            t.join()
        # each worker appends one record per epoch, in epoch order
        epoch_records = [list(slots) for slots in zip(*outs)]

    for slots in epoch_records:
        loss_sum = sum(ls for ls, _ in slots)
        steps = sum(st for _, st in slots)
        state.epoch_losses.append(loss_sum / steps if steps else 0.0)
        logger.info("epoch %d mean loss %.6f", len(state.epoch_losses), state.epoch_losses[-1])
    return state


def export_embeddings(state: ModelState, out) -> None:
    """Write input-layer vectors as text: header ``count dim``, then one
    ``label v1 ... v_dim`` row per entry, senses prefixed ``s#``.

    Values use ``repr`` so a reload reproduces them exactly.  ``out`` is a
    path or a text file object.
    """
    if hasattr(out, "write"):
        _write_embeddings(state, out)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            _write_embeddings(state, fh)


def _write_embeddings(state: ModelState, fh) -> None:
    vocab = state.vocab
    fh.write(f"{vocab.num_words + vocab.num_senses} {state.dim}\n")
    for i, label in enumerate(vocab.words):
        fh.write(label + " " + " ".join(repr(float(v)) for v in state.word_in[i]) + "\n")
    for i, label in enumerate(vocab.senses):
        fh.write(
            SENSE_LABEL_PREFIX + label + " "
            + " ".join(repr(float(v)) for v in state.sense_in[i]) + "\n"
        )
