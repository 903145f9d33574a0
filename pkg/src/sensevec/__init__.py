"""sensevec: joint word and sense embeddings from text and a semantic network.

The pipeline has three stages, usable as a library or via the ``sensevec``
command:

1. :mod:`sensevec.annotate` attaches candidate senses from a semantic
   network to words in running text, keeping the senses that are most
   connected within each text unit;
2. :mod:`sensevec.model` trains word and sense embeddings jointly in one
   vector space with an extended CBOW model under hierarchical softmax;
3. :mod:`sensevec.evaluate` measures the space on word similarity, sense
   clustering and most-common-sense selection.
"""

from .annotate import (
    AnnotatedUnit,
    ConnectivityParams,
    CorpusStats,
    Mention,
    annotate_corpus,
    connect,
    corpus_stats,
)
from .evaluate import (
    EvalReport,
    VectorSpace,
    closest_sense_sim,
    eval_mcs,
    eval_similarity,
    mcs,
    nearest_neighbors,
    pearson,
    sense_clustering,
    spearman,
    tune_gamma,
    word_cosine_sim,
)
from .huffman import HuffmanTree, build_huffman
from .model import (
    ModelState,
    TrainConfig,
    TrainingInstance,
    export_embeddings,
    hs_log_prob,
    init_state,
    make_instances,
    train,
    train_step,
)
from .semnet import Lexicon, ParseError, SemanticNetwork, load_lexicon, load_network
from .vocab import Vocabulary, build_vocab

__version__ = "0.1.0"

__all__ = [
    "AnnotatedUnit",
    "ConnectivityParams",
    "CorpusStats",
    "EvalReport",
    "HuffmanTree",
    "Lexicon",
    "Mention",
    "ModelState",
    "ParseError",
    "SemanticNetwork",
    "TrainConfig",
    "TrainingInstance",
    "VectorSpace",
    "Vocabulary",
    "annotate_corpus",
    "build_huffman",
    "build_vocab",
    "closest_sense_sim",
    "connect",
    "corpus_stats",
    "eval_mcs",
    "eval_similarity",
    "export_embeddings",
    "hs_log_prob",
    "init_state",
    "load_lexicon",
    "load_network",
    "make_instances",
    "mcs",
    "nearest_neighbors",
    "pearson",
    "sense_clustering",
    "spearman",
    "train",
    "train_step",
    "tune_gamma",
    "word_cosine_sim",
]
