"""Pseudo-summary corpus construction by dependency-tree compression and
round-trip translation, plus ROUGE/BLEU/length evaluation."""

from extraphrase.corpus_io import (
    Document,
    ParallelPair,
    Sentence,
    Token,
    parse_conllu,
    read_pairs,
    write_pairs,
)
from extraphrase.deptree import CompressionConfig, compress
from extraphrase.augment import AugmentConfig, build_pseudo_corpus

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig",
    "CompressionConfig",
    "Document",
    "ParallelPair",
    "Sentence",
    "Token",
    "build_pseudo_corpus",
    "compress",
    "parse_conllu",
    "read_pairs",
    "write_pairs",
]
