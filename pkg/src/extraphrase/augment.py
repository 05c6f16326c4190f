"""Pseudo-corpus construction and the oversampling baseline."""

import logging
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from extraphrase.corpus_io import GENUINE, PSEUDO, Document, ParallelPair, Sentence
from extraphrase.deptree import CompressionConfig, compress
from extraphrase.errors import ArgumentError
from extraphrase.paraphrase import BackendUnavailable, LengthMismatch, RoundTripConfig, round_trip

logger = logging.getLogger(__name__)


@dataclass
class AugmentConfig:
    compression: CompressionConfig = field(default_factory=CompressionConfig)
    roundtrip: Optional[RoundTripConfig] = None  # None: compression only
    doc_sentence_limit: int = 3
    pseudo_tag: str = "<Pseudo>"
    tag_enabled: bool = True
    truncate_source: bool = False  # store only the first doc_sentence_limit sentences as source

    def __post_init__(self):
        if self.doc_sentence_limit < 1:
            raise ValueError("doc_sentence_limit must be >= 1")
        if not self.pseudo_tag or any(c.isspace() for c in self.pseudo_tag):
            raise ValueError("pseudo_tag must be non-empty and contain no whitespace")


def _paraphrase(texts: List[str], config: AugmentConfig) -> List[str]:
    if config.roundtrip is None:
        return texts
    return round_trip(texts, config.roundtrip)


def extraphrase_sentence(sentence: Sentence, config: AugmentConfig) -> str:
    return _paraphrase([compress(sentence, config.compression)], config)[0]


def extraphrase_document(document: Document, config: AugmentConfig) -> str:
    head = document.sentences[:config.doc_sentence_limit]
    compressed = [compress(s, config.compression) for s in head]
    return " ".join(_paraphrase(compressed, config))


def _source_text(document: Document, config: AugmentConfig) -> str:
    if config.truncate_source:
        text = " ".join(s.raw_text for s in document.sentences[:config.doc_sentence_limit])
    else:
        text = document.text
    return f"{config.pseudo_tag} {text}" if config.tag_enabled else text


def build_pseudo_corpus(documents: Sequence[Document], config: AugmentConfig, *,
                        strict: bool = False, skipped: Optional[list] = None) -> List[ParallelPair]:
    """One pseudo pair per document: tagged original text -> compressed
    (and paraphrased) first sentences.

    Translation requests are pooled across documents. If the pooled call
    fails, documents are retried one at a time so only the failing ones are
    dropped. In strict mode any failure propagates. Skipped documents are
    reported as ``(document id, exception)`` in ``skipped``.
    """
    compressed = [[compress(s, config.compression) for s in d.sentences[:config.doc_sentence_limit]]
                  for d in documents]
    flat = [t for doc in compressed for t in doc]
    try:
        paraphrased = _paraphrase(flat, config)
        per_doc = []
        pos = 0
        for doc in compressed:
            per_doc.append(paraphrased[pos:pos + len(doc)])
            pos += len(doc)
    except (BackendUnavailable, LengthMismatch, ValueError) as exc:
        if strict:
            raise
        logger.warning("pooled paraphrasing failed (%s); retrying per document", exc)
        per_doc = []
        for doc in compressed:
            try:
                per_doc.append(_paraphrase(doc, config))
            except (BackendUnavailable, LengthMismatch, ValueError) as doc_exc:
                per_doc.append(doc_exc)

    pairs = []
    for document, outputs in zip(documents, per_doc):
        try:
            if isinstance(outputs, Exception):
                raise outputs
            pairs.append(ParallelPair(id=document.id, source=_source_text(document, config),
                                      target=" ".join(outputs), origin=PSEUDO))
        except (BackendUnavailable, LengthMismatch, ValueError) as exc:
            if strict:
                raise
            logger.warning("skipping document %s: %s", document.id, exc)
            if skipped is not None:
                skipped.append((document.id, exc))
    return pairs


def oversample(pairs: Sequence[ParallelPair], target_count: int, seed: int) -> List[ParallelPair]:
    """Pad ``pairs`` to ``target_count`` with copies drawn uniformly with
    replacement."""
    if not pairs:
        raise ArgumentError("cannot oversample an empty corpus")
    if target_count < len(pairs):
        raise ArgumentError(f"target_count {target_count} is smaller than the corpus ({len(pairs)})")
    rng = random.Random(seed)
    return list(pairs) + rng.choices(pairs, k=target_count - len(pairs))


def mix(genuine: Sequence[ParallelPair], pseudo: Sequence[ParallelPair], seed: int = 0,
        shuffle: bool = False, pseudo_tag: Optional[str] = "<Pseudo>") -> List[ParallelPair]:
    """Concatenate genuine and pseudo pairs, optionally shuffled.

    With ``pseudo_tag`` set, every pseudo source must carry the tag and no
    genuine source may; pass ``None`` to mix untagged corpora.
    """
    for p in genuine:
        if p.origin != GENUINE:
            raise ArgumentError(f"pair {p.id} in the genuine list has origin {p.origin!r}")
    for p in pseudo:
        if p.origin != PSEUDO:
            raise ArgumentError(f"pair {p.id} in the pseudo list has origin {p.origin!r}")
    if pseudo_tag is not None:
        prefix = pseudo_tag + " "
        for p in genuine:
            if p.source.startswith(prefix):
                raise ArgumentError(f"genuine pair {p.id} carries the pseudo tag")
        for p in pseudo:
            if not p.source.startswith(prefix):
                raise ArgumentError(f"pseudo pair {p.id} lacks the pseudo tag")
    out = list(genuine) + list(pseudo)
    if shuffle:
        random.Random(seed).shuffle(out)
    return out
