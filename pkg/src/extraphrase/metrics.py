"""ROUGE-N/L, corpus BLEU and length statistics.

All metrics share :func:`eval_tokenize`. No stemming or stopword removal is
applied, so absolute ROUGE values can differ slightly from the Perl
ROUGE-1.5.5 toolkit.

Corpus ROUGE is the macro average of per-pair scores. ROUGE-L is computed
over the whole text as one token sequence (no summary-level union LCS).
"""

import math
import unicodedata
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence, Tuple

from extraphrase.errors import ArgumentError, DegenerateInput


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision, recall):
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(precision, recall, f1)

    @classmethod
    def from_counts(cls, overlap, cand_total, ref_total):
        p = overlap / cand_total if cand_total else 0.0
        r = overlap / ref_total if ref_total else 0.0
        return cls.from_pr(p, r)

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LengthStats:
    ratio: float
    difference: float

    def as_dict(self):
        return asdict(self)


def _is_punct(ch):
    return unicodedata.category(ch).startswith("P")


def eval_tokenize(text: str) -> List[str]:
    """Lowercase, split on whitespace, then peel punctuation characters off
    both word edges as one-character tokens. Word-internal punctuation stays
    ("a-b" is one token, "(a-b)." is "(", "a-b", ")", ".")."""
    out = []
    for word in text.lower().split():
        start, end = 0, len(word)
        lead = []
        while start < end and _is_punct(word[start]):
            lead.append(word[start])
            start += 1
        trail = []
        while end > start and _is_punct(word[end - 1]):
            trail.append(word[end - 1])
            end -= 1
        out.extend(lead)
        if start < end:
            out.append(word[start:end])
        out.extend(reversed(trail))
    return out


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> Score:
    if n < 1:
        raise ArgumentError("n must be >= 1")
    cand = ngrams(eval_tokenize(candidate), n)
    ref = ngrams(eval_tokenize(reference), n)
    overlap = sum((cand & ref).values())
    return Score.from_counts(overlap, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> Score:
    cand = eval_tokenize(candidate)
    ref = eval_tokenize(reference)
    return Score.from_counts(lcs_length(cand, ref), len(cand), len(ref))


METRIC_NAMES = ("rouge1", "rouge2", "rougeL")


def pair_rouge(candidate: str, reference: str) -> Dict[str, Score]:
    return {
        "rouge1": rouge_n(candidate, reference, 1),
        "rouge2": rouge_n(candidate, reference, 2),
        "rougeL": rouge_l(candidate, reference),
    }


def corpus_rouge(pairs: Sequence[Tuple[str, str]]) -> Dict[str, Score]:
    """Macro-averaged ROUGE-1/2/L over (candidate, reference) pairs."""
    if not pairs:
        raise ArgumentError("corpus_rouge needs at least one pair")
    per_pair = [pair_rouge(c, r) for c, r in pairs]
    n = len(per_pair)
    out = {}
    for name in METRIC_NAMES:
        scores = [s[name] for s in per_pair]
        out[name] = Score(
            precision=math.fsum(s.precision for s in scores) / n,
            recall=math.fsum(s.recall for s in scores) / n,
            f1=math.fsum(s.f1 for s in scores) / n,
        )
    return out


def _check_parallel(candidates, references):
    if len(candidates) != len(references):
        raise ArgumentError(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise ArgumentError("empty corpus")


def corpus_bleu(candidates: Sequence[str], references: Sequence[str], max_n: int = 4,
                smooth: bool = False) -> float:
    """Corpus BLEU with one reference per candidate, in [0, 1].

    Clipped n-gram matches and totals are summed over the corpus before the
    geometric mean. ``smooth`` adds one to the numerator and denominator of
    every order above 1 (Lin and Och, 2004).
    """
    _check_parallel(candidates, references)
    if max_n < 1:
        raise ArgumentError("max_n must be >= 1")
    matches = [0] * max_n
    totals = [0] * max_n
    cand_len = ref_len = 0
    for cand_text, ref_text in zip(candidates, references):
        cand = eval_tokenize(cand_text)
        ref = eval_tokenize(ref_text)
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            c = ngrams(cand, n)
            matches[n - 1] += sum((c & ngrams(ref, n)).values())
            totals[n - 1] += sum(c.values())
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(max_n):
        num, den = matches[n], totals[n]
        if smooth and n > 0:
            num, den = num + 1, den + 1
        if num == 0 or den == 0:
            return 0.0
        log_sum += math.log(num / den)
    bp = 1.0 if cand_len > ref_len else math.exp(1 - ref_len / cand_len)
    return bp * math.exp(log_sum / max_n)


def length_stats(candidates: Sequence[str], references: Sequence[str]) -> LengthStats:
    """Mean-length ratio and mean per-pair length difference (candidate minus
    reference), in tokens."""
    _check_parallel(candidates, references)
    cand = [len(eval_tokenize(c)) for c in candidates]
    ref = [len(eval_tokenize(r)) for r in references]
    if sum(ref) == 0:
        raise DegenerateInput("mean reference length is zero")
    return LengthStats(ratio=sum(cand) / sum(ref),
                       difference=math.fsum(c - r for c, r in zip(cand, ref)) / len(cand))
