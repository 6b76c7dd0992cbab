"""ROUGE-1/2/L scoring plus the shared tokenizer policy.

Scores follow the standard recall/precision/F1 definitions with clipped
multiset n-gram overlap and LCS length, 0/0 ratios collapsing to 0.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyCorpusError

# Tokens are maximal runs of Unicode letters/digits; everything else separates.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into alphanumeric tokens."""
    return _TOKEN_RE.findall(text.lower())


def token_prefix(text: str, max_tokens: int) -> str:
    """Prefix of ``text`` spanning at most ``max_tokens`` tokens.

    The cut lands right after the last kept token, so the original casing
    and spacing of the prefix survive untouched.
    """
    if max_tokens <= 0:
        return ""
    for i, match in enumerate(_TOKEN_RE.finditer(text), start=1):
        if i == max_tokens:
            return text[: match.end()]
    return text


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f1: float


@dataclass(frozen=True)
class RougeReport:
    """Corpus means of per-example scores."""

    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    n_examples: int


def _ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def ngram_overlap(ref: Sequence[str], gen: Sequence[str], n: int) -> tuple[int, int, int]:
    """Clipped multiset n-gram intersection: (overlap, ref_count, gen_count)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gen_counts = Counter(_ngrams(gen, n))
    overlap = sum(min(count, gen_counts[gram]) for gram, count in Counter(_ngrams(ref, n)).items())
    return overlap, max(len(ref) - n + 1, 0), max(len(gen) - n + 1, 0)


def _score(overlap: int, ref_count: int, gen_count: int) -> RougeScore:
    recall = overlap / ref_count if ref_count else 0.0
    precision = overlap / gen_count if gen_count else 0.0
    f1 = 2 * recall * precision / (recall + precision) if recall + precision > 0 else 0.0
    return RougeScore(recall, precision, f1)


def rouge_n(ref: Sequence[str], gen: Sequence[str], n: int) -> RougeScore:
    """N-gram overlap recall/precision/F1 between token sequences."""
    return _score(*ngram_overlap(ref, gen, n))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, O(len(a) * len(b)) with a rolling row."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(ref: Sequence[str], gen: Sequence[str]) -> RougeScore:
    """LCS-based recall/precision/F1 between token sequences."""
    length = lcs_length(ref, gen)
    return _score(length, len(ref), len(gen))


def score_pair(ref_text: str, gen_text: str) -> tuple[RougeScore, RougeScore, RougeScore]:
    """Tokenize both sides and return (ROUGE-1, ROUGE-2, ROUGE-L) scores."""
    ref, gen = tokenize(ref_text), tokenize(gen_text)
    return rouge_n(ref, gen, 1), rouge_n(ref, gen, 2), rouge_l(ref, gen)


def _mean_score(scores: Iterable[RougeScore]) -> RougeScore:
    scores = list(scores)
    n = len(scores)
    return RougeScore(
        recall=sum(s.recall for s in scores) / n,
        precision=sum(s.precision for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
    )


def corpus_rouge(pairs: Sequence[tuple[str, str]]) -> RougeReport:
    """Arithmetic mean of per-example ROUGE-1/2/L over (reference, generated) text pairs."""
    if not pairs:
        raise EmptyCorpusError("no (reference, generated) pairs to score")
    per_example = [score_pair(ref, gen) for ref, gen in pairs]
    return RougeReport(
        rouge1=_mean_score(s[0] for s in per_example),
        rouge2=_mean_score(s[1] for s in per_example),
        rougeL=_mean_score(s[2] for s in per_example),
        n_examples=len(per_example),
    )
