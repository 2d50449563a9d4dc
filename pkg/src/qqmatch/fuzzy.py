"""Customized fuzzy intersection ratio between two token sets.

Blends exact token overlap with pairwise matches between the exclusive
tokens of each side: a syntactic match (1 - normalized Levenshtein)
tried first, then a semantic match (word-vector cosine scaled to [0,1])
when both words are in the embedding vocabulary.  Each left-side word
contributes at most one match; matched right-side words are removed
only after both loops finish, so an already-matched right word can be
matched again by a later left word.  Iteration runs in lexicographic
token order to make the result independent of set iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .embeddings import EmbeddingTable, cosine
from .errors import ContractError


@dataclass(frozen=True)
class FuzzyConfig:
    threshold1: float = 0.6   # syntactic acceptance
    threshold2: float = 0.55  # semantic acceptance

    def __post_init__(self) -> None:
        for name in ("threshold1", "threshold2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ContractError(f"{name} must be in [0, 1], got {v}")


class MatchedPair(NamedTuple):
    word1: str
    word2: str
    kind: str  # "syntactic" | "semantic"
    pair_score: float


@dataclass
class FuzzyResult:
    score: float
    exact_overlap_count: int
    partial_overlap: float
    matched_pairs: list[MatchedPair] = field(default_factory=list)


def norm_levenshtein(word1: str, word2: str) -> float:
    """Edit distance divided by the longer word's length, in [0, 1]."""
    if word1 == word2:
        return 0.0
    if not word1 or not word2:
        return 1.0
    if len(word1) < len(word2):
        word1, word2 = word2, word1
    prev = list(range(len(word2) + 1))
    for i, ch1 in enumerate(word1, 1):
        curr = [i]
        for j, ch2 in enumerate(word2, 1):
            cost = 0 if ch1 == ch2 else 1
            curr.append(min(curr[j - 1] + 1, prev[j] + 1, prev[j - 1] + cost))
        prev = curr
    return prev[-1] / len(word1)


def scaled_cosine(word1: str, word2: str, table: EmbeddingTable) -> float:
    """(cosine + 1) / 2 of the two word vectors; both words must be in vocab."""
    return (cosine(table.vector(word1), table.vector(word2)) + 1.0) / 2.0


def fuzzy_intersection_ratio(
    q1_tokens: frozenset[str] | set[str],
    q2_tokens: frozenset[str] | set[str],
    config: FuzzyConfig,
    table: EmbeddingTable,
) -> FuzzyResult:
    s1 = set(q1_tokens)
    s2 = set(q2_tokens)
    overlap = s1 & s2
    if not overlap:
        return FuzzyResult(score=0.0, exact_overlap_count=0, partial_overlap=0.0)

    exclusive_s1 = s1 - s2
    exclusive_s2 = s2 - s1
    rem_s1: set[str] = set()
    rem_s2: set[str] = set()
    partial_overlap = 0.0
    matched: list[MatchedPair] = []

    for word1 in sorted(exclusive_s1):
        for word2 in sorted(exclusive_s2):
            syntactic = 1.0 - norm_levenshtein(word1, word2)
            if syntactic >= config.threshold1:
                partial_overlap += syntactic
                rem_s1.add(word1)
                rem_s2.add(word2)
                matched.append(MatchedPair(word1, word2, "syntactic", syntactic))
                break
            if word1 in table.vocab and word2 in table.vocab:
                semantic = scaled_cosine(word1, word2, table)
                if semantic >= config.threshold2:
                    partial_overlap += semantic
                    rem_s1.add(word1)
                    rem_s2.add(word2)
                    matched.append(MatchedPair(word1, word2, "semantic", semantic))
                    break

    remaining_s1 = exclusive_s1 - rem_s1
    remaining_s2 = exclusive_s2 - rem_s2
    l0 = len(overlap)
    l1 = len(rem_s1)
    l2 = len(remaining_s1)
    l3 = len(remaining_s2)
    score = (l0 + partial_overlap) / (l0 + l1 + l2 + l3)
    return FuzzyResult(
        score=score,
        exact_overlap_count=l0,
        partial_overlap=partial_overlap,
        matched_pairs=matched,
    )
