"""
Binary-relevance ranking metrics.

Every function takes a ranked list of item ids (best first, no duplicates)
and the set of relevant ids; an empty relevant set is invalid input.
"""
import math
from typing import AbstractSet, Optional, Sequence

from ktree_search.exceptions import InvalidInputError


def _check(ranked: Sequence[int], relevant: AbstractSet[int]) -> None:
    if not relevant:
        raise InvalidInputError("relevant set must not be empty")
    if len(set(ranked)) != len(ranked):
        raise InvalidInputError("ranked list contains duplicate ids")


def average_precision(ranked: Sequence[int], relevant: AbstractSet[int]) -> float:
    """Mean of precision@r over the ranks r of relevant items; missing ones count 0."""
    _check(ranked, relevant)
    hits = 0
    total = 0.0
    for rank, item_id in enumerate(ranked, start=1):
        if item_id in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def reciprocal_rank(ranked: Sequence[int], relevant: AbstractSet[int], cutoff: Optional[int] = None) -> float:
    """1/r for the first relevant item at rank r <= cutoff, else 0."""
    _check(ranked, relevant)
    limit = len(ranked) if cutoff is None else min(cutoff, len(ranked))
    for rank, item_id in enumerate(ranked[:limit], start=1):
        if item_id in relevant:
            return 1.0 / rank
    return 0.0


def ndcg(ranked: Sequence[int], relevant: AbstractSet[int], cutoff: Optional[int] = None) -> float:
    _check(ranked, relevant)
    limit = len(ranked) if cutoff is None else min(cutoff, len(ranked))
    dcg = sum(1.0 / math.log2(rank + 1) for rank, item_id in enumerate(ranked[:limit], start=1) if item_id in relevant)
    ideal_hits = len(relevant) if cutoff is None else min(len(relevant), cutoff)
    idcg = sum(1.0 / math.log2(rank + 1) for rank in range(1, ideal_hits + 1))
    return dcg / idcg if idcg else 0.0


def precision_at_1(ranked: Sequence[int], relevant: AbstractSet[int]) -> float:
    """1.0 when the top item is relevant; an empty list scores 0.0."""
    if not ranked:
        return 0.0
    return 1.0 if ranked[0] in relevant else 0.0


def recall_at_k(ranked: Sequence[int], relevant: AbstractSet[int], k: int) -> float:
    """Fraction of the relevant items found in the first ``k`` ranks."""
    _check(ranked, relevant)
    return len(set(ranked[:k]) & set(relevant)) / len(relevant)
