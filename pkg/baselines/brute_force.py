"""Compute-all baselines: every non-excluded item is scored."""
from typing import Iterable

import numpy as np

from scorers.base import PairScorer, check_scores
from search.models import SearchResult
from search.ranking import TopN
from vecstore.models import EmbeddingSet, ItemTable
from vecstore.ops import higher_is_better, score_rows


def _candidate_ids(count: int, exclude_ids: Iterable[int]) -> np.ndarray:
    ids = np.arange(count, dtype=np.int64)
    exclude = list(exclude_ids or ())
    if exclude:
        ids = ids[~np.isin(ids, exclude)]
    return ids


def brute_force_topn(
    embeddings: EmbeddingSet, query, metric: str, top_n: int, exclude_ids: Iterable[int] = ()
) -> SearchResult:
    """Exact top ``top_n`` under ``metric``; ``eval_count`` is the number of items scored."""
    ids = _candidate_ids(embeddings.count, exclude_ids)
    top = TopN(top_n, higher_is_better(metric))
    scores = score_rows(query, embeddings.vectors[ids], metric)
    top.push(ids, scores)
    return SearchResult(ranked=top.ranked(), eval_count=int(ids.size), nodes_visited=0, leaf_evals=int(ids.size))


def brute_force_pairwise(
    items: ItemTable, query_text: str, scorer: PairScorer, top_n: int, exclude_ids: Iterable[int] = ()
) -> SearchResult:
    """Score ``query_text`` against every item with ``scorer``."""
    ids = _candidate_ids(items.count, exclude_ids)
    pairs = [(query_text, items.text(int(i))) for i in ids]
    scores = check_scores(scorer.name, pairs, scorer.score_batch(pairs)) if pairs else []
    top = TopN(top_n, True)
    top.push(ids, scores)
    return SearchResult(ranked=top.ranked(), eval_count=int(ids.size), nodes_visited=0, leaf_evals=int(ids.size))
