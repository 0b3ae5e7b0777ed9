"""
Level-synchronous beam search over a KTree.

The beam starts at the root. Each step expands every beam node: leaf children
are consumed (their non-excluded members are scored into the running top-n),
internal children are scored and the best ``beam_width`` of them form the
next beam. The search ends when no internal node is left.

Vector mode scores centroids and members with the search metric. Pairwise
mode routes on the best representative score of each internal child and
scores members with the pair scorer; higher is better.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from ktree.models import KTree, LeafNode
from ktree_search.exceptions import (
    ConfigurationError,
    ConsistencyError,
    InvalidInputError,
    KTreeError,
    ScorerError,
)
from scorers.base import PairScorer, check_scores
from vecstore.models import ItemTable
from vecstore.ops import higher_is_better, score_centroids, score_rows
from .models import BatchResult, SearchParams, SearchQuery, SearchResult
from .ranking import TopN, rank_nodes

logger = logging.getLogger(__name__)

SEARCH_MODES = ("vector", "pairwise")


def _members_to_score(leaf: LeafNode, exclude_ids: frozenset) -> np.ndarray:
    members = leaf.member_ids
    if exclude_ids:
        members = members[~np.isin(members, list(exclude_ids))]
    return members


def beam_search_vector(tree: KTree, query, params: SearchParams) -> SearchResult:
    """Search ``tree`` for the ``params.top_n`` items nearest ``query``."""
    if tree.embeddings is None:
        raise ConfigurationError("vector search needs the tree's embeddings attached")
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1 or query.shape[0] != tree.dim:
        raise InvalidInputError(f"query has shape {query.shape}, tree dimension is {tree.dim}")
    vectors = tree.embeddings.vectors
    better_high = higher_is_better(params.metric)
    width = params.resolve_beam(tree)
    top = TopN(params.top_n, better_high)
    routing_evals = leaf_evals = 0
    nodes_visited = 1

    def consume(leaf: LeafNode) -> int:
        members = _members_to_score(leaf, params.exclude_ids)
        if members.size:
            top.push(members, score_rows(query, vectors[members], params.metric))
        return int(members.size)

    if tree.root.is_leaf:
        leaf_evals += consume(tree.root)
        beam = []
    else:
        beam = [tree.root]

    level = 0
    while beam:
        level += 1
        candidates = []
        for node in beam:
            for child in node.children:
                if child.is_leaf:
                    leaf_evals += consume(child)
                    nodes_visited += 1
                else:
                    candidates.append(child)
        if not candidates:
            break
        centroids = np.stack([child.centroid for child in candidates])
        scores = score_centroids(query, centroids, params.metric)
        routing_evals += len(candidates)
        beam = [candidates[i] for i in rank_nodes(scores, better_high, width)]
        nodes_visited += len(beam)
        logger.debug("Level %d: %d candidates, beam %d", level, len(candidates), len(beam))

    return SearchResult(
        ranked=top.ranked(),
        eval_count=routing_evals + leaf_evals,
        nodes_visited=nodes_visited,
        routing_evals=routing_evals,
        leaf_evals=leaf_evals,
    )


def _score_pairs(scorer: PairScorer, query_text: str, texts: List[str], what: str) -> np.ndarray:
    pairs = [(query_text, text) for text in texts]
    try:
        scores = check_scores(scorer.name, pairs, scorer.score_batch(pairs))
    except ScorerError as e:
        raise e.__class__(f"scoring {what} failed: {e}") from e
    return np.asarray(scores, dtype=np.float64)


def beam_search_pairwise(
    tree: KTree,
    query_text: str,
    scorer: PairScorer,
    params: SearchParams,
    items: ItemTable,
) -> SearchResult:
    """
    Search ``tree`` with a pair scorer.

    An internal node's routing score is the maximum scorer output over its
    representatives; every representative scoring counts as one evaluation.
    """
    if items.count != tree.item_count:
        raise ConsistencyError(f"tree indexes {tree.item_count} items, corpus has {items.count}")
    internal = [node for _, node in tree.iter_nodes() if not node.is_leaf]
    if any(not node.rep_ids for node in internal):
        raise ConfigurationError("pairwise search needs a tree built with representatives (rep_count >= 1)")
    width = params.resolve_beam(tree)
    top = TopN(params.top_n, True)
    routing_evals = leaf_evals = 0
    nodes_visited = 1

    def consume(leaf: LeafNode, level: int) -> int:
        members = _members_to_score(leaf, params.exclude_ids)
        if members.size:
            texts = [items.text(int(i)) for i in members]
            top.push(members, _score_pairs(scorer, query_text, texts, f"leaf members at level {level}"))
        return int(members.size)

    beam = []
    if tree.root.is_leaf:
        leaf_evals += consume(tree.root, 0)
    else:
        beam = [tree.root]

    level = 0
    while beam:
        level += 1
        candidates = []
        for node in beam:
            for child in node.children:
                if child.is_leaf:
                    leaf_evals += consume(child, level)
                    nodes_visited += 1
                else:
                    candidates.append(child)
        if not candidates:
            break
        rep_texts = [items.text(rep) for child in candidates for rep in child.rep_ids]
        rep_scores = _score_pairs(scorer, query_text, rep_texts, f"representatives at level {level}")
        routing_evals += len(rep_texts)
        bounds = np.cumsum([0] + [len(child.rep_ids) for child in candidates])
        scores = np.array([rep_scores[bounds[i]:bounds[i + 1]].max() for i in range(len(candidates))])
        beam = [candidates[i] for i in rank_nodes(scores, True, width)]
        nodes_visited += len(beam)
        logger.debug("Level %d: %d candidates, beam %d", level, len(candidates), len(beam))

    return SearchResult(
        ranked=top.ranked(),
        eval_count=routing_evals + leaf_evals,
        nodes_visited=nodes_visited,
        routing_evals=routing_evals,
        leaf_evals=leaf_evals,
    )


def batch_search(
    tree: KTree,
    queries: Sequence[SearchQuery],
    params: SearchParams,
    mode: str = "vector",
    scorer: Optional[PairScorer] = None,
    items: Optional[ItemTable] = None,
    threads: int = 1,
) -> BatchResult:
    """
    Run one search per query.

    Each query's own ``exclude_ids`` are added to ``params.exclude_ids``. A
    query that fails is recorded in ``errors`` and the batch carries on.
    """
    if mode not in SEARCH_MODES:
        raise InvalidInputError(f"unknown search mode {mode!r}, expected one of {SEARCH_MODES}")
    if mode == "pairwise" and (scorer is None or items is None):
        raise ConfigurationError("pairwise batch search needs a scorer and the item texts")
    if threads < 1:
        raise InvalidInputError(f"threads must be positive, got {threads}")

    def run(query: SearchQuery):
        query_params = params.excluding(query.exclude_ids)
        try:
            if mode == "vector":
                if query.vector is None:
                    raise InvalidInputError(f"query {query.key!r} has no vector")
                return beam_search_vector(tree, query.vector, query_params), None
            if query.text is None:
                raise InvalidInputError(f"query {query.key!r} has no text")
            return beam_search_pairwise(tree, query.text, scorer, query_params, items), None
        except KTreeError as e:
            logger.warning("Query %r failed: %s", query.key, e)
            return None, str(e)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            outcomes = list(executor.map(run, queries))
    else:
        outcomes = [run(query) for query in queries]

    results, errors = {}, {}
    for query, (result, error) in zip(queries, outcomes):
        if error is None:
            results[query.key] = result
        else:
            errors[query.key] = error
    batch = BatchResult(results=results, errors=errors)
    logger.info(
        "Batch of %d queries: %d failed, eval_count mean %.1f (min %d, max %d)",
        len(queries), len(errors), batch.mean_eval_count, batch.min_eval_count, batch.max_eval_count,
    )
    return batch
