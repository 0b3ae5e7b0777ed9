"""
Exact k-d tree for euclidean top-n search.

Nodes split on the dimension with the widest spread at the median; points
with coordinate <= split value go left, the rest right. Queries run a
depth-first branch-and-bound that skips a subtree when the distance from the
query to the subtree's cell already exceeds the current n-th best distance.
Point distances go through ``score_rows``, so results match compute-all bit
for bit.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from ktree_search.exceptions import InvalidInputError, UnsupportedMetricError
from search.models import SearchResult
from search.ranking import TopN
from vecstore.models import EmbeddingSet
from vecstore.ops import score_rows

logger = logging.getLogger(__name__)

DEFAULT_LEAF_SIZE = 8
# Relative slack when comparing a cell bound against the current worst distance.
_PRUNE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class KdLeaf:
    ids: np.ndarray

    is_leaf = True


@dataclass(frozen=True, eq=False)
class KdSplit:
    split_dim: int
    split_value: float
    left: "KdNode"
    right: "KdNode"

    is_leaf = False


KdNode = Union[KdLeaf, KdSplit]


@dataclass(frozen=True, eq=False)
class KdTree:
    root: KdNode
    embeddings: EmbeddingSet
    leaf_size: int

    def node_count(self) -> int:
        count, stack = 0, [self.root]
        while stack:
            node = stack.pop()
            count += 1
            if not node.is_leaf:
                stack.extend((node.left, node.right))
        return count


def _split_value(coords: np.ndarray) -> float:
    value = float(np.median(coords))
    top = coords.max()
    if value >= top:
        value = float(coords[coords < top].max())
    return value


def _build(points: np.ndarray, ids: np.ndarray, leaf_size: int) -> KdNode:
    if ids.shape[0] <= leaf_size:
        return KdLeaf(ids)
    subset = points[ids]
    spread = subset.max(axis=0) - subset.min(axis=0)
    split_dim = int(np.argmax(spread))
    if spread[split_dim] == 0.0:
        return KdLeaf(ids)
    coords = subset[:, split_dim]
    split_value = _split_value(coords)
    goes_left = coords <= split_value
    return KdSplit(
        split_dim=split_dim,
        split_value=split_value,
        left=_build(points, ids[goes_left], leaf_size),
        right=_build(points, ids[~goes_left], leaf_size),
    )


def kdtree_build(embeddings: EmbeddingSet, leaf_size: int = DEFAULT_LEAF_SIZE) -> KdTree:
    if embeddings.count == 0:
        raise InvalidInputError("cannot build a k-d tree over an empty embedding set")
    if leaf_size < 1:
        raise InvalidInputError(f"leaf_size must be positive, got {leaf_size}")
    points = embeddings.vectors.astype(np.float64)
    tree = KdTree(
        root=_build(points, np.arange(embeddings.count, dtype=np.int64), leaf_size),
        embeddings=embeddings,
        leaf_size=leaf_size,
    )
    logger.info("Built k-d tree over %d x %d vectors (%d nodes)", embeddings.count, embeddings.dim, tree.node_count())
    return tree


def kdtree_topn(
    kdtree: KdTree, query, top_n: int, exclude_ids: Iterable[int] = (), metric: str = "euclidean"
) -> SearchResult:
    """Exact euclidean top ``top_n``; ``eval_count`` counts point distances only."""
    if metric != "euclidean":
        raise UnsupportedMetricError(f"the k-d tree only answers euclidean queries, not {metric!r}")
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1 or query.shape[0] != kdtree.embeddings.dim:
        raise InvalidInputError(f"query has shape {query.shape}, index dimension is {kdtree.embeddings.dim}")
    vectors = kdtree.embeddings.vectors
    exclude = list(exclude_ids or ())
    top = TopN(top_n, higher_is_better=False)
    offsets = np.zeros_like(query)
    counters = {"evals": 0, "nodes": 0}

    def visit(node: KdNode, bound_sq: float) -> None:
        counters["nodes"] += 1
        if node.is_leaf:
            ids = node.ids
            if exclude:
                ids = ids[~np.isin(ids, exclude)]
            if ids.size:
                top.push(ids, score_rows(query, vectors[ids], "euclidean"))
                counters["evals"] += int(ids.size)
            return
        diff = query[node.split_dim] - node.split_value
        near, far = (node.left, node.right) if diff <= 0 else (node.right, node.left)
        visit(near, bound_sq)
        old = offsets[node.split_dim]
        far_bound_sq = bound_sq - old * old + diff * diff
        if top.full and np.sqrt(far_bound_sq) > top.worst * (1 + _PRUNE_SLACK):
            return
        offsets[node.split_dim] = diff
        visit(far, far_bound_sq)
        offsets[node.split_dim] = old

    visit(kdtree.root, 0.0)
    return SearchResult(
        ranked=top.ranked(),
        eval_count=counters["evals"],
        nodes_visited=counters["nodes"],
        leaf_evals=counters["evals"],
    )
