"""
Recursive k-means tree construction.

A member set becomes a leaf when it fits ``leaf_capacity`` (or the depth
bound is reached); otherwise it is split by k-means with k = branching and
every non-empty cluster becomes a child. No child may take more than
``BALANCE_SLACK`` times an even share of its parent's members; a k-means
partition that does is rebalanced before recursing, which bounds the depth
at about log_branching(n / leaf_capacity). Each child's k-means seed is
derived from its parent's seed and its child index, so sibling subtrees can
be built in any order or in parallel without changing the result.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from kmeans.lloyd import kmeans, nearest_to_centroid
from kmeans.models import KMeansConfig
from ktree_search.exceptions import InvalidInputError
from vecstore.models import EmbeddingSet
from vecstore.ops import score_rows
from .models import InternalNode, KTree, LeafNode, TreeNode, node_depth

logger = logging.getLogger(__name__)

MAX_BRANCHING = 255
MAX_REP_COUNT = 5
BALANCE_SLACK = 1.25


def child_seed(parent_seed: int, child_index: int) -> int:
    """Derive a child's 64-bit k-means seed from its parent's seed."""
    state = np.random.SeedSequence([parent_seed, child_index]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def child_capacity(size: int, branching: int) -> int:
    """Most members a single child of a ``size``-member node may hold."""
    return math.ceil(size * BALANCE_SLACK / branching)


def shared_depth(item_count: int, leaf_capacity: int, branching: int) -> int:
    """
    Deepest level at which a perfectly balanced ``branching``-ary tree still
    has leaves of ``leaf_capacity`` members or more; at least 1.

    Trees of different branching built with this ``max_depth`` have the same
    number of levels and differ only in fan-out.
    """
    depth = 0
    while leaf_capacity * branching ** (depth + 1) <= item_count:
        depth += 1
    return max(depth, 1)


def balance_labels(points: np.ndarray, centroids: np.ndarray, capacity: int) -> np.ndarray:
    """
    Assign every point to a centroid so that none receives more than ``capacity``.

    Points are placed in decreasing order of how much closer their nearest
    centroid is than the runner-up, each taking the nearest centroid with room
    left. Ties go to the lower point index, then the lower centroid index.
    """
    k = centroids.shape[0]
    if k * capacity < points.shape[0]:
        raise InvalidInputError(f"{k} clusters of {capacity} cannot hold {points.shape[0]} points")
    distances = np.stack([score_rows(centroid, points, "euclidean") for centroid in centroids], axis=1)
    preference = np.argsort(distances, axis=1, kind="stable")
    ranked = np.take_along_axis(distances, preference, axis=1)
    regret = ranked[:, 1] - ranked[:, 0] if k > 1 else np.zeros(points.shape[0])
    room = np.full(k, capacity, dtype=np.int64)
    labels = np.empty(points.shape[0], dtype=np.int64)
    for point in np.lexsort((np.arange(points.shape[0]), -regret)):
        for cluster in preference[point]:
            if room[cluster]:
                room[cluster] -= 1
                labels[point] = cluster
                break
    return labels


class _TreeBuilder:
    def __init__(self, points: np.ndarray, branching: int, leaf_capacity: int,
                 config: KMeansConfig, rep_count: int, max_depth: Optional[int]):
        self.points = points
        self.branching = branching
        self.leaf_capacity = leaf_capacity
        self.config = config
        self.rep_count = rep_count
        self.max_depth = max_depth

    def _leaf(self, member_ids: np.ndarray, reason: Optional[str] = None) -> LeafNode:
        if reason and member_ids.shape[0] > self.leaf_capacity:
            logger.debug("Oversized leaf of %d members (%s)", member_ids.shape[0], reason)
        return LeafNode(member_ids)

    def split(self, member_ids: np.ndarray, seed: int):
        """Cluster ``member_ids``; return [(child_ids, child_centroid)] or None if unsplittable."""
        subset = self.points[member_ids]
        if np.all(subset == subset[0]):
            return None
        clustering = kmeans(subset, self.config.with_seed(seed))
        labels = clustering.assignments
        size = subset.shape[0]
        capacity = max(child_capacity(size, self.branching), math.ceil(size / clustering.k))
        largest = int(clustering.sizes().max())
        if largest > capacity:
            logger.debug("Rebalancing split of %d members: largest cluster %d > %d", size, largest, capacity)
            labels = balance_labels(subset, clustering.centroids, capacity)
        groups = []
        for cluster in range(clustering.k):
            rows = np.flatnonzero(labels == cluster)
            if rows.size:
                groups.append((member_ids[rows], subset[rows].mean(axis=0)))
        if len(groups) < 2:
            return None
        return groups

    def node(self, member_ids: np.ndarray, centroid: np.ndarray, seed: int, level: int,
             executor: Optional[ThreadPoolExecutor] = None) -> TreeNode:
        if member_ids.shape[0] <= self.leaf_capacity:
            return self._leaf(member_ids)
        if self.max_depth is not None and level >= self.max_depth:
            return self._leaf(member_ids, "depth bound")
        groups = self.split(member_ids, seed)
        if groups is None:
            logger.warning("Member set of %d points cannot be split; keeping it as one leaf", member_ids.shape[0])
            return self._leaf(member_ids, "unsplittable")

        args = [
            (ids, mean, child_seed(seed, index), level + 1)
            for index, (ids, mean) in enumerate(groups)
        ]
        if executor is not None:
            children = list(executor.map(lambda a: self.node(*a), args))
        else:
            children = [self.node(*a) for a in args]

        rep_ids = ()
        if self.rep_count:
            rep_ids = nearest_to_centroid(self.points, member_ids, centroid, self.rep_count)
        return InternalNode(centroid=centroid, children=tuple(children), rep_ids=tuple(rep_ids))


def build_tree(
    embeddings: EmbeddingSet,
    branching: int = 5,
    leaf_capacity: int = 16,
    kmeans_config: Optional[KMeansConfig] = None,
    rep_count: int = 0,
    max_depth: Optional[int] = None,
    threads: int = 1,
) -> KTree:
    """
    Build a hierarchical k-means tree over ``embeddings``.

    ``kmeans_config.k`` is replaced by ``branching``; its seed seeds the root
    split. ``rep_count`` representatives (0 to 5) nearest to each internal
    centroid are attached for pairwise search. ``max_depth`` turns every member
    set at that depth into a leaf. ``threads`` > 1 builds the root's subtrees
    in parallel with identical output.
    """
    if not isinstance(embeddings, EmbeddingSet):
        embeddings = EmbeddingSet.from_array(embeddings)
    if embeddings.count == 0:
        raise InvalidInputError("cannot build a tree over an empty embedding set")
    if not 2 <= branching <= MAX_BRANCHING:
        raise InvalidInputError(f"branching must be in 2..{MAX_BRANCHING}, got {branching}")
    if leaf_capacity < 1:
        raise InvalidInputError(f"leaf_capacity must be positive, got {leaf_capacity}")
    if not 0 <= rep_count <= MAX_REP_COUNT:
        raise InvalidInputError(f"rep_count must be in 0..{MAX_REP_COUNT}, got {rep_count}")
    if max_depth is not None and max_depth < 1:
        raise InvalidInputError(f"max_depth must be positive, got {max_depth}")
    if threads < 1:
        raise InvalidInputError(f"threads must be positive, got {threads}")

    config = (kmeans_config or KMeansConfig(k=branching)).with_k(branching)
    points = embeddings.vectors.astype(np.float64)
    builder = _TreeBuilder(points, branching, leaf_capacity, config, rep_count, max_depth)
    all_ids = np.arange(embeddings.count, dtype=np.int64)
    root_centroid = points.mean(axis=0)

    logger.info(
        "Building tree over %d x %d vectors (branching=%d, leaf_capacity=%d, rep_count=%d, threads=%d)",
        embeddings.count, embeddings.dim, branching, leaf_capacity, rep_count, threads,
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            root = builder.node(all_ids, root_centroid, config.seed, 0, executor)
    else:
        root = builder.node(all_ids, root_centroid, config.seed, 0)

    tree = KTree(
        root=root,
        branching=branching,
        leaf_capacity=leaf_capacity,
        dim=embeddings.dim,
        item_count=embeddings.count,
        rep_count=rep_count,
        depth=node_depth(root),
        kmeans_config=config,
        max_depth=max_depth,
        embeddings=embeddings,
    )
    logger.info(
        "Built tree: depth=%d internal=%d oversized_leaves=%d",
        tree.depth, tree.internal_count, tree.oversized_leaves,
    )
    return tree
