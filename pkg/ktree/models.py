"""
Hierarchical k-means tree nodes.

Leaves hold item ids; internal nodes hold the mean vector of everything
beneath them plus optional representative item ids. Nodes are immutable and
their arrays read-only, so a built tree can be searched from many threads.
"""
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Tuple, Union

import numpy as np

from kmeans.models import KMeansConfig
from ktree_search.exceptions import ConsistencyError
from vecstore.models import EmbeddingSet


def _read_only(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, order="C", copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LeafNode:
    """Bucket of item ids, ascending."""

    member_ids: np.ndarray

    is_leaf = True

    def __post_init__(self):
        object.__setattr__(self, "member_ids", _read_only(self.member_ids, np.int64))

    @property
    def size(self) -> int:
        return int(self.member_ids.shape[0])

    def __eq__(self, other):
        if not isinstance(other, LeafNode):
            return NotImplemented
        return np.array_equal(self.member_ids, other.member_ids)

    def __hash__(self):
        return hash(self.member_ids.tobytes())


@dataclass(frozen=True, eq=False)
class InternalNode:
    """Routing node: float32 centroid, ordered children, representative ids."""

    centroid: np.ndarray
    children: Tuple["TreeNode", ...]
    rep_ids: Tuple[int, ...] = ()

    is_leaf = False

    def __post_init__(self):
        object.__setattr__(self, "centroid", _read_only(self.centroid, np.float32))
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(self, "rep_ids", tuple(int(i) for i in self.rep_ids))

    def __eq__(self, other):
        if not isinstance(other, InternalNode):
            return NotImplemented
        return (
            self.centroid.tobytes() == other.centroid.tobytes()
            and self.rep_ids == other.rep_ids
            and self.children == other.children
        )

    def __hash__(self):
        return hash((self.centroid.tobytes(), self.rep_ids, len(self.children)))


TreeNode = Union[LeafNode, InternalNode]


@dataclass(frozen=True)
class KTree:
    """
    A built index.

    ``depth`` counts internal levels above the leaves, so a tree that is a
    single leaf has depth 0. ``kmeans_config`` and ``max_depth`` describe how
    the tree was built and ``embeddings`` holds the indexed vectors for vector
    search; none of them are part of the file format or of equality.
    """

    root: TreeNode
    branching: int
    leaf_capacity: int
    dim: int
    item_count: int
    rep_count: int = 0
    depth: int = field(default=0)
    kmeans_config: Optional[KMeansConfig] = field(default=None, compare=False)
    max_depth: Optional[int] = field(default=None, compare=False)
    embeddings: Optional[EmbeddingSet] = field(default=None, compare=False, repr=False)

    def with_embeddings(self, embeddings: EmbeddingSet) -> "KTree":
        """Attach the vectors the tree was built over (trees read from disk carry ids only)."""
        if embeddings.count != self.item_count or embeddings.dim != self.dim:
            raise ConsistencyError(
                f"tree indexes {self.item_count} x {self.dim} vectors, "
                f"embeddings are {embeddings.count} x {embeddings.dim}"
            )
        return replace(self, embeddings=embeddings)

    def iter_nodes(self) -> Iterator[Tuple[int, TreeNode]]:
        """Yield (level, node) in pre-order; the root is level 0."""
        stack = [(0, self.root)]
        while stack:
            level, node = stack.pop()
            yield level, node
            if not node.is_leaf:
                stack.extend((level + 1, child) for child in reversed(node.children))

    def leaves(self) -> Iterator[LeafNode]:
        return (node for _, node in self.iter_nodes() if node.is_leaf)

    @property
    def internal_count(self) -> int:
        return sum(1 for _, node in self.iter_nodes() if not node.is_leaf)

    @property
    def oversized_leaves(self) -> int:
        """Leaves above ``leaf_capacity``: unsplittable sets or sets cut off by ``max_depth``."""
        return sum(1 for leaf in self.leaves() if leaf.size > self.leaf_capacity)

    @property
    def has_representatives(self) -> bool:
        return any(not node.is_leaf and node.rep_ids for _, node in self.iter_nodes())


def node_depth(node: TreeNode) -> int:
    """Internal levels at and below ``node``."""
    if node.is_leaf:
        return 0
    return 1 + max(node_depth(child) for child in node.children)


def collect_members(node: TreeNode) -> np.ndarray:
    """All item ids under ``node``, in leaf order."""
    if node.is_leaf:
        return node.member_ids
    return np.concatenate([collect_members(child) for child in node.children])
