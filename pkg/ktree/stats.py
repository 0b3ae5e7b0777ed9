from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List

from .models import KTree


@dataclass(frozen=True)
class TreeStats:
    """Exact shape counts of a tree, gathered by a full traversal."""

    node_count: int
    leaf_count: int
    internal_count: int
    depth: int
    min_leaf_size: int
    max_leaf_size: int
    mean_leaf_size: float
    total_leaf_members: int
    branching_histogram: Dict[int, int] = field(default_factory=dict)
    internal_per_level: List[int] = field(default_factory=list)

    @property
    def widest_level(self) -> int:
        """Largest number of internal nodes found on a single level."""
        return max(self.internal_per_level, default=0)

    def as_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "leaf_count": self.leaf_count,
            "internal_count": self.internal_count,
            "depth": self.depth,
            "min_leaf_size": self.min_leaf_size,
            "max_leaf_size": self.max_leaf_size,
            "mean_leaf_size": self.mean_leaf_size,
            "total_leaf_members": self.total_leaf_members,
            "branching_histogram": dict(sorted(self.branching_histogram.items())),
            "internal_per_level": list(self.internal_per_level),
            "widest_level": self.widest_level,
        }


def tree_stats(tree: KTree) -> TreeStats:
    leaf_sizes = []
    histogram = Counter()
    per_level = Counter()
    node_count = 0
    for level, node in tree.iter_nodes():
        node_count += 1
        if node.is_leaf:
            leaf_sizes.append(node.size)
        else:
            histogram[len(node.children)] += 1
            per_level[level] += 1
    levels = [per_level[level] for level in range(max(per_level) + 1)] if per_level else []
    return TreeStats(
        node_count=node_count,
        leaf_count=len(leaf_sizes),
        internal_count=node_count - len(leaf_sizes),
        depth=len(levels),
        min_leaf_size=min(leaf_sizes),
        max_leaf_size=max(leaf_sizes),
        mean_leaf_size=sum(leaf_sizes) / len(leaf_sizes),
        total_leaf_members=sum(leaf_sizes),
        branching_histogram=dict(histogram),
        internal_per_level=levels,
    )
