import statistics
from dataclasses import dataclass, field
from typing import Dict, Hashable, Optional, Tuple, Union

import numpy as np

from ktree_search.exceptions import InvalidInputError
from vecstore.ops import METRICS

# Beam width that keeps every internal node of a level (resolved per tree).
EXHAUSTIVE_BEAM = "inf"


@dataclass(frozen=True)
class SearchParams:
    beam_width: Union[int, str] = 20
    top_n: int = 20
    metric: str = "cosine"
    exclude_ids: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.beam_width != EXHAUSTIVE_BEAM and (
            isinstance(self.beam_width, bool) or not isinstance(self.beam_width, int) or self.beam_width < 1
        ):
            raise InvalidInputError(f"beam_width must be a positive integer or {EXHAUSTIVE_BEAM!r}, got {self.beam_width!r}")
        if isinstance(self.top_n, bool) or not isinstance(self.top_n, int) or self.top_n < 1:
            raise InvalidInputError(f"top_n must be a positive integer, got {self.top_n!r}")
        if self.metric not in METRICS:
            raise InvalidInputError(f"unknown metric {self.metric!r}, expected one of {METRICS}")
        object.__setattr__(self, "exclude_ids", frozenset(int(i) for i in self.exclude_ids))

    def resolve_beam(self, tree) -> int:
        """Concrete beam width for ``tree``; the exhaustive beam is its internal-node count."""
        if self.beam_width == EXHAUSTIVE_BEAM:
            return max(1, tree.internal_count)
        return self.beam_width

    def excluding(self, extra) -> "SearchParams":
        """Copy with ``extra`` ids added to the exclusions."""
        if not extra:
            return self
        return SearchParams(self.beam_width, self.top_n, self.metric, self.exclude_ids | frozenset(extra))


@dataclass(frozen=True)
class SearchResult:
    """
    Ranked (item_id, score) pairs, best first, with exact scoring counts.

    ``eval_count`` is ``routing_evals`` (centroid or representative scorings)
    plus ``leaf_evals`` (member scorings).
    """

    ranked: Tuple[Tuple[int, float], ...]
    eval_count: int
    nodes_visited: int = 0
    routing_evals: int = 0
    leaf_evals: int = 0

    @property
    def ids(self) -> list:
        return [item_id for item_id, _ in self.ranked]

    @property
    def scores(self) -> list:
        return [score for _, score in self.ranked]

    def as_dict(self) -> dict:
        return {
            "ranked": [{"id": item_id, "score": score} for item_id, score in self.ranked],
            "eval_count": self.eval_count,
            "routing_evals": self.routing_evals,
            "leaf_evals": self.leaf_evals,
            "nodes_visited": self.nodes_visited,
        }


@dataclass(frozen=True, eq=False)
class SearchQuery:
    """One query of a batch: a vector (vector mode) or a text (pairwise mode)."""

    key: Hashable
    vector: Optional[np.ndarray] = None
    text: Optional[str] = None
    exclude_ids: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True)
class BatchResult:
    """Per-query results in input order, per-query errors, and eval-count summary."""

    results: Dict[Hashable, SearchResult]
    errors: Dict[Hashable, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    def _counts(self) -> list:
        return [result.eval_count for result in self.results.values()]

    @property
    def mean_eval_count(self) -> float:
        counts = self._counts()
        return statistics.fmean(counts) if counts else 0.0

    @property
    def min_eval_count(self) -> int:
        return min(self._counts(), default=0)

    @property
    def max_eval_count(self) -> int:
        return max(self._counts(), default=0)
