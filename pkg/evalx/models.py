from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Tuple

from ktree_search.exceptions import ConsistencyError, InvalidInputError


@dataclass(frozen=True)
class QRels:
    """Query id -> non-empty set of relevant item ids."""

    relevance: Mapping[int, FrozenSet[int]]

    def __post_init__(self):
        normalized: Dict[int, FrozenSet[int]] = {}
        for query_id in sorted(self.relevance):
            relevant = frozenset(int(i) for i in self.relevance[query_id])
            if not relevant:
                raise InvalidInputError(f"query {query_id} has no relevant items")
            if int(query_id) in relevant:
                raise InvalidInputError(f"query {query_id} lists itself as relevant")
            normalized[int(query_id)] = relevant
        object.__setattr__(self, "relevance", normalized)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]]) -> "QRels":
        relevance: Dict[int, set] = {}
        for query_id, relevant_id in pairs:
            relevance.setdefault(int(query_id), set()).add(int(relevant_id))
        return cls({q: frozenset(r) for q, r in relevance.items()})

    def __len__(self) -> int:
        return len(self.relevance)

    def __iter__(self) -> Iterator[int]:
        return iter(self.relevance)

    def __contains__(self, query_id) -> bool:
        return query_id in self.relevance

    def relevant(self, query_id: int) -> FrozenSet[int]:
        return self.relevance[query_id]

    def pairs(self) -> List[Tuple[int, int]]:
        """(query, relevant) pairs sorted by query then relevant id."""
        return [(q, r) for q in self.relevance for r in sorted(self.relevance[q])]

    def check_corpus(self, item_count: int) -> None:
        """Every query and relevant id must exist in a corpus of ``item_count`` items."""
        for query_id, relevant_id in self.pairs():
            if not (0 <= query_id < item_count and 0 <= relevant_id < item_count):
                raise ConsistencyError(
                    f"qrels pair ({query_id}, {relevant_id}) is outside a corpus of {item_count} items"
                )


@dataclass(frozen=True)
class QueryRecord:
    """Metrics of one evaluated query."""

    query_id: int
    ranked: Tuple[int, ...]
    relevant: Tuple[int, ...]
    average_precision: float
    precision_at_1: float
    reciprocal_rank: float
    ndcg: float
    reciprocal_rank_at_10: float
    recall: float
    eval_count: int


@dataclass(frozen=True)
class EvalReport:
    """Mean metrics over the evaluated queries (one row of a results table)."""

    map_score: float
    p_at_1: float
    mrr: float
    ndcg: float
    mrr_at_10: float
    recall: float
    query_count: int
    mean_eval_count: float
    k: int = 20
    per_query: Tuple[QueryRecord, ...] = ()
    errors: Tuple[Tuple[int, str], ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.errors
