"""
The pair scorer interface.

A scorer takes an ordered batch of (text_a, text_b) pairs and returns one
similarity in [0, 1] per pair, in the same order. Implementations must be
safe to call from concurrent searches.
"""
import math
from typing import List, Protocol, Sequence, Tuple, runtime_checkable

from ktree_search.exceptions import ContractViolationError

TextPair = Tuple[str, str]


@runtime_checkable
class PairScorer(Protocol):
    name: str
    batch_limit: int

    def score_batch(self, pairs: Sequence[TextPair]) -> List[float]:
        ...


def check_scores(scorer_name: str, pairs: Sequence[TextPair], scores: Sequence[float]) -> List[float]:
    """Enforce the scorer contract: one finite score in [0, 1] per pair."""
    if len(scores) != len(pairs):
        raise ContractViolationError(
            f"{scorer_name} returned {len(scores)} scores for {len(pairs)} pairs"
        )
    checked = []
    for index, score in enumerate(scores):
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise ContractViolationError(f"{scorer_name} returned non-numeric score {score!r} at position {index}")
        score = float(score)
        if not math.isfinite(score) or not 0.0 <= score <= 1.0:
            raise ContractViolationError(f"{scorer_name} returned score {score!r} outside [0, 1] at position {index}")
        checked.append(score)
    return checked
