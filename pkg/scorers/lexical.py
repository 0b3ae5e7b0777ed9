"""Term-frequency cosine over lowercased word tokens."""
import math
import re
from collections import Counter
from typing import List, Sequence

from .base import TextPair

_TOKEN_SPLIT = re.compile(r"[\W_]+")


def tokenize(text: str) -> List[str]:
    """Lowercase and split on whitespace and punctuation."""
    return [token for token in _TOKEN_SPLIT.split(text.lower()) if token]


def lexical_score(a: str, b: str) -> float:
    """
    Cosine similarity of the two texts' term-frequency vectors.

    Two empty texts score 1.0; exactly one empty text scores 0.0.
    """
    tf_a = Counter(tokenize(a))
    tf_b = Counter(tokenize(b))
    if not tf_a and not tf_b:
        return 1.0
    if not tf_a or not tf_b:
        return 0.0
    dot = sum(count * tf_b[token] for token, count in tf_a.items() if token in tf_b)
    norm_a = math.sqrt(sum(c * c for c in tf_a.values()))
    norm_b = math.sqrt(sum(c * c for c in tf_b.values()))
    return min(1.0, dot / (norm_a * norm_b))


class LexicalScorer:
    """In-process PairScorer backed by ``lexical_score``."""

    name = "lexical"

    def __init__(self, batch_limit: int = 4096):
        self.batch_limit = batch_limit

    def score_batch(self, pairs: Sequence[TextPair]) -> List[float]:
        return [lexical_score(a, b) for a, b in pairs]
