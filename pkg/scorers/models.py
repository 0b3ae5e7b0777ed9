from dataclasses import dataclass
from typing import Any, List, Tuple

from ktree_search.exceptions import ProtocolError
from .base import TextPair, check_scores


@dataclass(frozen=True)
class ScoreRequest:
    """Body of ``POST /score``."""

    pairs: Tuple[TextPair, ...]

    def to_payload(self) -> dict:
        return {"pairs": [[a, b] for a, b in self.pairs]}


@dataclass(frozen=True)
class ScoreResponse:
    """Body of a ``/score`` answer; scores follow request order."""

    scores: Tuple[float, ...]

    @classmethod
    def from_payload(cls, payload: Any, request: ScoreRequest, source: str = "scorer") -> "ScoreResponse":
        """Validate a decoded JSON answer against the request it belongs to."""
        if not isinstance(payload, dict) or not isinstance(payload.get("scores"), list):
            raise ProtocolError(f"{source} answer has no 'scores' list", payload=repr(payload))
        scores: List[float] = check_scores(source, request.pairs, payload["scores"])
        return cls(tuple(scores))
