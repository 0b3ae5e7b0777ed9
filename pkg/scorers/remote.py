"""
HTTP client for an external pair-scoring service.

Contract: ``POST {url}`` with ``{"pairs": [[a, b], ...]}`` answers
``{"scores": [s, ...]}``. Batches larger than ``batch_limit`` are split into
consecutive requests and the scores concatenated in order.
"""
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

import httpx

from ktree_search.exceptions import ConfigurationError, ProtocolError, RetryableScorerError
from .base import TextPair
from .models import ScoreRequest, ScoreResponse

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RemoteScorerConfig:
    url: str
    timeout_ms: int = 10000
    max_retries: int = 3
    batch_limit: int = 64
    retry_backoff_ms: int = 100

    def __post_init__(self):
        if not self.url:
            raise ConfigurationError("remote scorer needs an endpoint URL")
        if not self.url.startswith(("http://", "https://")):
            raise ConfigurationError(f"scorer URL must be http(s), got {self.url!r}")
        if self.timeout_ms < 1:
            raise ConfigurationError("scorer timeout must be positive")
        if self.max_retries < 0:
            raise ConfigurationError("scorer max_retries must be nonnegative")
        if self.batch_limit < 1:
            raise ConfigurationError("scorer batch_limit must be positive")
        if self.retry_backoff_ms < 0:
            raise ConfigurationError("scorer retry backoff must be nonnegative")


class RemoteScorer:
    """PairScorer that delegates to the HTTP scoring service."""

    name = "remote"

    def __init__(self, config: RemoteScorerConfig, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self.batch_limit = config.batch_limit
        self.client = httpx.Client(
            timeout=config.timeout_ms / 1000.0,
            transport=transport,
            headers={"Content-Type": "application/json"},
        )

    def close(self) -> None:
        self.client.close()

    def __enter__(self) -> "RemoteScorer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def score_batch(self, pairs: Sequence[TextPair]) -> List[float]:
        scores: List[float] = []
        for start in range(0, len(pairs), self.batch_limit):
            request = ScoreRequest(tuple(pairs[start:start + self.batch_limit]))
            scores.extend(self._post(request).scores)
        return scores

    def _post(self, request: ScoreRequest) -> ScoreResponse:
        attempt = 0
        while True:
            attempt += 1
            try:
                response = self.client.post(self.config.url, json=request.to_payload())
            except (httpx.TimeoutException, httpx.TransportError) as e:
                if attempt > self.config.max_retries:
                    raise RetryableScorerError(
                        f"scorer at {self.config.url} failed after {attempt} attempts: {e}"
                    ) from e
                logger.warning("Scorer request failed (%s), retry %d/%d", e, attempt, self.config.max_retries)
                time.sleep(self.config.retry_backoff_ms * attempt / 1000.0)
                continue

            if not response.is_success:
                raise ProtocolError(f"scorer answered HTTP {response.status_code}", payload=response.text)
            try:
                payload = response.json()
            except ValueError:
                raise ProtocolError("scorer answered with a body that is not JSON", payload=response.text)
            return ScoreResponse.from_payload(payload, request, source=f"scorer at {self.config.url}")
