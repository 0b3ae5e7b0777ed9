import json
import random

import httpx
import pytest

from ktree_search.exceptions import (
    ConfigurationError,
    ContractViolationError,
    ProtocolError,
    RetryableScorerError,
)
from .base import PairScorer
from .lexical import LexicalScorer, lexical_score
from .remote import RemoteScorer, RemoteScorerConfig

URL = "http://scorer.test/score"


def lexical_server(calls):
    """MockTransport handler answering every request with lexical scores."""

    def handler(request: httpx.Request) -> httpx.Response:
        pairs = json.loads(request.content)["pairs"]
        calls.append(len(pairs))
        return httpx.Response(200, json={"scores": [lexical_score(a, b) for a, b in pairs]})

    return handler


def random_pairs(count, seed=0):
    rng = random.Random(seed)
    words = ["how", "can", "i", "lose", "weight", "quickly", "what", "is", "the", "best", "diet"]
    return [
        (" ".join(rng.choices(words, k=rng.randint(1, 7))), " ".join(rng.choices(words, k=rng.randint(1, 7))))
        for _ in range(count)
    ]


class TestRemoteScorerConfig:
    """Test cases for scorer client configuration."""

    def test_defaults(self):
        config = RemoteScorerConfig(url=URL)
        assert config.timeout_ms == 10000
        assert config.max_retries == 3
        assert config.batch_limit == 64

    @pytest.mark.parametrize(
        "overrides",
        [
            {"url": ""},
            {"url": "ftp://scorer"},
            {"timeout_ms": 0},
            {"max_retries": -1},
            {"batch_limit": 0},
        ],
    )
    def test_invalid_settings(self, overrides):
        params = {"url": URL, **overrides}
        with pytest.raises(ConfigurationError):
            RemoteScorerConfig(**params)


class TestRemoteScorer:
    """Test cases for the HTTP scorer client."""

    def _scorer(self, handler, **config):
        params = {"url": URL, "retry_backoff_ms": 0, **config}
        return RemoteScorer(RemoteScorerConfig(**params), transport=httpx.MockTransport(handler))

    def test_implements_pair_scorer(self):
        with self._scorer(lexical_server([])) as scorer:
            assert isinstance(scorer, PairScorer)

    def test_empty_batch_makes_no_call(self):
        calls = []
        with self._scorer(lexical_server(calls)) as scorer:
            assert scorer.score_batch([]) == []
        assert calls == []

    def test_matches_local_scorer(self):
        """
        Given: A server that answers with lexical scores
        When: Scoring 50 random pairs remotely
        Then: The scores equal the local scorer's
        """
        pairs = random_pairs(50)
        with self._scorer(lexical_server([])) as scorer:
            assert scorer.score_batch(pairs) == LexicalScorer().score_batch(pairs)

    def test_chunking_preserves_order(self):
        pairs = random_pairs(23, seed=1)
        calls = []
        with self._scorer(lexical_server(calls), batch_limit=5) as chunked:
            chunked_scores = chunked.score_batch(pairs)
        with self._scorer(lexical_server([]), batch_limit=64) as single:
            single_scores = single.score_batch(pairs)
        assert calls == [5, 5, 5, 5, 3]
        assert chunked_scores == single_scores

    def test_request_body(self):
        seen = []

        def handler(request):
            seen.append(json.loads(request.content))
            return httpx.Response(200, json={"scores": [0.25]})

        with self._scorer(handler) as scorer:
            scorer.score_batch([("text a", "text b")])
        assert seen == [{"pairs": [["text a", "text b"]]}]

    def test_out_of_range_score_is_contract_violation(self):
        with self._scorer(lambda request: httpx.Response(200, json={"scores": [1.5]})) as scorer:
            with pytest.raises(ContractViolationError):
                scorer.score_batch([("a", "b")])

    def test_wrong_score_count_is_contract_violation(self):
        with self._scorer(lambda request: httpx.Response(200, json={"scores": [0.1, 0.2]})) as scorer:
            with pytest.raises(ContractViolationError):
                scorer.score_batch([("a", "b")])

    def test_server_error_is_protocol_error(self):
        with self._scorer(lambda request: httpx.Response(503, text="overloaded")) as scorer:
            with pytest.raises(ProtocolError) as excinfo:
                scorer.score_batch([("a", "b")])
        assert excinfo.value.payload == "overloaded"

    def test_non_json_body_is_protocol_error(self):
        with self._scorer(lambda request: httpx.Response(200, text="<html>")) as scorer:
            with pytest.raises(ProtocolError):
                scorer.score_batch([("a", "b")])

    def test_missing_scores_key_is_protocol_error(self):
        with self._scorer(lambda request: httpx.Response(200, json={"result": []})) as scorer:
            with pytest.raises(ProtocolError):
                scorer.score_batch([("a", "b")])

    def test_transient_failure_is_retried(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) < 3:
                raise httpx.ConnectError("connection refused", request=request)
            return httpx.Response(200, json={"scores": [0.5]})

        with self._scorer(handler, max_retries=3) as scorer:
            assert scorer.score_batch([("a", "b")]) == [0.5]
        assert len(attempts) == 3

    def test_timeout_beyond_retries_is_retryable_error(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            raise httpx.ReadTimeout("timed out", request=request)

        with self._scorer(handler, max_retries=2) as scorer:
            with pytest.raises(RetryableScorerError):
                scorer.score_batch([("a", "b")])
        assert len(attempts) == 3
