from .serializers import ScoreRequestSerializer


class TestScoreRequestSerializer:
    """Test cases for ScoreRequestSerializer."""

    def test_valid_pairs(self):
        serializer = ScoreRequestSerializer(data={"pairs": [["a b", "a c"], ["", "x"]]})
        assert serializer.is_valid(), serializer.errors
        assert serializer.validated_data["pairs"] == [("a b", "a c"), ("", "x")]

    def test_empty_batch_is_valid(self):
        serializer = ScoreRequestSerializer(data={"pairs": []})
        assert serializer.is_valid()

    def test_pair_must_have_two_texts(self):
        serializer = ScoreRequestSerializer(data={"pairs": [["only one"]]})
        assert not serializer.is_valid()
        assert "pairs" in serializer.errors

    def test_missing_pairs(self):
        serializer = ScoreRequestSerializer(data={"scores": []})
        assert not serializer.is_valid()
        assert "pairs" in serializer.errors

    def test_batch_limit(self, settings):
        """
        Given: A service batch limit of 2
        When: Validating three pairs
        Then: The request is rejected
        """
        settings.SCORING_SERVICE = {"BATCH_LIMIT": 2}
        serializer = ScoreRequestSerializer(data={"pairs": [["a", "b"]] * 3})
        assert not serializer.is_valid()
        assert "At most 2 pairs" in str(serializer.errors["pairs"][0])
