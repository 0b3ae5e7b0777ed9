from django.conf import settings
from rest_framework import serializers


class ScoreRequestSerializer(serializers.Serializer):
    """Serializer for POST /score request bodies."""

    pairs = serializers.ListField(
        child=serializers.ListField(
            child=serializers.CharField(allow_blank=True, trim_whitespace=False),
            min_length=2,
            max_length=2,
        ),
        allow_empty=True,
    )

    def validate_pairs(self, value):
        """Enforce the service batch limit."""
        limit = settings.SCORING_SERVICE["BATCH_LIMIT"]
        if len(value) > limit:
            raise serializers.ValidationError(
                f"At most {limit} pairs per request, got {len(value)}."
            )
        return [tuple(pair) for pair in value]


class ScoreResponseSerializer(serializers.Serializer):
    """Serializer for POST /score answers."""

    scores = serializers.ListField(child=serializers.FloatField(min_value=0.0, max_value=1.0))
