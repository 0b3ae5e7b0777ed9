import logging

from drf_spectacular.utils import extend_schema
from rest_framework import permissions, status
from rest_framework.response import Response
from rest_framework.views import APIView

from scorers.lexical import LexicalScorer
from .serializers import ScoreRequestSerializer, ScoreResponseSerializer

logger = logging.getLogger(__name__)


class ScoreView(APIView):
    """API view scoring text pairs with the lexical scorer."""

    permission_classes = [permissions.AllowAny]
    scorer = LexicalScorer()

    @extend_schema(
        operation_id="score_pairs",
        summary="Score text pairs",
        description="Return one similarity in [0, 1] per [text_a, text_b] pair, in request order.",
        request=ScoreRequestSerializer,
        responses={200: ScoreResponseSerializer},
    )
    def post(self, request):
        """Score a batch of pairs."""
        serializer = ScoreRequestSerializer(data=request.data)
        if serializer.is_valid():
            pairs = serializer.validated_data["pairs"]
            scores = self.scorer.score_batch(pairs)
            logger.debug("Scored %d pairs", len(pairs))
            return Response(ScoreResponseSerializer({"scores": scores}).data)

        return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)
