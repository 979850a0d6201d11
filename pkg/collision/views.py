from drf_yasg.utils import swagger_auto_schema
from rest_framework import permissions, status
from rest_framework.response import Response
from rest_framework.views import APIView

from .serializers import (
    OracleRequestSerializer,
    OracleResultSerializer,
    PocRequestSerializer,
    PocResultSerializer,
)
from .services import evaluate_oracle, evaluate_poc


class PocEstimateView(APIView):
    """
    Analytic multi-circle POC of one object belief.
    """
    permission_classes = [permissions.AllowAny]

    @swagger_auto_schema(
        operation_summary="Estimate collision probability",
        operation_description="""
        Over-approximate the probability that the object rectangle meets the
        ego rectangle, both covered by equal circles.

        **Inputs** (all in the ego frame, ego at the origin with heading 0):
        - `mu`, `sigma`: object belief, `"x,y,theta"` strings or 3-element lists
        - `ego`, `obj`: footprints as `"LxW"` (default `4.5x2`)
        - `circles`: circle counts `"E,O"`; `grid`: samples per polar axis; `nbeta`: truncation

        Estimators are cached per (footprints, circles, grid) for the life of the process.
        """,
        request_body=PocRequestSerializer,
        responses={
            200: PocResultSerializer,
            400: "Bad Request - Validation errors"
        },
        tags=['POC']
    )
    def post(self, request):
        serializer = PocRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        return Response(evaluate_poc(serializer.validated_data), status=status.HTTP_200_OK)


class OracleView(APIView):
    """
    Monte-Carlo POC on the exact rectangles or on the circle covers.
    """
    permission_classes = [permissions.AllowAny]

    @swagger_auto_schema(
        operation_summary="Monte-Carlo collision probability",
        operation_description="""
        Sample object configurations from the belief and count collisions.

        - `geometry=rectangle` uses the separating axis test on the exact footprints
        - `geometry=circles` tests the circle covers instead
        - identical `seed` gives identical results
        """,
        request_body=OracleRequestSerializer,
        responses={
            200: OracleResultSerializer,
            400: "Bad Request - Validation errors"
        },
        tags=['POC']
    )
    def post(self, request):
        serializer = OracleRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        return Response(evaluate_oracle(serializer.validated_data), status=status.HTTP_200_OK)
