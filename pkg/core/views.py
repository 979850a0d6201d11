from rest_framework import filters, generics, permissions
from django_filters.rest_framework import DjangoFilterBackend
from drf_yasg.utils import swagger_auto_schema

from .models import RunRecord
from .serializers import RunRecordListSerializer, RunRecordSerializer


class RunRecordListView(generics.ListAPIView):
    """
    List recorded engine runs with filtering and ordering.
    """
    queryset = RunRecord.objects.all()
    serializer_class = RunRecordListSerializer
    permission_classes = [permissions.AllowAny]
    filter_backends = [DjangoFilterBackend, filters.SearchFilter, filters.OrderingFilter]

    filterset_fields = {
        'command': ['exact'],
        'status': ['exact'],
        'seed': ['exact'],
        'created_at': ['gte', 'lte'],
    }
    search_fields = ['command', 'schema_version']
    ordering_fields = ['created_at', 'wall_clock_s', 'command']
    ordering = ['-created_at']

    @swagger_auto_schema(
        operation_summary="List recorded runs",
        operation_description="""
        Browse the manifests stored by commands run with `--record`.

        **Examples:**
        - SMPC runs only: `?command=smpc`
        - Runs with infeasible steps: `?status=INFEASIBLE`
        - Slowest first: `?ordering=-wall_clock_s`
        """,
        responses={200: RunRecordListSerializer(many=True)},
        tags=['Runs']
    )
    def get(self, request, *args, **kwargs):
        return super().get(request, *args, **kwargs)


class RunRecordDetailView(generics.RetrieveDestroyAPIView):
    """
    Retrieve a recorded run, or delete it (Admin only).
    """
    queryset = RunRecord.objects.all()
    serializer_class = RunRecordSerializer

    def get_permissions(self):
        if self.request.method == 'DELETE':
            return [permissions.IsAdminUser()]
        return [permissions.AllowAny()]

    @swagger_auto_schema(
        operation_summary="Get run manifest",
        operation_description="""
        Full manifest of one run: resolved configuration, seed, written files,
        package versions and headline results.
        """,
        responses={200: RunRecordSerializer, 404: "Run not found"},
        tags=['Runs']
    )
    def get(self, request, *args, **kwargs):
        return super().get(request, *args, **kwargs)

    @swagger_auto_schema(
        operation_summary="Delete run record",
        operation_description="""
        Remove a stored manifest. Output files on disk are left untouched.

        **Requires**: Staff privileges
        """,
        responses={
            204: "Run deleted",
            403: "Staff privileges required",
            404: "Run not found"
        },
        tags=['Runs']
    )
    def delete(self, request, *args, **kwargs):
        return super().delete(request, *args, **kwargs)
