"""Read-only API over stored experiment runs.

API Endpoints:
    /competition/api/runs/ - List stored runs with pagination
    /competition/api/runs/<pk>/ - Retrieve one run with its replica rows
    /competition/api/runs/<pk>/replicas/ - List the replica rows of one run
"""

from django.shortcuts import get_object_or_404
from rest_framework import generics, permissions
from rest_framework.pagination import PageNumberPagination

from .models import ExperimentRun, ReplicaResult
from .serializers import ExperimentRunDetailSerializer, ExperimentRunSerializer, ReplicaResultSerializer


class StandardPagination(PageNumberPagination):
    """Page-number pagination, 10 items per page unless ``page_size`` says otherwise."""
    page_size = 10
    page_size_query_param = 'page_size'
    max_page_size = 100


class RunListAPIView(generics.ListAPIView):
    """Stored runs, newest first.

    GET Parameters:
        kind: optional filter, COMPETE or ENSEMBLE
        page, page_size: pagination
    """
    serializer_class = ExperimentRunSerializer
    permission_classes = [permissions.IsAuthenticated]
    pagination_class = StandardPagination

    def get_queryset(self):
        queryset = ExperimentRun.objects.all()
        kind = self.request.query_params.get('kind')
        if kind:
            queryset = queryset.filter(kind=kind.upper())
        return queryset


class RunDetailAPIView(generics.RetrieveAPIView):
    """One stored run with nested replica rows.

    URL Parameters:
        pk: primary key of the run
    """
    serializer_class = ExperimentRunDetailSerializer
    permission_classes = [permissions.IsAuthenticated]
    queryset = ExperimentRun.objects.prefetch_related('replicas')


class RunReplicaListAPIView(generics.ListAPIView):
    """Replica rows of one run in replica order; 404 for an unknown run."""
    serializer_class = ReplicaResultSerializer
    permission_classes = [permissions.IsAuthenticated]
    pagination_class = StandardPagination

    def get_queryset(self):
        run = get_object_or_404(ExperimentRun, pk=self.kwargs['pk'])
        return ReplicaResult.objects.filter(run=run).order_by('index')
