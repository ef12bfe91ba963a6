"""URL definitions for the `competition` app (read-only API)."""
from django.urls import path

from .api_views import RunDetailAPIView, RunListAPIView, RunReplicaListAPIView

urlpatterns = [
    path('api/runs/', RunListAPIView.as_view(), name='api-run-list'),
    path('api/runs/<int:pk>/', RunDetailAPIView.as_view(), name='api-run-detail'),
    path('api/runs/<int:pk>/replicas/', RunReplicaListAPIView.as_view(), name='api-run-replicas'),
]
