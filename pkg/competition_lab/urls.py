"""
URL configuration for the competition_lab project.

The admin site lists stored runs; the competition app serves them read-only
under ``/competition/api/``.
"""
from django.contrib import admin
from django.urls import include, path

urlpatterns = [
    path('admin/', admin.site.urls),
    path('competition/', include('competition.urls')),
]
