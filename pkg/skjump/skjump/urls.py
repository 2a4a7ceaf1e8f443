"""skjump URL Configuration

The registry of experiment runs is browsable in the admin and, read only,
through the REST API.

    https://docs.djangoproject.com/en/4.2/topics/http/urls/
"""
from django.urls import include, path

from .admin import skjump_admin_site

urlpatterns = [
    path('admin/', skjump_admin_site.urls),

    path('api/', include('api.urls')),
]
