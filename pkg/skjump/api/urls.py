from django.urls import include, path
from rest_framework.routers import DefaultRouter

from . import viewsets


# Wire up the router
router = DefaultRouter()
router.register(r'runs', viewsets.ExperimentRunViewset)

urlpatterns = [
    path('', include(router.urls)),
]
