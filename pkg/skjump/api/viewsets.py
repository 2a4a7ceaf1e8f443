from rest_framework import viewsets

from experiments.models import ExperimentRun

from .serializers import ExperimentRunSerializer


class ExperimentRunViewset(viewsets.ReadOnlyModelViewSet):
    """
    Read only viewset for registered experiment runs, newest first.

    Fields:
        queryset: runs ordered by creation date, newest first
        serializer_class: serializer used to represent runs
        get_queryset: `?experiment=`, `?status=` and `?config_hash=` narrow
            the list
    """

    queryset = ExperimentRun.objects.all().order_by('-created_date', '-pk')
    serializer_class = ExperimentRunSerializer

    def get_queryset(self):
        queryset = super().get_queryset()
        for name in ('experiment', 'status', 'config_hash'):
            value = self.request.query_params.get(name)
            if value:
                queryset = queryset.filter(**{name: value})
        return queryset
