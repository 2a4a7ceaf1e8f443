from rest_framework import serializers

from experiments.models import ExperimentRun


class ExperimentRunSerializer(serializers.HyperlinkedModelSerializer):
    """Read only representation of a registered experiment run.

    Fields:
        model: model to be serialized
        fields: fields to include in serialization
        read_only_fields: every field; runs are only written by the `run`
            command

    References:
        * https://www.django-rest-framework.org/api-guide/serializers/#hyperlinkedmodelserializer

    """

    class Meta:
        model = ExperimentRun
        fields = ('url', 'id', 'experiment', 'model', 'config_hash', 'seed',
                  'aborts', 'out_dir', 'status', 'manifest', 'created_date')
        read_only_fields = fields
