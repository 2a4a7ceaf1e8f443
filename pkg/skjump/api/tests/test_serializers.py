from rest_framework.test import APIRequestFactory, APITestCase

from api.serializers import ExperimentRunSerializer
from experiments.models import ExperimentRun


class ExperimentRunSerializerTests(APITestCase):
    """Tests for ExperimentRunSerializer.

    Methods:
        test_fields: Every registry field and the hyperlink are exposed.
        test_read_only: Incoming data cannot change a run.

    References:
        * https://www.django-rest-framework.org/api-guide/serializers/

    """

    def setUp(self):
        self.run = ExperimentRun.objects.create(
            experiment='assumptions', model='pure_jump',
            config_hash='a' * 64, seed='7', out_dir='/tmp/out',
            manifest={'total_aborts': 0})
        self.request = APIRequestFactory().get('/api/runs/')

    def test_fields(self):
        data = ExperimentRunSerializer(
            self.run, context={'request': self.request}).data
        self.assertEqual(
            set(data), {'url', 'id', 'experiment', 'model', 'config_hash',
                        'seed', 'aborts', 'out_dir', 'status', 'manifest',
                        'created_date'})
        self.assertEqual(data['status'], ExperimentRun.COMPLETED)
        self.assertEqual(data['manifest'], {'total_aborts': 0})
        self.assertEqual(data['url'], 'http://testserver/api/runs/{}/'.format(
            self.run.pk))

    def test_read_only(self):
        serializer = ExperimentRunSerializer(
            self.run, data={'experiment': 'strong_rate', 'aborts': 5},
            partial=True, context={'request': self.request})
        self.assertTrue(serializer.is_valid())
        self.assertEqual(serializer.validated_data, {})
