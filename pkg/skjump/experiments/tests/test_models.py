from django.test import TestCase

from experiments.models import ExperimentRun
from experiments.runner import ResultBundle
from skjump.admin import skjump_admin_site

from .factories import make_config


class ExperimentRunTests(TestCase):
    """Tests for the ExperimentRun registry model.

    Methods:
        test_record: record() copies the config identity and the bundle.
        test_str: Experiment, model and a short hash.
        test_ordering: Newest runs come first.
        test_absolute_url: Points at the API detail view.
        test_admin: Registered read only on the project admin site.

    """

    def setUp(self):
        self.config = make_config('assumptions', seed=2 ** 63)
        self.bundle = ResultBundle(out_dir='/tmp/run', files=('a.csv',),
                                   manifest={'seed': 2 ** 63}, aborts=0)

    def test_record(self):
        run = ExperimentRun.record(self.config, self.bundle)
        run.refresh_from_db()
        self.assertEqual(run.experiment, 'assumptions')
        self.assertEqual(run.model, 'linear_jump_ou')
        self.assertEqual(run.config_hash, self.config.config_hash)
        self.assertEqual(run.seed, str(2 ** 63))
        self.assertEqual(run.status, ExperimentRun.COMPLETED)
        self.assertEqual(run.manifest, {'seed': 2 ** 63})

    def test_str(self):
        run = ExperimentRun.record(self.config, self.bundle)
        self.assertEqual(str(run), 'assumptions on linear_jump_ou ({})'.format(
            self.config.config_hash[:12]))

    def test_ordering(self):
        first = ExperimentRun.record(self.config, self.bundle)
        second = ExperimentRun.record(self.config, self.bundle,
                                      ExperimentRun.FAILED)
        self.assertEqual(list(ExperimentRun.objects.all()), [second, first])

    def test_absolute_url(self):
        run = ExperimentRun.record(self.config, self.bundle)
        self.assertEqual(run.get_absolute_url(),
                         '/api/runs/{}/'.format(run.pk))

    def test_admin(self):
        run = ExperimentRun.record(self.config, self.bundle)
        model_admin = skjump_admin_site._registry[ExperimentRun]
        self.assertIn('manifest', model_admin.get_readonly_fields(None, run))
