import json
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.conf import settings
from django.test import TestCase

from experiments.models import ExperimentRun

from .factories import STRONG_TEXT

ASSUMPTIONS_TEXT = """\
experiment = assumptions
model.name = pure_jump
model.lam = 1
assumptions.n_probes = 50
"""

EXPLODING_TEXT = """\
experiment = strong_rate
model.name = linear_jump_ou
model.a = -1e8
model.s = 0
model.gamma = 0
model.lam = 0
model.x0 = 1
run.n_steps = 100
run.epsilons = 0.5, 0.25, 0.125
run.n_paths = 2
"""


class CommandTestCase(TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.directory.name, 'out')

    def tearDown(self):
        self.directory.cleanup()

    def config(self, text, name='run.cfg'):
        path = os.path.join(self.directory.name, name)
        with open(path, 'w') as f:
            f.write(text)
        return path

    def call(self, *args):
        stdout = StringIO()
        call_command(*args, stdout=stdout, stderr=StringIO())
        return stdout.getvalue()


class RunCommandTests(CommandTestCase):
    """Tests for the `run` management command.

    Methods:
        test_run_records: A run writes its files and a registry row.
        test_no_record: --no-record leaves the registry alone.
        test_seed_flag: --seed overrides run.seed in the manifest and row.
        test_config_error: Exit code 2 and nothing recorded.
        test_noise_floor: Exit code 3.
        test_numerical_abort: Exit code 4, files written, run recorded as
            aborted.

    """

    def test_run_records(self):
        output = self.call('run', '--config', self.config(ASSUMPTIONS_TEXT),
                           '--out', self.out)
        self.assertIn('assumptions.csv', output)
        self.assertTrue(os.path.exists(
            os.path.join(self.out, 'assumptions.csv')))

        run = ExperimentRun.objects.get()
        self.assertEqual(run.experiment, 'assumptions')
        self.assertEqual(run.model, 'pure_jump')
        self.assertEqual(run.status, ExperimentRun.COMPLETED)
        self.assertEqual(run.out_dir, self.out)
        with open(os.path.join(self.out, 'manifest.json')) as f:
            manifest = json.load(f)
        self.assertEqual(run.config_hash, manifest['config_hash'])
        self.assertEqual(run.manifest['config_hash'], manifest['config_hash'])

    def test_no_record(self):
        self.call('run', '--config', self.config(ASSUMPTIONS_TEXT),
                  '--out', self.out, '--no-record')
        self.assertFalse(ExperimentRun.objects.exists())

    def test_seed_flag(self):
        self.call('run', '--config', self.config(ASSUMPTIONS_TEXT),
                  '--out', self.out, '--seed', '18446744073709551615')
        run = ExperimentRun.objects.get()
        self.assertEqual(run.seed, '18446744073709551615')
        self.assertEqual(run.manifest['seed'], 2 ** 64 - 1)

    def test_config_error(self):
        path = self.config(STRONG_TEXT.replace('run.n_paths = 20',
                                               'run.n_paths = -1'))
        with self.assertRaises(CommandError) as e:
            self.call('run', '--config', path, '--out', self.out)
        self.assertEqual(e.exception.returncode, 2)
        self.assertIn('run.n_paths', str(e.exception))
        self.assertFalse(ExperimentRun.objects.exists())

    def test_noise_floor(self):
        text = STRONG_TEXT.replace('strong_rate', 'kolmogorov_rate')
        with self.assertRaises(CommandError) as e:
            self.call('run', '--config', self.config(text), '--out', self.out)
        self.assertEqual(e.exception.returncode, 3)

    def test_numerical_abort(self):
        with self.assertLogs('experiments.runner', 'WARNING'):
            with self.assertRaises(CommandError) as e:
                self.call('run', '--config', self.config(EXPLODING_TEXT),
                          '--out', self.out)
        self.assertEqual(e.exception.returncode, 4)
        self.assertTrue(os.path.exists(
            os.path.join(self.out, 'strong_rate.csv')))
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, ExperimentRun.ABORTED)
        self.assertEqual(run.aborts, 6)


class ValidateCommandTests(CommandTestCase):
    """Tests for the `validate` management command.

    Methods:
        test_valid: Prints the plan and the noise-floor verdict.
        test_direct_substeps: Lists the substep factor of every epsilon.
        test_invalid: Exit code 2 with the offending key.
        test_noise_floor: kolmogorov_rate with too few paths exits 3.
        test_under_resolved: A malliavin_check grid coarser than eps_min is
            flagged.
        test_shipped_configs: Every example config validates, without
            resolution warnings.

    """

    def test_valid(self):
        output = self.call('validate', '--config', self.config(STRONG_TEXT))
        self.assertIn('strong_rate', output)
        self.assertIn('derivatives  ok', output)
        self.assertIn('required n_paths', output)
        self.assertIn('Config is valid.', output)
        self.assertFalse(ExperimentRun.objects.exists())

    def test_direct_substeps(self):
        text = STRONG_TEXT + 'run.sk_scheme = direct\n'
        output = self.call('validate', '--config', self.config(text))
        self.assertIn('direct scheme, 1 substep(s)', output)
        self.assertIn('direct scheme, 4 substep(s)', output)
        self.assertIn('noise        sampled on 200 steps', output)

    def test_invalid(self):
        path = self.config(STRONG_TEXT + 'run.bogus = 1\n')
        with self.assertRaises(CommandError) as e:
            self.call('validate', '--config', path)
        self.assertEqual(e.exception.returncode, 2)
        self.assertIn('run.bogus', str(e.exception))

    def test_noise_floor(self):
        text = STRONG_TEXT.replace('strong_rate', 'kolmogorov_rate')
        with self.assertRaises(CommandError) as e:
            self.call('validate', '--config', self.config(text))
        self.assertEqual(e.exception.returncode, 3)
        self.assertIn('too few paths', str(e.exception))

    def test_under_resolved(self):
        text = STRONG_TEXT.replace('strong_rate', 'malliavin_check').replace(
            'run.epsilons = 0.0625, 0.25, 0.125',
            'run.epsilons = 0.25, 0.0078125')
        output = self.call('validate', '--config', self.config(text))
        self.assertIn('warning      dt = 0.02 exceeds eps_min', output)
        self.assertIn('n_steps >= 128', output)
        self.assertIn('Config is valid.', output)

    def test_shipped_configs(self):
        directory = os.path.join(settings.BASE_DIR, 'configs')
        names = sorted(os.listdir(directory))
        self.assertIn('malliavin_check.cfg', names)
        for name in names:
            with self.subTest(config=name):
                output = self.call('validate', '--config',
                                   os.path.join(directory, name))
                self.assertIn('Config is valid.', output)
                self.assertNotIn('warning', output)
