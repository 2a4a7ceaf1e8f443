from django.core.management.base import BaseCommand, CommandError

from experiments.config import load_config
from experiments.models import ExperimentRun
from experiments.runner import run
from skjump.exceptions import NumericalAbort, SkjumpError


def seed_type(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise ValueError(text)
    return value


class Command(BaseCommand):
    """`manage.py run --config FILE --out DIR [--seed U64] [--threads N]`

    Runs one experiment and records it in the run registry. Exit codes:
    2 config error, 3 noise-floor abort, 4 numerical abort.

    References:
        * https://docs.djangoproject.com/en/4.2/howto/custom-management-commands/

    """

    help = 'Run an experiment config and write its CSV tables and manifest.'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True,
                            help='experiment config file')
        parser.add_argument('--out', required=True, help='output directory')
        parser.add_argument('--seed', type=seed_type, default=None,
                            help='override run.seed, 0 <= seed < 2**64')
        parser.add_argument('--threads', default=None,
                            help='worker processes or "auto"')
        parser.add_argument('--no-record', action='store_true',
                            help='do not store the run in the registry')

    def handle(self, *args, **options):
        record = not options['no_record']
        try:
            config = load_config(options['config']).with_overrides(
                seed=options['seed'])
            bundle = run(config, options['out'], threads=options['threads'])
        except NumericalAbort as e:
            if record and e.bundle is not None:
                ExperimentRun.record(config, e.bundle, ExperimentRun.ABORTED)
            raise CommandError(str(e), returncode=e.exit_code)
        except SkjumpError as e:
            raise CommandError(str(e), returncode=e.exit_code)

        if record:
            ExperimentRun.record(config, bundle)
        self.stdout.write(self.style.SUCCESS(
            'Wrote {} to {} (config {})'.format(
                ', '.join(bundle.files), bundle.out_dir,
                config.config_hash[:12])))
