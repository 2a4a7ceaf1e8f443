from django.core.management.base import BaseCommand, CommandError

from dynamics.assumptions import check_derivatives
from experiments.config import load_config
from experiments.planning import (plan_noise_floor, plan_resolution,
                                  plan_substeps)
from experiments.serializers import KOLMOGOROV_RATE
from skjump.exceptions import NoiseFloorError, SkjumpError


class Command(BaseCommand):
    """`manage.py validate --config FILE`

    Parses and validates a config, builds its model, checks the model's
    derivative fields and prints the run plan without simulating.
    """

    help = 'Validate an experiment config and print its plan.'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True,
                            help='experiment config file')

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'])
            model = config.build_model()
            error = check_derivatives(model, config.probe_box(),
                                      rng_seed=config.seed)
            factors, finest = plan_substeps(config)
        except SkjumpError as e:
            raise CommandError(str(e), returncode=e.exit_code)

        write = self.stdout.write
        write('experiment   {}'.format(config.experiment))
        write('model        {} {}'.format(config.model_name,
                                          dict(config.model_params)))
        write('config hash  {}'.format(config.config_hash))
        write('derivatives  ok (max relative error {:.3g})'.format(error))
        write('grid         T = {:g}, n_steps = {}, dt = {:.6g}'.format(
            config.T, config.n_steps, config.grid.dt))
        for eps in config.epsilons:
            write('eps {:<10.6g} {} scheme, {} substep(s) per step'.format(
                eps, config.sk_scheme, factors[eps]))
        if finest > 1:
            write('noise        sampled on {} steps'.format(
                config.n_steps * finest))
        warning = plan_resolution(config)
        if warning:
            write(self.style.WARNING('warning      ' + warning))
        if config.epsilons:
            plan = plan_noise_floor(config.epsilons, config.n_paths)
            if config.experiment == KOLMOGOROV_RATE and not plan.ok:
                raise CommandError(plan.describe(),
                                   returncode=NoiseFloorError.exit_code)
            write(plan.describe())
        self.stdout.write(self.style.SUCCESS('Config is valid.'))
