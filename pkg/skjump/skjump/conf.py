"""Simulation settings.

Reads the ``SKJUMP`` dict from Django settings, falling back to the
defaults below for any key it leaves out. Works the same way as
``rest_framework.settings.api_settings``:

    from skjump.conf import sim_settings

    floor = sim_settings.DELTA_LOG

References:
    * https://www.django-rest-framework.org/api-guide/settings/

"""
import os

from django.conf import settings
from django.test.signals import setting_changed
from rest_framework.settings import APISettings

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'skjump.settings')

DEFAULTS = {
    # positivity floor for 1 + dc/dx under the logarithm of the closed form
    'DELTA_LOG': 1e-6,
    # slack on probed (H1)/(H2) inequalities
    'TOL_ASSUME': 1e-9,
    # mark draws per step for Monte Carlo compensators
    'M_COMP': 32,
    # marks per r for jump Malliavin norms
    'M_XI': 16,
    # marks per probe when estimating nu-integrals in assumption checks
    'ASSUMPTION_MARKS': 64,
    'FD_REL_TOL': 1e-5,
    'KS_COEFFICIENT': 1.36,
    'NOISE_FLOOR_MARGIN': 5.0,
    # SK direct scheme needs fine dt <= eps / SK_STABILITY_RATIO
    'SK_STABILITY_RATIO': 10.0,
    'CHUNK_SIZE': 500,
    'ORACLE_PATHS': 50,
    'ORACLE_R_POINTS': 10,
}


class SimulationSettings(APISettings):
    """APISettings reading ``settings.SKJUMP`` instead of REST_FRAMEWORK."""

    @property
    def user_settings(self):
        if not hasattr(self, '_user_settings'):
            self._user_settings = getattr(settings, 'SKJUMP', {})
        return self._user_settings

    def pin(self, user_settings):
        """Use ``user_settings`` instead of settings.SKJUMP until reload."""
        self.reload()
        self._user_settings = dict(user_settings)

    def snapshot(self):
        return {key: getattr(self, key) for key in self.defaults}


sim_settings = SimulationSettings(None, DEFAULTS, ())


def reload_sim_settings(*args, **kwargs):
    if kwargs['setting'] == 'SKJUMP':
        sim_settings.reload()


setting_changed.connect(reload_sim_settings)
