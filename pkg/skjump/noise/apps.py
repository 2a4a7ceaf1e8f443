from django.apps import AppConfig


class NoiseConfig(AppConfig):
    name = 'noise'
