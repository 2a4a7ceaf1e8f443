from django.apps import AppConfig


class IntegrateConfig(AppConfig):
    name = 'integrate'
