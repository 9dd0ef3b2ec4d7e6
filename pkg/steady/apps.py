from django.apps import AppConfig


class SteadyConfig(AppConfig):
    name = 'steady'
    verbose_name = 'Fixed points'
