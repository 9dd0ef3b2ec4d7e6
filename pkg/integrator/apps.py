from django.apps import AppConfig


class IntegratorConfig(AppConfig):
    name = 'integrator'
    verbose_name = 'Numeric integrator'
