from django.apps import AppConfig


class AnalyticConfig(AppConfig):
    name = 'analytic'
    verbose_name = 'Closed-form solutions'
