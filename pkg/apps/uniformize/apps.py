from django.apps import AppConfig


class UniformizeConfig(AppConfig):
    name = "apps.uniformize"
    verbose_name = "Metric uniformization"
