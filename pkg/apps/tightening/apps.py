from django.apps import AppConfig


class TighteningConfig(AppConfig):
    name = "apps.tightening"
    verbose_name = "Sweepout tightening"
