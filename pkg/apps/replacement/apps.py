from django.apps import AppConfig


class ReplacementConfig(AppConfig):
    name = "apps.replacement"
    verbose_name = "Harmonic replacement"
