from django.apps import AppConfig


class BubblesConfig(AppConfig):
    name = "apps.bubbles"
    verbose_name = "Bubble analysis"
