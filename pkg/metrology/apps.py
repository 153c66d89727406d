from django.apps import AppConfig


class MetrologyConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "metrology"
