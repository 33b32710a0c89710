from django.apps import AppConfig


class SbpConfig(AppConfig):
    name = "sbp"
    verbose_name = "Simulation-based programming"

    def ready(self):
        # Registers the native behaviours and scripted drivers the shipped
        # scenarios bind to.
        from .scenarios import behaviours  # noqa: F401
