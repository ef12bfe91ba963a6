"""Django application configuration for the competition app."""

from django.apps import AppConfig


class CompetitionConfig(AppConfig):
    """Registers the simulator, its management commands and the run store.

    Attributes:
        default_auto_field: Field type for auto-generated primary keys (BigAutoField)
        name: Application name used in Django's app registry ('competition')
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'competition'
    verbose_name = 'Competing first-passage percolation'
