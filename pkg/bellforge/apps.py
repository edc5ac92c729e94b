from django.apps import AppConfig


class BellforgeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'bellforge'
    verbose_name = 'Bell inequalities with lower-order correlations'
