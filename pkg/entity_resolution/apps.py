from django.apps import AppConfig


class EntityResolutionConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'entity_resolution'
    verbose_name = 'Entity resolution'
