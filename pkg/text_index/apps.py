from django.apps import AppConfig


class TextIndexConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'text_index'
    verbose_name = 'Text index'
