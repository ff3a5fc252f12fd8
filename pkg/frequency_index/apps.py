from django.apps import AppConfig


class FrequencyIndexConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'frequency_index'
    verbose_name = 'Frequency index'
