from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class FieldsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.fields'
    verbose_name = _("Campos vectoriales (tensor de tríadas y agitación)")
