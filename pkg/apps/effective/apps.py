from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class EffectiveConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.effective'
    verbose_name = _("Difusión efectiva en el cono")
