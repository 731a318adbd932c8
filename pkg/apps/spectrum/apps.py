from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class SpectrumConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.spectrum'
    verbose_name = _("Núcleo espectral (espectro, parámetros, observables, cono)")
