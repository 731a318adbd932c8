from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class PolytopeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.polytope'
    verbose_name = _("Politopo sectorial y coeficientes promediados q")
