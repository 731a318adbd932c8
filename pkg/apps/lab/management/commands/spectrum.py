from django.utils.translation import gettext_lazy as _

from apps.lab.enums import LabCommand
from apps.lab.management.base import LabBaseCommand


class Command(LabBaseCommand):
    help = _("Eigenvalue ladder, forcing budgets and admissible boundary exponents")
    command = LabCommand.SPECTRUM
