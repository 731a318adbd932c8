from django.utils.translation import gettext_lazy as _

from apps.lab.enums import LabCommand
from apps.lab.management.base import LabBaseCommand


class Command(LabBaseCommand):
    help = _("Condensation bounds and internal checks of the averaged diffusion")
    command = LabCommand.CONDENSATION
