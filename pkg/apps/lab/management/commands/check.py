from django.utils.translation import gettext_lazy as _

from apps.lab.enums import LabCommand
from apps.lab.management.base import LabBaseCommand


class Command(LabBaseCommand):
    help = _("Stationary acceptance checks of the full system; exit 1 if a gated check fails")
    command = LabCommand.CHECK
