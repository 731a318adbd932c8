from django.utils.translation import gettext_lazy as _

from apps.lab.enums import LabCommand
from apps.lab.management.base import LabBaseCommand


class Command(LabBaseCommand):
    help = _("Triad tensor as JSON entries {a, b, c, t} with a < b, plus the mode basis")
    command = LabCommand.DRIFT_TABLE
