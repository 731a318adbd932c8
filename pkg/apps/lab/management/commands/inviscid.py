from django.utils.translation import gettext_lazy as _

from apps.lab.enums import LabCommand
from apps.lab.management.base import LabBaseCommand, float_list


class Command(LabBaseCommand):
    help = _("Energy distance between full-system and averaged stationary samples over a descending eps grid")
    command = LabCommand.INVISCID

    def add_command_arguments(self, parser):
        parser.add_argument("--eps", type=float_list, default=None, help=_("Comma-separated eps values, descending"))

    def command_options(self, options) -> dict:
        return {"eps": options["eps"]}
