from django.utils.translation import gettext_lazy as _

from apps.lab.enums import LabCommand
from apps.lab.management.base import LabBaseCommand, float_list


class Command(LabBaseCommand):
    help = _("Relaxation of a fast-only ensemble towards q on one fiber")
    command = LabCommand.EQUILIBRATE

    def add_command_arguments(self, parser):
        parser.add_argument("--eta", type=float, default=None, help=_("Distance of u/v from every eigenvalue"))
        parser.add_argument("--t-grid", type=float_list, default=None, help=_("Comma-separated observation times"))

    def command_options(self, options) -> dict:
        return {"eta": options["eta"], "t_grid": options["t_grid"]}
