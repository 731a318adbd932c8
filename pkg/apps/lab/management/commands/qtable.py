from django.utils.translation import gettext_lazy as _

from apps.lab.enums import LabCommand
from apps.lab.management.base import LabBaseCommand


class Command(LabBaseCommand):
    help = _("Averaged coefficients q(r, 1) on a grid of ratios in [1, lambda_N]")
    command = LabCommand.QTABLE

    def add_command_arguments(self, parser):
        parser.add_argument("--ratios", type=int, default=None, help=_("Grid size; experiment.q_grid_size by default"))

    def command_options(self, options) -> dict:
        return {"ratios": options["ratios"]}
