from django.utils.translation import gettext_lazy as _

from apps.lab.enums import LabCommand
from apps.lab.management.base import LabBaseCommand
from apps.simulation.enums import SimMode


class Command(LabBaseCommand):
    help = _("One trajectory; writes the observables table and a run summary")
    command = LabCommand.SIMULATE

    def add_command_arguments(self, parser):
        parser.add_argument("--mode", choices=SimMode.values(), default=None,
                            help=_("Overrides sim.mode (full, fast, reference, forcing, effective)"))

    def command_options(self, options) -> dict:
        return {"mode": options["mode"]}
