"""
apps.lab.management.base
------------------------
Common surface of the lab subcommands: --config, --seed, --threads, --out.
A subcommand declares its LabCommand and, optionally, its own flags.

Exit status is 0 iff every gated check passed. On failure a JSON object
with the error is printed on stdout and a styled line on stderr.
"""

import json
import logging
from pathlib import Path

from django.core.exceptions import ValidationError as DjangoValidationError
from django.core.management.base import BaseCommand, CommandError
from django.utils.translation import gettext_lazy as _

from apps.effective.exceptions import EffectiveException
from apps.experiments.exceptions import ExperimentsException
from apps.fields.exceptions import FieldsException
from apps.lab.enums import LabCommand
from apps.lab.exceptions import LabException
from apps.lab.services import ConfigService, LabService
from apps.polytope.exceptions import PolytopeException
from apps.simulation.exceptions import SimulationException
from apps.spectrum.exceptions import SpectrumException

logger = logging.getLogger(__name__)

LAB_ERRORS = (
    DjangoValidationError,
    LabException,
    SpectrumException,
    FieldsException,
    PolytopeException,
    SimulationException,
    EffectiveException,
    ExperimentsException,
)


def float_list(text: str):
    """Comma-separated floats, e.g. "0.4,0.1,0.025"."""
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise ValueError(f"not a comma-separated list of numbers: {text!r}") from exc


def failure_payload(command: LabCommand, exc: Exception) -> dict:
    payload = {"command": command.value, "pass": False, "error": type(exc).__name__}
    if isinstance(exc, DjangoValidationError):
        payload["message"] = "; ".join(exc.messages)
        if hasattr(exc, "error_dict"):
            payload["fields"] = exc.message_dict
    else:
        payload["message"] = str(getattr(exc, "mensaje", exc))
    return payload


class LabBaseCommand(BaseCommand):
    command: LabCommand

    def add_arguments(self, parser):
        parser.add_argument("--config", type=Path, default=None, help=_("JSON run configuration; defaults when omitted"))
        parser.add_argument("--seed", type=int, default=None, help=_("Overrides sim.seed (unsigned 64-bit)"))
        parser.add_argument("--threads", type=int, default=None, help=_("Worker processes for ensembles and sweeps"))
        parser.add_argument("--out", type=Path, default=None, help=_("Output directory; overrides LAB_OUTPUT_DIR"))
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def command_options(self, options) -> dict:
        return {}

    def fail(self, payload: dict):
        self.stdout.write(json.dumps(payload, sort_keys=True))
        self.stderr.write(self.style.ERROR(_("%(cmd)s falló: %(msg)s") % {
            'cmd': self.command.value, 'msg': payload.get("message", ""),
        }))
        raise CommandError(payload.get("message", ""), returncode=1)

    def handle(self, *args, **options):
        try:
            cfg = ConfigService.with_seed(ConfigService.load_config(options["config"]), options["seed"])
            manifest = LabService.dispatch(self.command, cfg, out=options["out"], threads=options["threads"],
                                           **self.command_options(options))
        except LAB_ERRORS as exc:
            logger.error(f"Comando {self.command.value} abortado: {exc}")
            self.fail(failure_payload(self.command, exc))

        summary = {
            "command": manifest["command"],
            "pass": manifest["pass"],
            "config_hash": manifest["config_hash"],
            "checks": manifest["checks"],
            "artifacts": [a["name"] for a in manifest["artifacts"]],
        }
        if LabService.exit_status(manifest) != 0:
            failed = [c["check"] for c in manifest["checks"] if c["gated"] and not c["pass"]]
            summary["failed_checks"] = failed
            self.fail({**summary, "message": f"failed checks: {', '.join(failed)}"})
        self.stdout.write(json.dumps(summary, sort_keys=True))
        self.stderr.write(self.style.SUCCESS(_("%(cmd)s completado: %(n)s artefactos") % {
            'cmd': self.command.value, 'n': len(manifest["artifacts"]),
        }))
