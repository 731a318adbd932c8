"""
apps.lab.services.reports
-------------------------
Writes a command's tables, documents and check reports, then the manifest
with the SHA-256 of every artifact. Writing into one output directory is
serialized with a file lock.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Iterable, List

from django.conf import settings
from django.utils.translation import gettext_lazy as _
from filelock import FileLock

from apps.experiments.types import to_jsonable
from apps.lab.exceptions import ArtifactIoException
from apps.lab.types import RunResults
from apps.runlog import log_event
from apps.simulation.writers import CSV_FLOAT_FORMAT, write_snapshot

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CHECKS_NAME = "checks.json"
LOCK_NAME = ".lab.lock"


def json_text(payload) -> str:
    """Sorted keys, two-space indent, no NaN, trailing newline."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def file_sha256(path: Path) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            sha.update(chunk)
    return sha.hexdigest()


class ReportService:

    @staticmethod
    def _write_artifacts(results: RunResults, out_dir: Path, formats: Iterable[str]) -> List[Path]:
        formats = set(formats)
        written = []
        if "csv" in formats:
            for name, frame in sorted(results.tables.items()):
                path = out_dir / f"{name}.csv"
                frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
                written.append(path)
        if "json" in formats:
            for name, document in sorted(results.documents.items()):
                path = out_dir / f"{name}.json"
                path.write_text(json_text(document), encoding="utf-8")
                written.append(path)
            if results.reports:
                path = out_dir / CHECKS_NAME
                path.write_text(json_text([r.as_dict() for r in results.reports]), encoding="utf-8")
                written.append(path)
        for name, rec in sorted(results.snapshots.items()):
            written.append(write_snapshot(out_dir / f"{name}.bin", rec, {"command": results.command}))
        return written

    @staticmethod
    def emit_report(results: RunResults, out_dir: Path, formats: Iterable[str] = ("csv", "json")) -> dict:
        """
        Write every artifact of `results` into out_dir and the manifest last.

        Returns:
            dict: The manifest: command, config hash, code version, seed, wall
            time, per-check verdicts, artifacts with their SHA-256, and the
            top-level pass (all gated checks passed).

        Raises:
            ArtifactIoException: If a file cannot be written.
        """
        out_dir = Path(out_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            with FileLock(str(out_dir / LOCK_NAME)):
                written = ReportService._write_artifacts(results, out_dir, formats)
                artifacts = []
                for path in sorted(written, key=lambda p: p.name):
                    digest = file_sha256(path)
                    artifacts.append({"name": path.name, "sha256": digest, "bytes": path.stat().st_size})
                    log_event("artifact", path=str(path), sha256=digest)
                manifest = {
                    "command": results.command,
                    "config_hash": results.config_hash,
                    "code_version": settings.LAB_CODE_VERSION,
                    "seed": results.seed,
                    "wall_time_seconds": results.wall_time,
                    "pass": results.passed,
                    "checks": [
                        {"check": r.check.value, "pass": bool(r.passed), "gated": r.gated} for r in results.reports
                    ],
                    "artifacts": artifacts,
                }
                (out_dir / MANIFEST_NAME).write_text(json_text(manifest), encoding="utf-8")
        except OSError as exc:
            logger.error(f"Fallo de E/S en {out_dir}: {exc}")
            raise ArtifactIoException(
                _("Cannot write artifacts to %(dir)s: %(err)s") % {'dir': out_dir, 'err': exc}, path=out_dir
            ) from exc
        logger.info(f"Comando {results.command}: {len(artifacts)} artefactos en {out_dir}, pass={manifest['pass']}")
        return manifest
