"""
apps.simulation.writers
-----------------------
Observable tables and full-state snapshots.

CSV columns: t, U, V, T, ratio and one flag column (good_flag for SDE runs,
reflected_flag for effective runs). Snapshots are a JSON header line followed
by little-endian float64 rows.
"""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from apps.simulation.types import PathRecorder

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def observable_frame(rec: PathRecorder, flags: Optional[np.ndarray] = None, flag_name: str = "good_flag") -> pd.DataFrame:
    if flags is None:
        flags = rec.flags if rec.flags is not None else np.zeros(len(rec), dtype=bool)
    return pd.DataFrame({
        "t": rec.times,
        "U": rec.u,
        "V": rec.v,
        "T": rec.t_obs,
        "ratio": rec.ratio,
        flag_name: np.asarray(flags, dtype=int),
    })


def write_observables_csv(path: Path, rec: PathRecorder, flags: Optional[np.ndarray] = None,
                          flag_name: str = "good_flag") -> Path:
    path = Path(path)
    frame = observable_frame(rec, flags, flag_name)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"Observables escritos: {path} ({len(frame)} filas)")
    return path


def write_snapshot(path: Path, rec: PathRecorder, header: Optional[dict] = None) -> Path:
    """
    Raises:
        ValueError: If the recorder did not keep states.
    """
    if rec.states is None:
        raise ValueError("El registro no guardó estados completos (keep_states=False)")
    path = Path(path)
    meta = {"dtype": "<f8", "rows": int(rec.states.shape[0]), "cols": int(rec.states.shape[1]),
            "times": rec.times.tolist(), **(header or {})}
    with open(path, "wb") as fh:
        fh.write((json.dumps(meta, sort_keys=True) + "\n").encode("utf-8"))
        fh.write(np.ascontiguousarray(rec.states, dtype="<f8").tobytes())
    return path


def read_snapshot(path: Path):
    with open(path, "rb") as fh:
        meta = json.loads(fh.readline().decode("utf-8"))
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(meta["rows"], meta["cols"])
    return meta, data
