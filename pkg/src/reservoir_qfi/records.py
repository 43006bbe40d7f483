"""CSV/JSON emission and config loading.

Floats are written with 17 significant digits (round-trip exact), ``.`` as
decimal separator and ``,`` as delimiter.  Undefined values become empty
fields.  Files are written to a temporary sibling and renamed into place, so
a failed run never leaves a partial output.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import yaml

from .errors import ConfigurationError


def format_float(x) -> str:
    if x is None or x is np.ma.masked:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def _atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else format_float(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]):
    _atomic_write(path, csv_text(header, rows))


def write_json(path, record: dict[str, Any]):
    def clean(v):
        if isinstance(v, (float, np.floating)):
            return None if math.isnan(v) else float(v)
        if isinstance(v, np.bool_):
            return bool(v)
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        return v

    _atomic_write(path, json.dumps(clean(record), indent=2, sort_keys=True) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


TRAJECTORY_HEADER = ("t", "re_c", "im_c", "p", "gamma", "omega_shift")
QFI_HEADER = ("t", "F_exact", "F_markovian", "F_asymptotic")
SWEEP_HEADER = ("axis", "value", "t", "F")


def trajectory_rows(traj, rates):
    for k, t in enumerate(traj.times):
        c = traj.c[k]
        yield (t, c.real, c.imag, abs(c) ** 2, rates.gamma[k], rates.Omega[k])


def load_config(path) -> dict[str, Any]:
    """Read a YAML (or JSON) mapping."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config {path} must be a mapping")
    return data
