"""Flat-file formats: measurement CSVs, PDP CSV + JSON sidecars, truth and calibration JSON.

Every writer goes through :func:`write_atomic` so an interrupted run never
leaves a partially written file that still parses.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .pathloss import Condition, MeasurementRecord, Mode
from .pdp import PowerDelayProfile

PathLike = Union[str, Path]

MEASUREMENT_COLUMNS = ("f_ghz", "d3d_m", "pt_dbm", "gt_dbi", "gr_dbi", "pr_dbm", "gsym_db", "condition", "mode")
PDP_COLUMNS = ("delay_ns", "power_dbm")


class SchemaError(ValueError):
    """A file is missing required columns or keys."""


class PDPFormatError(ValueError):
    """A PDP CSV or its sidecar cannot be parsed."""


def fmt_float(x: float) -> str:
    """Shortest text that parses back to the same float."""
    return repr(float(x))


def write_atomic(path: PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: PathLike, data) -> None:
    write_atomic(path, dumps_json(data))


def read_json(path: PathLike):
    with open(path) as fh:
        return json.load(fh)


def rows_to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# measurements


def measurements_to_csv(records: Sequence[MeasurementRecord]) -> str:
    rows = (
        (r.f_ghz, r.d3d_m, r.pt_dbm, r.gt_dbi, r.gr_dbi, r.pr_dbm, r.gsym_db, r.condition.value, r.mode.value)
        for r in records
    )
    return rows_to_csv(MEASUREMENT_COLUMNS, rows)


def write_measurements(path: PathLike, records: Sequence[MeasurementRecord]) -> None:
    write_atomic(path, measurements_to_csv(records))


def parse_measurements(text: str) -> Tuple[List[MeasurementRecord], List[Tuple[int, str]]]:
    """Parse a measurement CSV.

    Returns the valid records and a list of ``(line_number, message)`` for
    rows that could not be parsed.  A missing column raises SchemaError.
    """
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [c for c in MEASUREMENT_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"measurement CSV is missing column(s): {', '.join(missing)}")
    records, errors = [], []
    for row in reader:
        line = reader.line_num
        try:
            nums = {c: float(row[c]) for c in MEASUREMENT_COLUMNS[:7]}
            records.append(MeasurementRecord(**nums, condition=row["condition"], mode=row["mode"]))
        except (TypeError, ValueError) as exc:
            errors.append((line, str(exc)))
    return records, errors


def read_measurements(path: PathLike):
    with open(path, newline="") as fh:
        return parse_measurements(fh.read())


# ---------------------------------------------------------------------------
# PDPs


def sidecar_path(csv_path: PathLike) -> Path:
    return Path(csv_path).with_suffix(".json")


def pdp_to_csv(pdp: PowerDelayProfile) -> str:
    return rows_to_csv(PDP_COLUMNS, zip(pdp.delays_ns.tolist(), pdp.powers_dbm.tolist()))


def write_pdp(csv_path: PathLike, pdp: PowerDelayProfile, meta: Optional[Dict] = None) -> None:
    """Write a PDP CSV and its JSON sidecar (``resolution_ns`` plus ``meta``)."""
    side = dict(meta or {})
    side["resolution_ns"] = pdp.resolution_ns
    if pdp.noise_floor_dbm is not None:
        side["noise_floor_dbm"] = pdp.noise_floor_dbm
    write_atomic(csv_path, pdp_to_csv(pdp))
    write_json(sidecar_path(csv_path), side)


def read_pdp(csv_path: PathLike) -> Tuple[PowerDelayProfile, Dict]:
    csv_path = Path(csv_path)
    side = sidecar_path(csv_path)
    try:
        meta = read_json(side)
    except FileNotFoundError:
        raise PDPFormatError(f"{csv_path.name}: missing sidecar {side.name}") from None
    except json.JSONDecodeError as exc:
        raise PDPFormatError(f"{side.name}: invalid JSON ({exc})") from None
    if not isinstance(meta, dict) or "resolution_ns" not in meta:
        raise PDPFormatError(f"{side.name}: sidecar lacks resolution_ns")
    try:
        with open(csv_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != PDP_COLUMNS:
                raise PDPFormatError(f"{csv_path.name}: expected header {','.join(PDP_COLUMNS)}")
            rows = [(float(a), float(b)) for a, b in reader]
        if not rows:
            raise PDPFormatError(f"{csv_path.name}: no samples")
        delays, powers = (np.array(c) for c in zip(*rows))
        floor = meta.get("noise_floor_dbm")
        pdp = PowerDelayProfile(delays, powers, float(meta["resolution_ns"]), None if floor is None else float(floor))
    except PDPFormatError:
        raise
    except (ValueError, TypeError) as exc:
        raise PDPFormatError(f"{csv_path.name}: {exc}") from None
    return pdp, meta


def calibration_filename(band: float, condition, mode) -> str:
    return f"decay.{float(band):g}.{Condition.parse(condition).value}.{Mode.parse(mode).value}.json"


def clean_float(x) -> Optional[float]:
    """JSON-safe float (None for missing or non-finite values)."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None
