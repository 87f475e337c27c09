"""CSV panels, JSON sidecars, and report schemas.

Both assignment and outcome panels use the layout::

    unit,t1,t2,...,tS
    1,0,1,...
    2,1,0,...

Every error message points at the 1-based line and column of the bad cell.
"""

from __future__ import annotations

import csv
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .design import AssignmentMatrix, DesignSpec
from .synthetic import OutcomeMatrix

__all__ = [
    "DataError",
    "SCHEMA_VERSION",
    "load_schema",
    "read_assignment_csv",
    "read_outcome_csv",
    "read_sidecar",
    "sidecar_path",
    "validate_report",
    "write_assignment_csv",
    "write_outcome_csv",
    "write_sidecar",
]

SCHEMA_VERSION = "1.0"

PathLike = Union[str, Path]


class DataError(ValueError):
    """Malformed input data."""


def _header(n_steps: int) -> list[str]:
    return ["unit"] + [f"t{s}" for s in range(1, n_steps + 1)]


def _read_rows(path: PathLike) -> tuple[list[str], list[tuple[int, list[str]]]]:
    with open(path, newline="") as fh:
        rows = [(i, row) for i, row in enumerate(csv.reader(fh), start=1) if row]
    if not rows:
        raise DataError(f"{path}: no data rows")
    _, header = rows[0]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    if not header or header[0].strip() != "unit":
        raise DataError(f"{path}: line 1: header must start with 'unit'")
    expected = _header(len(header) - 1)
    if [h.strip() for h in header] != expected or len(header) < 2:
        raise DataError(
            f"{path}: line 1: header must be 'unit,t1,...,tS', got {','.join(header)!r}"
        )
    width = len(header)
    for line, row in body:
        if len(row) != width:
            raise DataError(
                f"{path}: line {line}: expected {width} fields, got {len(row)}"
            )
    return header, body


def read_assignment_csv(
    path: PathLike, spec: Optional[DesignSpec] = None, seed: Optional[int] = None
) -> AssignmentMatrix:
    header, body = _read_rows(path)
    values = np.empty((len(body), len(header) - 1), dtype=np.int8)
    for r, (line, row) in enumerate(body):
        for c, cell in enumerate(row[1:]):
            text = cell.strip()
            if text not in ("0", "1"):
                raise DataError(
                    f"{path}: line {line}, column {c + 2} ({header[c + 1]}): "
                    f"assignment must be 0 or 1, got {cell!r}"
                )
            values[r, c] = int(text)
    return AssignmentMatrix(values=values, spec=spec, seed=seed)


def write_assignment_csv(W: AssignmentMatrix, path: PathLike) -> None:
    values = np.asarray(W.values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_header(values.shape[1]))
        for n, row in enumerate(values, start=1):
            writer.writerow([n] + [int(v) for v in row])


def read_outcome_csv(path: PathLike) -> OutcomeMatrix:
    header, body = _read_rows(path)
    values = np.empty((len(body), len(header) - 1), dtype=float)
    ids = []
    for r, (line, row) in enumerate(body):
        ids.append(row[0].strip())
        for c, cell in enumerate(row[1:]):
            try:
                value = float(cell)
            except ValueError:
                value = math.nan
            if not math.isfinite(value):
                raise DataError(
                    f"{path}: line {line}, column {c + 2} ({header[c + 1]}): "
                    f"outcome must be a finite number, got {cell!r}"
                )
            values[r, c] = value
    return OutcomeMatrix(values, unit_ids=tuple(ids))


def write_outcome_csv(Y: OutcomeMatrix, path: PathLike) -> None:
    values = np.asarray(Y.values, dtype=float)
    ids = Y.unit_ids or tuple(str(n) for n in range(1, values.shape[0] + 1))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_header(values.shape[1]))
        for uid, row in zip(ids, values):
            # repr round-trips a float exactly
            writer.writerow([uid] + [repr(float(v)) for v in row])


def sidecar_path(csv_path: PathLike) -> Path:
    return Path(str(csv_path) + ".json")


def write_sidecar(W: AssignmentMatrix, csv_path: PathLike) -> dict:
    payload = {
        "schema": "assignment_sidecar",
        "schema_version": SCHEMA_VERSION,
        "spec": W.spec.to_dict() if W.spec is not None else None,
        "seed": W.seed,
    }
    sidecar_path(csv_path).write_text(json.dumps(payload, indent=2) + "\n")
    return payload


def read_sidecar(path: PathLike) -> tuple[Optional[DesignSpec], Optional[int]]:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from None
    spec = payload.get("spec")
    return (DesignSpec.from_dict(spec) if spec else None), payload.get("seed")


def load_schema(name: str) -> dict:
    text = resources.files("rbsd").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def validate_report(report: dict) -> None:
    """Check a report against the schema named in its ``schema`` field."""
    import jsonschema

    jsonschema.validate(report, load_schema(report["schema"]))


def dumps(payload: Any) -> str:
    """Deterministic JSON: sorted keys, NaN written as null."""
    return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj
