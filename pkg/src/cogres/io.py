"""On-disk formats: headerless CSV for series and matrices, JSON for manifests and reports."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Connectome, Subject, SubjectManifest, TimeSeries
from .errors import DataError, DimensionError, FormatError, ValidationError

FLOAT_FMT = "%.17g"


def _read_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read file ({exc.strerror})") from None
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise FormatError(
                f"{path}: ragged row {lineno}: expected {width} columns, got {len(cells)}"
            )
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise FormatError(
                    f"{path}: row {lineno}, column {col}: cannot parse {cell.strip()!r}"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {lineno}, column {col}: non-finite value {cell.strip()}")
            row.append(v)
        rows.append(row)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def _write_matrix(a: np.ndarray, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, a, fmt=FLOAT_FMT, delimiter=",", newline="\n")


def load_timeseries(path, expected_channels: Optional[int] = None) -> TimeSeries:
    """Read a headerless CSV with one timepoint per row."""
    a = _read_matrix(path)
    if expected_channels is not None and a.shape[1] != expected_channels:
        raise DimensionError(f"{path}: expected {expected_channels} channels, found {a.shape[1]}")
    return TimeSeries(a)


def save_timeseries(ts: TimeSeries, path) -> None:
    _write_matrix(ts.data, path)


def save_connectome(c: Connectome, path) -> None:
    _write_matrix(c.weights, path)


def load_connectome(path, label: Optional[str] = None) -> Connectome:
    a = _read_matrix(path)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{path}: connectome must be square, got {a.shape[0]}x{a.shape[1]}")
    try:
        return Connectome(a, label=label)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def load_manifest(path, check_files: bool = True) -> SubjectManifest:
    """Read a manifest JSON. Subject paths are resolved relative to the manifest.

    With ``check_files`` every subject CSV is parsed (and cached on the
    manifest) so that channel-count mismatches surface at load time.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"{path}: cannot read manifest ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: manifest must be a JSON object")
    for key in ("atlas_dim", "subjects"):
        if key not in raw:
            raise ValidationError(f"{path}: manifest is missing field {key!r}")
    subjects = []
    for i, entry in enumerate(raw["subjects"]):
        missing = [k for k in ("id", "path", "group") if k not in entry]
        if missing:
            raise ValidationError(f"{path}: subject #{i} is missing {missing}")
        p = Path(entry["path"])
        if not p.is_absolute():
            p = path.parent / p
        subjects.append(Subject(id=str(entry["id"]), path=p, group=str(entry["group"])))
    manifest = SubjectManifest(subjects=subjects, atlas_dim=raw["atlas_dim"])
    if check_files:
        for s in manifest.subjects:
            if not s.path.is_file():
                raise ValidationError(f"{path}: subject {s.id!r} file not found: {s.path}")
            manifest.timeseries(s.id)
    return manifest


def save_manifest(manifest: SubjectManifest, path) -> None:
    """Write a manifest; subject paths are stored relative to its directory when possible."""
    path = Path(path)
    base = path.parent.resolve()
    entries = []
    for s in manifest.subjects:
        p = Path(s.path).resolve()
        try:
            rel = p.relative_to(base).as_posix()
        except ValueError:
            rel = str(p)
        entries.append({"id": s.id, "path": rel, "group": s.group})
    write_json({"atlas_dim": manifest.atlas_dim, "subjects": entries}, path)


def write_json(obj, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps(obj) + "\n")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=False)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
