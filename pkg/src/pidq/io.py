"""Text file formats: JSON distributions, marginals and libraries; CSV samples.

Every JSON object written here carries a ``schema_version`` field. Writes go
to a temporary file in the target directory which is then renamed over the
destination, so a failed run never leaves a half-written file behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .discretize import SampleTable
from .dist import Cardinalities, JointDist, PairwiseMarginals, max_cells
from .errors import ValidationError
from .selection import ModelLibrary

SCHEMA_VERSION = 1


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load_json(path) -> dict:
    text = _read_text(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: top level must be a JSON object")
    version = obj.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"{path}: unsupported schema_version {version!r}")
    return obj


def _field(obj: dict, key: str, path):
    if key not in obj:
        raise ValidationError(f"{path}: missing field {key!r}")
    return obj[key]


def _numeric_array(value, name: str, path) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: field {name!r} must hold numbers") from exc
    if arr.dtype == object:
        raise ValidationError(f"{path}: field {name!r} is ragged")
    return arr


def write_text_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary sibling file and an atomic rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_json_atomic(path, obj: dict) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


# --------------------------------------------------------------------------
# distributions
# --------------------------------------------------------------------------


def dist_to_dict(dist: JointDist) -> dict:
    """Flat layout: ``p[(i1 * n2 + i2) * ny + iy]``."""
    return {
        "schema_version": SCHEMA_VERSION,
        "cardinalities": list(dist.shape),
        "p": dist.probs.ravel().tolist(),
    }


def dist_from_dict(obj: dict, path="<dist>") -> JointDist:
    card = _field(obj, "cardinalities", path)
    if not (isinstance(card, list) and len(card) == 3 and all(isinstance(c, int) and c >= 1 for c in card)):
        raise ValidationError(f"{path}: cardinalities must be three positive integers, got {card!r}")
    cells = card[0] * card[1] * card[2]
    cap = max_cells()
    if cells > cap:
        raise ValidationError(f"{path}: {cells} cells exceeds the cap of {cap} (PIDQ_MAX_CELLS)")
    p = _numeric_array(_field(obj, "p", path), "p", path)
    if p.ndim != 1 or p.size != cells:
        raise ValidationError(f"{path}: p must be a flat list of {cells} numbers, got shape {p.shape}")
    bad = ~np.isfinite(p)
    if bad.any():
        k = int(np.argmax(bad))
        raise ValidationError(f"{path}: p[{k}] is not finite")
    if np.any(p < 0):
        k = int(np.argmax(p < 0))
        raise ValidationError(f"{path}: p[{k}] = {float(p[k])!r} is negative")
    return JointDist(Cardinalities(*card), p.reshape(card))


def read_dist(path) -> JointDist:
    return dist_from_dict(_load_json(path), path)


def write_dist(path, dist: JointDist) -> None:
    write_json_atomic(path, dist_to_dict(dist))


# --------------------------------------------------------------------------
# marginals
# --------------------------------------------------------------------------


def marginals_to_dict(m: PairwiseMarginals) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "m1y": m.m1y.tolist(), "m2y": m.m2y.tolist()}
    if m.m12 is not None:
        out["m12"] = m.m12.tolist()
    return out


def marginals_from_dict(obj: dict, path="<marginals>") -> PairwiseMarginals:
    m1y = _numeric_array(_field(obj, "m1y", path), "m1y", path)
    m2y = _numeric_array(_field(obj, "m2y", path), "m2y", path)
    m12 = obj.get("m12")
    if m12 is not None:
        m12 = _numeric_array(m12, "m12", path)
    for name, arr in (("m1y", m1y), ("m2y", m2y), ("m12", m12)):
        if arr is not None and arr.ndim != 2:
            raise ValidationError(f"{path}: {name} must be a 2-d nested array")
    if m1y.shape[0] * m2y.shape[0] * m1y.shape[1] > max_cells():
        raise ValidationError(f"{path}: implied joint exceeds the cell cap of {max_cells()} (PIDQ_MAX_CELLS)")
    try:
        return PairwiseMarginals(m1y, m2y, m12)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def read_marginals(path) -> PairwiseMarginals:
    return marginals_from_dict(_load_json(path), path)


def write_marginals(path, m: PairwiseMarginals) -> None:
    write_json_atomic(path, marginals_to_dict(m))


# --------------------------------------------------------------------------
# libraries
# --------------------------------------------------------------------------


def library_to_dict(lib: ModelLibrary) -> dict:
    return {"schema_version": SCHEMA_VERSION, **lib.to_dict()}


def read_library(path) -> ModelLibrary:
    obj = _load_json(path)
    try:
        return ModelLibrary.from_dict(obj)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def write_library(path, lib: ModelLibrary) -> None:
    write_json_atomic(path, library_to_dict(lib))


# --------------------------------------------------------------------------
# samples
# --------------------------------------------------------------------------


def _modality_columns(header: list[str], name: str, path) -> list[int]:
    if name in header:
        if any(h.startswith(f"{name}_") for h in header):
            raise ValidationError(f"{path}: header mixes {name!r} with {name}_<k> columns")
        return [header.index(name)]
    cols, k = [], 0
    while f"{name}_{k}" in header:
        cols.append(header.index(f"{name}_{k}"))
        k += 1
    if not cols:
        raise ValidationError(f"{path}: header has no {name!r} or {name}_0 column")
    stray = [h for h in header if h.startswith(f"{name}_") and header.index(h) not in cols]
    if stray:
        raise ValidationError(f"{path}: column {stray[0]!r} breaks the {name}_0..{name}_{k - 1} sequence")
    return cols


def parse_samples(text: str, path="<samples>") -> SampleTable:
    """Parse delimited text with a header naming ``x1``/``x1_<k>``, ``x2``/``x2_<k>`` and ``y``.

    The delimiter is sniffed among comma, tab and semicolon. Row numbers in
    error messages count the header as row 1.
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ValidationError(f"{path}: empty samples file")
    try:
        dialect = csv.Sniffer().sniff(lines[0], delimiters=",\t;")
    except csv.Error:
        dialect = csv.excel
    rows = list(csv.reader(io.StringIO(text), dialect))
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ValidationError(f"{path}: duplicate column names in header")
    c1 = _modality_columns(header, "x1", path)
    c2 = _modality_columns(header, "x2", path)
    if "y" not in header:
        raise ValidationError(f"{path}: header has no 'y' column")
    cy = header.index("y")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ValidationError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
        values = []
        for j, cell in enumerate(row):
            try:
                values.append(float(cell))
            except ValueError:
                raise ValidationError(f"{path}: row {lineno}, column {header[j]!r}: {cell!r} is not numeric") from None
        data.append(values)
    if not data:
        raise ValidationError(f"{path}: no sample rows")
    arr = np.array(data)
    try:
        return SampleTable(arr[:, c1], arr[:, c2], arr[:, cy])
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def read_samples(path) -> SampleTable:
    return parse_samples(_read_text(path), path)


def samples_to_text(table: SampleTable) -> str:
    """Inverse of :func:`parse_samples` (comma separated, shortest round-trip floats)."""
    def names(prefix, x):
        return [prefix] if x.shape[1] == 1 else [f"{prefix}_{k}" for k in range(x.shape[1])]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names("x1", table.x1) + names("x2", table.x2) + ["y"])
    for a, b, y in zip(table.x1, table.x2, table.y):
        w.writerow([_fmt(v) for v in a] + [_fmt(v) for v in b] + [int(y)])
    return buf.getvalue()


def _fmt(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def write_samples(path, table: SampleTable) -> None:
    write_text_atomic(path, samples_to_text(table))


def looks_like_json(path) -> bool:
    """True when the first non-blank character of the file is ``{``."""
    text = _read_text(path)
    return text.lstrip()[:1] == "{"
