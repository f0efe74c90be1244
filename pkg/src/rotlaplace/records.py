"""CSV / JSON readers and writers for rotation data and distribution parameters.

Rotation CSVs carry one header row.  The column names identify the variant:

* ``rotmat9``   -- ``id, r00 ... r22`` (row-major rotation matrix)
* ``quat_wxyz`` -- ``id, qw, qx, qy, qz``

Datasets may add a ground-truth label in the same variant (``label_r00`` ...
or ``label_qw`` ...) and an ``outlier`` flag column.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import QuatParam, So3Param
from .so3 import canonical_quat, proper_svd, quat_to_rotmat, rotmat_to_quat

ROTMAT_COLS = [f"r{i}{j}" for i in range(3) for j in range(3)]
QUAT_COLS = ["qw", "qx", "qy", "qz"]
ORTHO_TOL = 1e-6


class InputError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        where = f"{path}" if path is not None else "input"
        if line is not None:
            where += f", line {line}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass
class RotationRecords:
    ids: list
    rotations: np.ndarray
    labels: np.ndarray | None = None
    outlier: np.ndarray | None = None
    variant: str = "rotmat9"

    def __len__(self):
        return len(self.ids)


def _orthogonalize(m, path, line):
    R = np.asarray(m, dtype=float).reshape(3, 3)
    if not np.all(np.isfinite(R)):
        raise InputError("non-finite rotation entry", path, line)
    err = np.linalg.norm(R @ R.T - np.eye(3))
    if err > ORTHO_TOL or abs(np.linalg.det(R) - 1.0) > ORTHO_TOL:
        raise InputError(f"not a rotation matrix (||RR^T - I|| = {err:.3g})", path, line)
    return proper_svd(R).mode


def _from_quat(q, path, line):
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)):
        raise InputError("non-finite quaternion entry", path, line)
    if abs(q @ q - 1.0) > ORTHO_TOL:
        raise InputError(f"quaternion norm {np.sqrt(q @ q):.9g} is not 1", path, line)
    return quat_to_rotmat(q / np.linalg.norm(q))


def detect_variant(header):
    if all(c in header for c in ROTMAT_COLS):
        return "rotmat9"
    if all(c in header for c in QUAT_COLS):
        return "quat_wxyz"
    return None


def read_rotations(path):
    """Parse a rotation CSV, validating each row to tolerance 1e-6."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open ({exc.strerror})", path) from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError("empty file (header row required)", path, 1)
        header = [h.strip() for h in header]
        variant = detect_variant(header)
        if variant is None or "id" not in header:
            raise InputError("header must contain 'id' and r00..r22 or qw,qx,qy,qz", path, 1)
        cols = ROTMAT_COLS if variant == "rotmat9" else QUAT_COLS
        idx = [header.index(c) for c in cols]
        label_cols = ["label_" + c for c in cols]
        lidx = [header.index(c) for c in label_cols] if all(c in header for c in label_cols) else None
        oidx = header.index("outlier") if "outlier" in header else None
        id_idx = header.index("id")
        convert = _orthogonalize if variant == "rotmat9" else _from_quat
        ids, rots, labels, outl = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
            try:
                vals = [float(row[i]) for i in idx]
                lab = [float(row[i]) for i in lidx] if lidx else None
                out = int(row[oidx]) if oidx is not None else None
            except ValueError as exc:
                raise InputError(f"cannot parse number ({exc})", path, lineno) from exc
            ids.append(row[id_idx])
            rots.append(convert(vals, path, lineno))
            if lab is not None:
                labels.append(convert(lab, path, lineno))
            if out is not None:
                outl.append(bool(out))
    return RotationRecords(
        ids=ids,
        rotations=np.array(rots).reshape(-1, 3, 3),
        labels=np.array(labels).reshape(-1, 3, 3) if lidx else None,
        outlier=np.array(outl, dtype=bool) if oidx is not None else None,
        variant=variant,
    )


def _fmt(x):
    return repr(float(x))


def write_rotations(path, ids, rotations, labels=None, outlier=None, variant="rotmat9"):
    """Write rotations (and optional labels / outlier flags) in the given variant."""
    rotations = np.asarray(rotations, dtype=float)
    if variant == "rotmat9":
        cols = ROTMAT_COLS
        enc = lambda R: R.reshape(-1, 9)  # noqa: E731
    elif variant == "quat_wxyz":
        cols = QUAT_COLS
        enc = lambda R: canonical_quat(rotmat_to_quat(R)).reshape(-1, 4)  # noqa: E731
    else:
        raise ValueError(f"unknown variant {variant!r}")
    header = ["id"] + cols
    body = [enc(rotations)]
    if labels is not None:
        header += ["label_" + c for c in cols]
        body.append(enc(np.broadcast_to(labels, rotations.shape)))
    table = np.concatenate(body, axis=1)
    if outlier is not None:
        header.append("outlier")
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for k, rid in enumerate(ids):
                row = [rid] + [_fmt(x) for x in table[k]]
                if outlier is not None:
                    row.append(int(outlier[k]))
                writer.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_table(path, header, rows):
    """Plain CSV table writer; ``None`` path is a no-op."""
    if path is None:
        return
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def read_param(path):
    """Load ``{"A": 3x3 or 9 floats}`` or ``{"M": 4x4, "z": 4 floats}`` from JSON."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot open ({exc.strerror})", path) from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", path, exc.lineno) from exc
    try:
        if "A" in data:
            a = np.array(data["A"], dtype=float)
            if a.size != 9:
                raise ValueError("A must have 9 entries")
            return So3Param(a.reshape(3, 3))
        if "M" in data and "z" in data:
            return QuatParam(np.array(data["M"], dtype=float), np.array(data["z"], dtype=float))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc), path) from exc
    raise InputError("expected keys 'A' or 'M' and 'z'", path)


def write_param(path, param):
    if isinstance(param, So3Param):
        data = {"A": param.a.tolist()}
    else:
        data = {"M": param.m.tolist(), "z": param.z.tolist()}
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
