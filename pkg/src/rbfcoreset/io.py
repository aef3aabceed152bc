"""Point-set, coreset and sensitivity-cache file formats.

CSV point sets carry a header ``x1,...,xd[,weight][,label]``. The binary
format is::

    b"RBFC" | u32 version=1 | u64 n | u64 d | u8 flags | f64 points (row-major)
    | f64 weights (if flags & 1) | f64 labels (if flags & 2)

all little-endian. Floats are written to CSV with ``repr`` so CSV -> bin -> CSV
round trips are exact.
"""
from __future__ import annotations

import csv
import hashlib
import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .geometry import WeightedPointSet
from .sampling import Coreset
from .sensitivity import SensitivityProfile

MAGIC = b"RBFC"
VERSION = 1
_HEADER = struct.Struct("<4sIQQB")

CACHE_MAGIC = b"RBFS"
_CACHE_HEADER = struct.Struct("<4sIBBddQ")
_LOSS_CODES = {"rbf": 0, "laplacian": 1}
_MODE_CODES = {"lemma": 0, "algorithm1": 1}


class FormatError(ValueError):
    pass


def detect_format(path) -> str:
    return "bin" if str(path).endswith(".bin") else "csv"


def read_csv(path) -> WeightedPointSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip().lower() for h in rows[0]]
    xcols = [i for i, h in enumerate(header) if h.startswith("x")]
    wcol = header.index("weight") if "weight" in header else None
    lcol = header.index("label") if "label" in header else None
    if not xcols or len(xcols) + (wcol is not None) + (lcol is not None) != len(header):
        raise FormatError(f"{path}: bad header {rows[0]!r}; expected x1,...,xd[,weight][,label]")
    body = [r for r in rows[1:] if r]
    if not body:
        raise FormatError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise FormatError(f"{path}: ragged rows")
    weights = data[:, wcol] if wcol is not None else np.ones(data.shape[0])
    labels = data[:, lcol] if lcol is not None else None
    return WeightedPointSet(data[:, xcols], weights, labels)


def write_csv(P: WeightedPointSet, path, include_weights: bool = True) -> None:
    header = [f"x{i + 1}" for i in range(P.d)]
    cols = [P.points]
    if include_weights:
        header.append("weight")
        cols.append(P.weights[:, None])
    if P.labels is not None:
        header.append("label")
        cols.append(P.labels[:, None])
    table = np.hstack(cols)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in table:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_bin(path) -> WeightedPointSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, n, d, flags = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 8 * (n * d + n * bool(flags & 1) + n * bool(flags & 2))
    if len(raw) != expected:
        raise FormatError(f"{path}: size {len(raw)} does not match header (expected {expected})")
    off = _HEADER.size
    points = np.frombuffer(raw, "<f8", n * d, off).reshape(n, d)
    off += 8 * n * d
    weights = np.ones(n)
    labels = None
    if flags & 1:
        weights = np.frombuffer(raw, "<f8", n, off)
        off += 8 * n
    if flags & 2:
        labels = np.frombuffer(raw, "<f8", n, off)
    return WeightedPointSet(points, weights, labels)


def write_bin(P: WeightedPointSet, path, include_weights: bool = True) -> None:
    flags = (1 if include_weights else 0) | (2 if P.labels is not None else 0)
    parts = [_HEADER.pack(MAGIC, VERSION, P.n, P.d, flags), P.points.astype("<f8").tobytes()]
    if include_weights:
        parts.append(P.weights.astype("<f8").tobytes())
    if P.labels is not None:
        parts.append(P.labels.astype("<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_points(path, fmt=None) -> WeightedPointSet:
    fmt = fmt or detect_format(path)
    return read_bin(path) if fmt == "bin" else read_csv(path)


def write_points(P: WeightedPointSet, path, fmt=None) -> None:
    fmt = fmt or detect_format(path)
    (write_bin if fmt == "bin" else write_csv)(P, path)


def format_coreset(c: Coreset) -> str:
    order = np.argsort(c.indices, kind="stable")
    buf = io.StringIO()
    buf.write("index,weight\n")
    for i in order:
        buf.write(f"{int(c.indices[i])},{float(c.weights[i])!r}\n")
    return buf.getvalue()


def write_coreset(c: Coreset, path) -> None:
    Path(path).write_text(format_coreset(c))


def read_coreset(path, source_n: int) -> Coreset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["index", "weight"]:
        raise FormatError(f"{path}: expected header 'index,weight'")
    try:
        idx = np.array([int(r[0]) for r in rows[1:] if r], dtype=np.int64)
        w = np.array([float(r[1]) for r in rows[1:] if r], dtype=np.float64)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    return Coreset(idx, w, source_n, int(idx.size), float("nan"), 0)


# -- sensitivity cache -------------------------------------------------------


def cache_key(input_bytes: bytes, loss: str, mode: str, radius: float, normalize: bool) -> str:
    h = hashlib.sha256(input_bytes)
    h.update(f"|{loss}|{mode}|{radius!r}|{int(normalize)}".encode())
    return h.hexdigest()[:32]


def cache_path(input_path, key: str) -> Path:
    return Path(input_path).resolve().parent / f"{key}.sens.bin"


def write_profile_cache(profile: SensitivityProfile, path) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    path = Path(path)
    payload = _CACHE_HEADER.pack(
        CACHE_MAGIC,
        VERSION,
        _LOSS_CODES[profile.loss],
        _MODE_CODES[profile.mode],
        profile.radius if profile.radius is not None else float("nan"),
        profile.conditioner_distortion,
        profile.n,
    ) + np.asarray(profile.bounds, dtype="<f8").tobytes()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".sens-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_profile_cache(path) -> SensitivityProfile:
    raw = Path(path).read_bytes()
    magic, version, loss, mode, radius, distortion, n = _CACHE_HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC or version != VERSION:
        raise FormatError(f"{path}: not a sensitivity cache")
    if len(raw) != _CACHE_HEADER.size + 8 * n:
        raise FormatError(f"{path}: truncated cache")
    bounds = np.frombuffer(raw, "<f8", n, _CACHE_HEADER.size).copy()
    loss_name = {v: k for k, v in _LOSS_CODES.items()}[loss]
    mode_name = {v: k for k, v in _MODE_CODES.items()}[mode]
    return SensitivityProfile(
        bounds=bounds,
        total=float(bounds.sum()),
        loss=loss_name,
        radius=None if np.isnan(radius) else radius,
        mode=mode_name,
        conditioner_distortion=distortion,
    )
