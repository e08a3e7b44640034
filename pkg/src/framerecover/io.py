"""File formats: RFC-4180 CSV, 16-bit binary PGM, stable-key JSON and digests."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from pathlib import Path

import numpy as np

__all__ = [
    "fmt_real",
    "write_csv",
    "read_csv",
    "write_array_csv",
    "read_array_csv",
    "write_pgm",
    "read_pgm",
    "to_jsonable",
    "write_json",
    "read_json",
    "sha256_file",
    "Manifest",
]


def fmt_real(v) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(v), ".17g")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_real(v)
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        if header is not None:
            w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path, header: bool = True):
    """Returns ``(header, rows)`` with every cell as a string."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if header:
        return (rows[0] if rows else []), rows[1:]
    return None, rows


def write_array_csv(path, arr) -> Path:
    """Header-less numeric CSV; vectors are written as one column."""
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected a vector or matrix, got shape {arr.shape}")
    return write_csv(path, None, arr.tolist())


def read_array_csv(path) -> np.ndarray:
    _, rows = read_csv(path, header=False)
    try:
        arr = np.array([[float(c) for c in r] for r in rows if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric cell ({exc})") from exc
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    return arr


def write_pgm(path, img, lo=None, hi=None) -> dict:
    """Binary P5 with maxval 65535, big-endian samples.

    Values are mapped linearly from ``[lo, hi]`` (default: image range) to
    ``[0, 65535]``. Returns the mapping so values can be recovered as
    ``lo + sample * scale``.
    """
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    lo = float(np.min(img)) if lo is None else float(lo)
    hi = float(np.max(img)) if hi is None else float(hi)
    span = hi - lo
    scale = span / 65535.0 if span > 0 else 1.0
    q = np.clip(np.rint((img - lo) / scale), 0, 65535).astype(">u2")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(q.tobytes())
    return {"lo": lo, "hi": hi, "scale": scale}


def read_pgm(path) -> np.ndarray:
    """Raw samples of a P5 PGM as a ``uint16`` (or ``uint8``) array."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end].decode("ascii"))
        pos = end
    if tokens[0] != "P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    pos += 1
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(data[pos:], dtype=dtype, count=w * h).reshape(h, w).astype(
        np.uint16 if maxval > 255 else np.uint8)


def to_jsonable(obj):
    """Convert numpy scalars/arrays and tuples; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False,
                      allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    """Tracks emitted files so the bundle can list each with its digest."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files = []

    def path(self, name: str) -> Path:
        return self.root / name

    def add(self, path) -> Path:
        path = Path(path)
        self.files.append(path)
        return path

    def entries(self) -> list:
        out = []
        for p in self.files:
            out.append({"path": os.path.relpath(p, self.root), "sha256": sha256_file(p),
                        "bytes": p.stat().st_size})
        return sorted(out, key=lambda e: e["path"])
