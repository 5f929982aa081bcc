"""Grid and result file formats.

Grids: CSV of integers (one row per line; a single line is a 1D signal)
and PGM P2/P5. Results: a pulses JSON-lines file, a summary JSON document
and a spectrum CSV. All writes go through a temp file and a rename.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .dpt import DptResult, Layer, Pulse, spectrum
from .lattice import Lattice

PULSES_FILE = "pulses.jsonl"
SUMMARY_FILE = "summary.json"
SPECTRUM_FILE = "spectrum.csv"


class GridFormatError(ValueError):
    pass


def atomic_write(path, data) -> None:
    path = Path(path)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- grids -------------------------------------------------------------------


def parse_csv_grid(text: str) -> np.ndarray:
    rows = []
    for r, row in enumerate(csv.reader(_io.StringIO(text)), 1):
        if not row or all(not c.strip() for c in row):
            continue
        vals = []
        for c, cell in enumerate(row, 1):
            try:
                vals.append(int(cell.strip()))
            except ValueError:
                raise GridFormatError(f"row {r}, column {c}: not an integer: {cell!r}") from None
        if rows and len(vals) != len(rows[0]):
            raise GridFormatError(f"row {r}: expected {len(rows[0])} columns, got {len(vals)}")
        rows.append(vals)
    if not rows:
        raise GridFormatError("empty CSV grid")
    arr = np.array(rows, dtype=np.int64)
    return arr[0] if len(rows) == 1 else arr


def format_csv_grid(arr: np.ndarray) -> str:
    arr = np.asarray(arr)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise GridFormatError(f"CSV holds 1D or 2D grids, got {arr.ndim}D")
    return "".join(",".join(str(int(v)) for v in row) + "\n" for row in arr)


def _pgm_tokens(data: bytes, count: int, pos: int):
    tokens = []
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise GridFormatError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def parse_pgm(data: bytes) -> tuple[np.ndarray, int]:
    """Decode P2 or P5 data into (rows x cols int64 array, maxval)."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise GridFormatError("not a PGM file (expected P2 or P5)")
    try:
        (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise GridFormatError("malformed PGM header") from None
    if w < 1 or h < 1 or not 0 < maxval < 65536:
        raise GridFormatError(f"bad PGM dimensions {w}x{h} maxval {maxval}")
    if magic == b"P2":
        body = data[pos:].split()
        if len(body) < w * h:
            raise GridFormatError(f"PGM has {len(body)} samples, expected {w * h}")
        try:
            arr = np.array([int(t) for t in body[: w * h]], dtype=np.int64)
        except ValueError:
            raise GridFormatError("non-integer sample in P2 body") from None
    else:
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = w * h * dtype.itemsize
        if len(data) - pos < need:
            raise GridFormatError("truncated P5 raster")
        arr = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos).astype(np.int64)
    if (arr > maxval).any():
        raise GridFormatError("PGM sample exceeds maxval")
    return arr.reshape(h, w), maxval


def format_pgm(arr: np.ndarray, maxval: int = 255) -> tuple[bytes, int]:
    """Encode as binary P5, clamping to 0..maxval. Returns (bytes, clamped count)."""
    arr = np.asarray(arr, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise GridFormatError(f"PGM holds 2D grids, got {arr.ndim}D")
    clipped = np.clip(arr, 0, maxval)
    clamps = int(np.count_nonzero(clipped != arr))
    dtype = ">u2" if maxval > 255 else "u1"
    h, w = arr.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode()
    return header + clipped.astype(dtype).tobytes(), clamps


def read_grid(path) -> tuple[np.ndarray, dict]:
    """Load a CSV or PGM grid; the dict records the source format."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] in (b"P2", b"P5"):
        arr, maxval = parse_pgm(data)
        return arr, {"format": "pgm", "maxval": maxval}
    try:
        text = data.decode()
    except UnicodeDecodeError:
        raise GridFormatError(f"{path}: neither PGM nor text CSV") from None
    return parse_csv_grid(text), {"format": "csv"}


def write_grid(path, arr: np.ndarray, maxval: int = 255) -> int:
    """Write by extension (.pgm or CSV otherwise). Returns the clamp count."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        data, clamps = format_pgm(arr, maxval)
        atomic_write(path, data)
        return clamps
    atomic_write(path, format_csv_grid(arr))
    return 0


# -- results -----------------------------------------------------------------


def format_pulses(r: DptResult) -> str:
    return "".join(json.dumps(p.record(), sort_keys=True) + "\n" for p in r.pulses())


def format_spectrum(r: DptResult) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "gamma_minus", "gamma_plus", "energy"])
    w.writerows(spectrum(r))
    return buf.getvalue()


def write_result(outdir, r: DptResult, extra: dict | None = None) -> dict:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = r.summary()
    if extra:
        summary.update(extra)
    atomic_write(outdir / PULSES_FILE, format_pulses(r))
    atomic_write(outdir / SUMMARY_FILE, json.dumps(summary, sort_keys=True, indent=1) + "\n")
    atomic_write(outdir / SPECTRUM_FILE, format_spectrum(r))
    return summary


def load_result(indir) -> tuple[DptResult, dict]:
    """Rebuild a DptResult from a directory written by ``write_result``."""
    indir = Path(indir)
    summary = json.loads((indir / SUMMARY_FILE).read_text())
    lat = Lattice(**summary["lattice"])
    layers: list[Layer] = []
    with open(indir / PULSES_FILE) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            p = Pulse.from_cells(lat, [tuple(c) for c in rec["cells"]], rec["value"])
            if p.scale != rec["scale"]:
                raise GridFormatError(f"{PULSES_FILE}:{lineno}: scale does not match support size")
            while len(layers) < p.scale:
                layers.append(Layer(len(layers) + 1))
            layer = layers[p.scale - 1]
            (layer.up_pulses if p.value > 0 else layer.down_pulses).append(p)
    while len(layers) < summary["N"]:
        layers.append(Layer(len(layers) + 1))
    return DptResult(lat, layers, int(summary["residual"]), summary["source_digest"]), summary
