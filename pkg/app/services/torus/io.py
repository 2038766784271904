# field serialization: CSV (reports) and flat binary with a text header

import logging
import re
from pathlib import Path

import numpy as np

from app.core.errors import ArtifactIOError
from .field import PeriodicField
from .grid import TorusGrid

_HEADER = re.compile(r"#\s*N=(\d+)\s+G=(\d+)\s+d=(\d+)")


def field_header(v: PeriodicField) -> str:
    return f"# N={v.grid.N} G={v.grid.G} d={v.d}"


def _parse_header(line: str):
    match = _HEADER.match(line.strip())
    if not match:
        raise ArtifactIOError(f"Missing field header, got '{line.strip()[:40]}'")
    N, G, d = (int(g) for g in match.groups())
    return TorusGrid(N, G), d


def write_field_csv(path, v: PeriodicField, preamble: str = ""):
    """One row per grid point: coordinates then components, C order over the grid."""
    try:
        cols = [f"y{i + 1}" for i in range(v.grid.N)] + [f"v{i + 1}" for i in range(v.d)]
        data = np.concatenate([v.grid.points.reshape(-1, v.grid.N), v.flat()], axis=1)
        with open(path, "w") as fh:
            if preamble:
                fh.write(preamble.rstrip("\n") + "\n")
            fh.write(field_header(v) + "\n")
            fh.write(",".join(cols) + "\n")
            for row in data:
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    except OSError as e:
        logging.error(f"Failed writing field to {path}: {e}")
        raise ArtifactIOError(f"Cannot write field CSV {path}: {e}")


def read_field_csv(path) -> PeriodicField:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        logging.error(f"Failed reading field from {path}: {e}")
        raise ArtifactIOError(f"Cannot read field CSV {path}: {e}")
    header = next((ln for ln in lines if _HEADER.match(ln.strip())), None)
    if header is None:
        raise ArtifactIOError(f"Field CSV {path} has no '# N= G= d=' header")
    grid, d = _parse_header(header)
    rows = [ln for ln in lines if ln and not ln.startswith("#")][1:]
    data = np.array([[float(x) for x in ln.split(",")] for ln in rows])
    if data.shape != (grid.size, grid.N + d):
        raise ArtifactIOError(f"Field CSV {path} has {data.shape} entries, expected {(grid.size, grid.N + d)}")
    return PeriodicField(grid, data[:, grid.N:].reshape(grid.shape + (d,)))


def write_field_binary(path, v: PeriodicField):
    """Header line, then little-endian float64 values in C order."""
    try:
        with open(path, "wb") as fh:
            fh.write((field_header(v) + "\n").encode("ascii"))
            fh.write(np.ascontiguousarray(v.values, dtype="<f8").tobytes())
    except OSError as e:
        logging.error(f"Failed writing field to {path}: {e}")
        raise ArtifactIOError(f"Cannot write field {path}: {e}")


def read_field_binary(path) -> PeriodicField:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        logging.error(f"Failed reading field from {path}: {e}")
        raise ArtifactIOError(f"Cannot read field {path}: {e}")
    newline = raw.find(b"\n")
    if newline < 0:
        raise ArtifactIOError(f"Field file {path} has no header")
    grid, d = _parse_header(raw[:newline].decode("ascii", errors="replace"))
    values = np.frombuffer(raw[newline + 1:], dtype="<f8")
    if values.size != grid.size * d:
        raise ArtifactIOError(f"Field file {path} holds {values.size} values, expected {grid.size * d}")
    return PeriodicField(grid, values.reshape(grid.shape + (d,)).copy())


def read_field(path) -> PeriodicField:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_field_csv(path)
    return read_field_binary(path)
