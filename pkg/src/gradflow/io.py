"""Bit-exact file formats: field snapshots and diagnostic traces.

Snapshot layout (all little-endian, 56-byte header):

    offset  size  field
    0       4     magic "GFS1"
    4       4     version (u32, currently 1)
    8       4     nx (u32)
    12      4     ny (u32)
    16      40    x0, x1, y0, y1, time (5 x f64)
    56      8*nx*ny   field values, f64, row-major with x fastest

Traces are CSV with a fixed header; floats are printed with 17 significant
digits so a re-parse reproduces the stored doubles exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .diagnostics import TraceRow
from .spectral import Grid2D, make_grid

MAGIC = b"GFS1"
VERSION = 1
_HEADER = struct.Struct("<4sIIIddddd")

TRACE_HEADER = "n,t,E_orig,E_mod,mass,lambda,xi,E1,E2,ratio,W,lin_iters,clamped"


class BadMagicError(ValueError):
    """The file does not start with the snapshot magic."""


class VersionUnsupportedError(ValueError):
    """The snapshot declares a format version this reader does not know."""


class TruncatedPayloadError(ValueError):
    """The file is shorter (or longer) than its header promises."""


def write_snapshot(path, grid: Grid2D, phi: np.ndarray, t: float) -> None:
    grid._check(phi)
    header = _HEADER.pack(MAGIC, VERSION, grid.nx, grid.ny,
                          grid.x0, grid.x1, grid.y0, grid.y1, float(t))
    payload = np.ascontiguousarray(phi, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_snapshot(path) -> tuple[Grid2D, np.ndarray, float]:
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: header truncated at {len(data)} bytes")
    _, version, nx, ny, x0, x1, y0, y1, t = _HEADER.unpack_from(data)
    if version != VERSION:
        raise VersionUnsupportedError(f"{path}: version {version} unsupported")
    expected = _HEADER.size + 8 * nx * ny
    if len(data) != expected:
        raise TruncatedPayloadError(
            f"{path}: expected {expected} bytes, found {len(data)}")
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size,
                           count=nx * ny).reshape(ny, nx).copy()
    grid = make_grid(nx, ny, x0, x1, y0, y1)
    return grid, values, t


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def write_trace(path, rows: list[TraceRow]) -> None:
    lines = [TRACE_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r.n), _fmt(r.t), _fmt(r.e_orig), _fmt(r.e_mod), _fmt(r.mass),
            _fmt(r.lam), _fmt(r.xi), _fmt(r.e1), _fmt(r.e2), _fmt(r.ratio),
            _fmt(r.w), "" if r.lin_iters is None else str(r.lin_iters),
            str(int(r.clamped)),
        ]))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def read_trace(path) -> list[TraceRow]:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != TRACE_HEADER:
        raise ValueError(f"{path}: not a trace file")

    def opt(tok: str) -> float | None:
        return None if tok == "" else float(tok)

    rows = []
    for ln in lines[1:]:
        tok = ln.split(",")
        rows.append(TraceRow(
            n=int(tok[0]), t=float(tok[1]), e_orig=float(tok[2]),
            e_mod=float(tok[3]), mass=float(tok[4]), lam=opt(tok[5]),
            xi=opt(tok[6]), e1=opt(tok[7]), e2=opt(tok[8]),
            ratio=float(tok[9]), w=float(tok[10]),
            lin_iters=None if tok[11] == "" else int(tok[11]),
            clamped=bool(int(tok[12])),
        ))
    return rows
