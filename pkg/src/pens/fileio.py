"""CSV time series and binary field snapshots.

Snapshot layout (little endian)::

    b"PENS1\\0"                      magic, 6 bytes
    u32 d
    u32 N[d]
    f64 L[d]
    f64 t
    f64 rho[N^d], m[d][N^d], v[d][N^d]   row-major

Kinetic snapshots use magic ``b"PENK1\\0"`` followed by ``u32 nx, u32 nxi,
f64 L, f64 xi_max, f64 eps, f64 t`` and ``f64 f[nx][nxi]``.
"""
from __future__ import annotations

import csv
import io
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"PENS1\0"
KINETIC_MAGIC = b"PENK1\0"

BASE_COLUMNS = ("t", "mass")
TAIL_COLUMNS = ("E", "D", "E_balance_residual")
BOUND_COLUMNS = ("rho_min", "rho_max", "char_lower_bound")
EXTRA_COLUMNS = ("clipped", "div_u_sup")


class SnapshotError(ValueError):
    pass


def _num(x):
    return format(float(x), ".17g")


def sobolev_column(key):
    name, order = key
    return f"sobolev_{name}_H{order}"


def weighted_column(key):
    name, k, r = key
    return f"weighted_{name}_k{k}_r{r:g}"


def columns_for(dim, sobolev_keys=(), weighted_keys=()):
    """Column names of the time-series CSV, in file order."""
    cols = list(BASE_COLUMNS)
    cols += [f"momentum_{i}" for i in range(dim)]
    cols += list(TAIL_COLUMNS)
    cols += [sobolev_column(k) for k in sobolev_keys]
    cols += [weighted_column(k) for k in weighted_keys]
    cols += list(BOUND_COLUMNS) + list(EXTRA_COLUMNS)
    return cols


def record_row(rec):
    row = {"t": rec.t, "mass": rec.mass, "E": rec.E, "D": rec.D, "E_balance_residual": rec.E_balance_residual}
    for i, p in enumerate(rec.momentum):
        row[f"momentum_{i}"] = p
    for key, val in rec.sobolev.items():
        row[sobolev_column(key)] = val
    for key, val in rec.weighted.items():
        row[weighted_column(key)] = val
    row.update(rho_min=rec.rho_min, rho_max=rec.rho_max, char_lower_bound=rec.char_lower_bound)
    for key in EXTRA_COLUMNS:
        row[key] = rec.extras.get(key, float("nan"))
    return row


def timeseries_text(records, columns=None):
    """CSV text for ``records`` (sorted by ``t``), 17 significant digits."""
    records = list(records)
    if any(b.t < a.t for a, b in zip(records, records[1:])):
        raise ValueError("records must be sorted by t")
    if columns is None:
        if records:
            r = records[0]
            columns = columns_for(len(r.momentum), r.sobolev, r.weighted)
        else:
            columns = list(BASE_COLUMNS + TAIL_COLUMNS + BOUND_COLUMNS)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        row = record_row(rec)
        writer.writerow([_num(row[c]) for c in columns])
    return buf.getvalue()


def table_text(columns, rows):
    """CSV text of plain numeric rows (sequences aligned with ``columns``)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} values for {len(columns)} columns")
        writer.writerow([_num(x) for x in row])
    return buf.getvalue()


def write_timeseries(path, records, columns=None):
    text = timeseries_text(records, columns)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write time series to {path}: {exc}") from exc
    return path


def read_timeseries(path):
    """CSV -> dict of column name -> float array."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


@dataclass
class Snapshot:
    dim: int
    n: tuple
    length: tuple
    t: float
    rho: np.ndarray
    m: np.ndarray
    v: np.ndarray


def _atomic_write(path, payload):
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            written = fh.write(payload)
            fh.flush()
        if written != len(payload):
            raise OSError(f"short write: {written} of {len(payload)} bytes")
    except OSError as exc:
        if path.exists():
            os.remove(path)
        raise OSError(f"snapshot write to {path} failed: {exc}") from exc
    return path


def snapshot_bytes(state):
    grid = state.grid
    d = grid.dim
    head = MAGIC + struct.pack(f"<I{d}I{d}dd", d, *([grid.n] * d), *([grid.length] * d), state.t)
    v = state.v()
    body = [np.ascontiguousarray(state.rho, dtype="<f8").tobytes()]
    body += [np.ascontiguousarray(state.m[i], dtype="<f8").tobytes() for i in range(d)]
    body += [np.ascontiguousarray(v[i], dtype="<f8").tobytes() for i in range(d)]
    return head + b"".join(body)


def write_snapshot(path, state):
    return _atomic_write(path, snapshot_bytes(state))


def _take(buf, offset, size, what):
    if offset + size > len(buf):
        raise SnapshotError(f"truncated snapshot: need {size} bytes for {what} at offset {offset}, file has {len(buf)}")
    return buf[offset : offset + size], offset + size


def parse_snapshot(buf):
    magic, off = _take(buf, 0, 6, "magic")
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}, expected {MAGIC!r}")
    raw, off = _take(buf, off, 4, "dimension")
    (d,) = struct.unpack("<I", raw)
    if d not in (1, 2, 3):
        raise SnapshotError(f"bad dimension {d} at offset 6")
    raw, off = _take(buf, off, 4 * d, "grid sizes")
    n = struct.unpack(f"<{d}I", raw)
    raw, off = _take(buf, off, 8 * d + 8, "box lengths and time")
    vals = struct.unpack(f"<{d}dd", raw)
    length, t = vals[:d], vals[d]
    count = int(np.prod(n))
    fields = []
    for name in ["rho"] + [f"m[{i}]" for i in range(d)] + [f"v[{i}]" for i in range(d)]:
        raw, off = _take(buf, off, 8 * count, name)
        fields.append(np.frombuffer(raw, dtype="<f8").reshape(n).astype(float))
    if off != len(buf):
        raise SnapshotError(f"{len(buf) - off} trailing bytes after offset {off}")
    return Snapshot(d, tuple(n), tuple(length), t, fields[0], np.stack(fields[1 : 1 + d]), np.stack(fields[1 + d :]))


def read_snapshot(path):
    return parse_snapshot(Path(path).read_bytes())


def kinetic_snapshot_bytes(state):
    head = KINETIC_MAGIC + struct.pack(
        "<IIdddd", state.nx, state.nxi, state.length, state.xi_max, state.eps, state.t
    )
    return head + np.ascontiguousarray(state.f, dtype="<f8").tobytes()


def write_kinetic_snapshot(path, state):
    return _atomic_write(path, kinetic_snapshot_bytes(state))


def read_kinetic_snapshot(path):
    buf = Path(path).read_bytes()
    magic, off = _take(buf, 0, 6, "magic")
    if magic != KINETIC_MAGIC:
        raise SnapshotError(f"bad magic {magic!r}, expected {KINETIC_MAGIC!r}")
    raw, off = _take(buf, off, 40, "header")
    nx, nxi, length, xi_max, eps, t = struct.unpack("<IIdddd", raw)
    raw, off = _take(buf, off, 8 * nx * nxi, "f")
    if off != len(buf):
        raise SnapshotError(f"{len(buf) - off} trailing bytes after offset {off}")
    f = np.frombuffer(raw, dtype="<f8").reshape(nx, nxi).astype(float)
    return {"nx": nx, "nxi": nxi, "length": length, "xi_max": xi_max, "eps": eps, "t": t, "f": f}
