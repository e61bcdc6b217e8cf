"""Binary snapshots and CSV outputs.

Snapshot layout (all little-endian)::

    offset  size  field
    0       8     magic b"SPINWELL"
    8       4     u32 format version (1)
    12      12    u32 n1, n2, n3      cosine modes per axis of M
    24      12    u32 K1, K2, K3      largest Fourier index per axis of B, E
    36      4     u32 NY              scalar Fourier modes (1 + 2 P)
    40      8     f64 t
    48      ...   f64 m[3][n1][n2][n3], then b[3][NY], then e[3][NY]

Magnetization coefficients are indexed by the cosine mode ``(k1, k2, k3)``;
field coefficients by the constant mode, then the ``P`` half-space wave
vectors (cosine parts), then the same wave vectors (sine parts), in the order
of ``EMBasis.half_modes``.
"""
from __future__ import annotations

import csv
import struct

import numpy as np

from .dynamics import GalerkinState

__all__ = [
    "MAGIC",
    "VERSION",
    "SnapshotError",
    "encode_snapshot",
    "decode_snapshot",
    "write_snapshot",
    "read_snapshot",
    "write_rows",
    "write_trajectory_csv",
    "TRAJECTORY_COLUMNS",
]

MAGIC = b"SPINWELL"
VERSION = 1
_HEADER = struct.Struct("<8sI3I3IId")

TRAJECTORY_COLUMNS = (
    "t",
    "H_norm_M",
    "V_norm_M",
    "E_aniso",
    "E_exch",
    "E_zeeman",
    "E_elec",
    "E_total",
    "divB_resid",
    "sphere_max_dev",
    "norm_ident_resid",
    "energy_ident_resid",
)


class SnapshotError(ValueError):
    """A snapshot file is malformed or truncated."""


def _n_scalar(K):
    return int(np.prod([2 * k + 1 for k in K]))


def encode_snapshot(state: GalerkinState, em_modes):
    m = np.asarray(state.m, dtype="<f8")
    b = np.asarray(state.b, dtype="<f8")
    e = np.asarray(state.e, dtype="<f8")
    if m.ndim != 4 or m.shape[0] != 3 or b.ndim != 2 or b.shape[0] != 3 or e.shape != b.shape:
        raise SnapshotError("state arrays have unexpected shapes")
    K = tuple(int(k) for k in em_modes)
    if b.shape[1] != _n_scalar(K):
        raise SnapshotError(f"field coefficient count {b.shape[1]} does not match em modes {K}")
    head = _HEADER.pack(MAGIC, VERSION, *m.shape[1:], *K, b.shape[1], float(state.t))
    return head + m.tobytes(order="C") + b.tobytes(order="C") + e.tobytes(order="C")


def decode_snapshot(data: bytes):
    """Returns ``(state, em_modes)``."""
    if len(data) < _HEADER.size:
        raise SnapshotError(f"truncated header: {len(data)} bytes, need {_HEADER.size}")
    magic, version, n1, n2, n3, k1, k2, k3, ny, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    if ny != _n_scalar((k1, k2, k3)):
        raise SnapshotError(f"NY = {ny} inconsistent with em modes {(k1, k2, k3)}")
    nm = 3 * n1 * n2 * n3
    ne = 3 * ny
    need = _HEADER.size + 8 * (nm + 2 * ne)
    if len(data) != need:
        kind = "truncated" if len(data) < need else "oversized"
        raise SnapshotError(f"{kind} snapshot: {len(data)} bytes, expected {need}")
    arr = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    m = arr[:nm].reshape(3, n1, n2, n3).astype(float)
    b = arr[nm : nm + ne].reshape(3, ny).astype(float)
    e = arr[nm + ne :].reshape(3, ny).astype(float)
    return GalerkinState(m, b, e, float(t)), (k1, k2, k3)


def write_snapshot(state, path, em_modes):
    data = encode_snapshot(state, em_modes)
    with open(path, "wb") as fh:
        fh.write(data)


def read_snapshot(path):
    with open(path, "rb") as fh:
        return decode_snapshot(fh.read())


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(path, header, rows):
    """Write a CSV with ``repr`` floats (shortest round-trip form) and ``\\n`` line ends."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_trajectory_csv(path, records):
    write_rows(path, TRAJECTORY_COLUMNS, (r.row() for r in records))
