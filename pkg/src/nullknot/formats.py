"""On-disk formats: binary snapshots, VTK legacy volumes, CSV polylines.

Snapshot layout (little-endian)::

    offset  size  content
    0       4     magic b"NKF1"
    4       4     u32 N
    8       8     f64 L
    16      8     f64 t
    24      8     zero padding (header is 32 bytes)
    32      ...   N^3 * 3 complex values as interleaved f64 (re, im);
                  component fastest, then z, then y, then x

All writers go through a temporary file in the target directory followed by
an atomic rename.
"""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile

import numpy as np

from .core import GridField, GridSpec
from .errors import SnapshotFormatError

MAGIC = b"NKF1"
HEADER = struct.Struct("<4sIdd")
HEADER_SIZE = 32


def atomic_write(path, data: bytes):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".nk-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def snapshot_bytes(gf: GridField) -> bytes:
    s = gf.spec
    head = HEADER.pack(MAGIC, s.N, float(s.L), float(s.t))
    head += b"\0" * (HEADER_SIZE - len(head))
    body = np.ascontiguousarray(gf.data, dtype="<c16").tobytes()
    return head + body


def write_snapshot(path, gf: GridField):
    atomic_write(path, snapshot_bytes(gf))


def parse_snapshot(buf: bytes) -> GridField:
    if len(buf) < HEADER_SIZE:
        raise SnapshotFormatError("file shorter than the 32-byte header")
    magic, n, L, t = HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    expected = HEADER_SIZE + n**3 * 3 * 16
    if len(buf) != expected:
        raise SnapshotFormatError(f"expected {expected} bytes for N = {n}, found {len(buf)}")
    try:
        spec = GridSpec(L, n, t)
    except ValueError as exc:
        raise SnapshotFormatError(f"invalid header: {exc}") from exc
    data = np.frombuffer(buf, dtype="<c16", offset=HEADER_SIZE).reshape(n, n, n, 3).astype(np.complex128)
    try:
        return GridField(spec, data)
    except ValueError as exc:
        raise SnapshotFormatError(str(exc)) from exc


def read_snapshot(path) -> GridField:
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise SnapshotFormatError(f"cannot read {path}: {exc}") from exc
    return parse_snapshot(buf)


def vtk_text(gf: GridField, w_floor: float = 1e-12) -> str:
    """VTK legacy ASCII structured points with vector arrays E, B, V.

    VTK orders points x fastest, so the arrays are transposed from the
    internal layout. V is written as zero where W is below ``w_floor * max W``.
    """
    s = gf.spec
    E, B = gf.E, gf.B
    W = 0.5 * (np.sum(E * E, -1) + np.sum(B * B, -1))
    V = np.zeros_like(E)
    ok = W > w_floor * W.max() if W.max() > 0 else np.zeros(W.shape, bool)
    V[ok] = np.cross(E[ok], B[ok]) / W[ok][:, None]
    n = s.N
    out = io.StringIO()
    out.write("# vtk DataFile Version 3.0\n")
    out.write(f"nullknot snapshot t={s.t!r}\n")
    out.write("ASCII\nDATASET STRUCTURED_POINTS\n")
    out.write(f"DIMENSIONS {n} {n} {n}\n")
    out.write(f"ORIGIN {-s.L!r} {-s.L!r} {-s.L!r}\n")
    out.write(f"SPACING {s.dx!r} {s.dx!r} {s.dx!r}\n")
    out.write(f"POINT_DATA {n**3}\n")
    for name, arr in (("E", E), ("B", B), ("V", V)):
        out.write(f"VECTORS {name} double\n")
        flat = np.transpose(arr, (2, 1, 0, 3)).reshape(-1, 3)
        np.savetxt(out, flat, fmt="%.17g")
    return out.getvalue()


def write_vtk(path, gf: GridField):
    atomic_write(path, vtk_text(gf).encode("ascii"))


CSV_COLUMNS = ["s", "x", "y", "z", "|X|", "W", "Re_ab", "Im_ab"]


def polyline_csv(line) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for i in range(len(line.s)):
        re = "" if line.re_ab is None else repr(float(line.re_ab[i]))
        im = "" if line.im_ab is None else repr(float(line.im_ab[i]))
        x, y, z = (repr(float(c)) for c in line.points[i])
        w.writerow([repr(float(line.s[i])), x, y, z, repr(float(line.magnitude[i])), repr(float(line.W[i])), re, im])
    return buf.getvalue()


def write_polyline(path, line):
    atomic_write(path, polyline_csv(line).encode("ascii"))


def read_polyline(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for col in CSV_COLUMNS:
        out[col] = np.array([float(r[col]) if r[col] != "" else np.nan for r in rows])
    return out
