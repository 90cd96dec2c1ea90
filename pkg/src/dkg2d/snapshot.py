"""Binary snapshot files.

Layout: one line of JSON (the header) terminated by ``\\n``, followed by the
raw little-endian complex128 payload in row-major order.  Trajectories are
stored time-major, spinor components inside each time slice.
"""
import json

import numpy as np

from .fields import PHYSICAL, FieldError, ScalarField, SpinorField, Trajectory
from .grid import SpaceTimeGrid, SpatialGrid

VERSION = 1
_DTYPE = np.dtype("<c16")


class SnapshotError(IOError):
    """Unreadable or inconsistent snapshot file."""


class SnapshotVersionError(SnapshotError):
    """Snapshot written with an unsupported format version."""


def _header(obj):
    if isinstance(obj, Trajectory):
        g = obj.grid
        return {"version": VERSION, "kind": f"trajectory-{obj.kind}", "n": g.n,
                "L": g.spatial.length, "nt": g.nt, "dt": g.dt, "t0": obj.t0,
                "rep": PHYSICAL, "dtype": "c128", "order": "row-major",
                "endian": "little"}
    if isinstance(obj, (ScalarField, SpinorField)):
        return {"version": VERSION, "kind": obj.kind, "n": obj.grid.n,
                "L": obj.grid.length, "rep": obj.rep, "dtype": "c128",
                "order": "row-major", "endian": "little"}
    raise TypeError(f"cannot write {type(obj).__name__}")


def write_snapshot(obj, path):
    """Write a field or trajectory to ``path``."""
    head = json.dumps(_header(obj), sort_keys=True).encode()
    payload = np.ascontiguousarray(obj.data, dtype=_DTYPE).tobytes()
    with open(path, "wb") as fh:
        fh.write(head + b"\n")
        fh.write(payload)


def read_snapshot(path):
    """Read a file written by :func:`write_snapshot`.

    Returns
    -------
    ScalarField, SpinorField or Trajectory

    Raises
    ------
    SnapshotVersionError
        Unknown ``version`` tag.
    SnapshotError
        Malformed header or a payload of the wrong size.
    """
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    try:
        h = json.loads(line.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SnapshotError(f"{path}: bad header") from e
    if not isinstance(h, dict):
        raise SnapshotError(f"{path}: header is not an object")
    if h.get("version") != VERSION:
        raise SnapshotVersionError(f"{path}: unsupported version {h.get('version')!r}")
    if (h.get("dtype"), h.get("order"), h.get("endian")) != ("c128", "row-major", "little"):
        raise SnapshotError(f"{path}: unsupported encoding")
    try:
        grid = SpatialGrid(int(h["n"]), float(h["L"]))
        kind = h["kind"]
        if kind.startswith("trajectory-"):
            st = SpaceTimeGrid(grid, int(h["nt"]), float(h["dt"]))
            shape = (st.nt,) + ((2,) if kind.endswith("spinor") else ()) + grid.shape
        elif kind in ("scalar", "spinor"):
            shape = ((2,) if kind == "spinor" else ()) + grid.shape
        else:
            raise SnapshotError(f"{path}: unknown kind {kind!r}")
    except (KeyError, TypeError, ValueError) as e:
        raise SnapshotError(f"{path}: incomplete header") from e
    count = int(np.prod(shape))
    if len(payload) != count * _DTYPE.itemsize:
        raise SnapshotError(f"{path}: payload has {len(payload)} bytes, "
                            f"expected {count * _DTYPE.itemsize}")
    data = np.frombuffer(payload, dtype=_DTYPE).reshape(shape)
    try:
        if kind.startswith("trajectory-"):
            return Trajectory(st, data, h.get("t0", 0.0))
        cls = ScalarField if kind == "scalar" else SpinorField
        return cls(grid, data, h.get("rep", PHYSICAL))
    except FieldError as e:
        raise SnapshotError(f"{path}: {e}") from e
