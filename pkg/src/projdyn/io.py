"""Trajectory CSV and JSON summary files.

CSV columns are ``t,tau,q_0..q_{n-1},p_0..p_{n-1},h,lambda,energy,eta``;
missing channels are written as empty fields. Floats use Python's shortest
round-trip representation, so reading a file back reproduces the samples
exactly.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .dynamics import Trajectory

CHANNELS = ("h", "lambda", "energy", "eta")


def header(dim: int) -> list[str]:
    return ["t", "tau", *(f"q_{i}" for i in range(dim)), *(f"p_{i}" for i in range(dim)), *CHANNELS]


def _fmt(x: float) -> str:
    return repr(float(x))


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_rows(traj: Trajectory, time=None, tau=None):
    """Yield CSV rows; ``time``/``tau`` override the ``t`` and ``tau`` columns."""
    n = len(traj)
    time = traj.t if time is None else time
    if tau is None:
        tau = traj.channels.get("tau")
    cols = [traj.channels.get(name) for name in CHANNELS]
    for i in range(n):
        row = [_fmt(time[i]), "" if tau is None else _fmt(tau[i])]
        row += [_fmt(x) for x in traj.q[i]]
        row += [_fmt(x) for x in traj.p[i]]
        row += ["" if c is None else _fmt(c[i]) for c in cols]
        yield row


def write_trajectory_csv(path, traj: Trajectory, time=None, tau=None) -> Path:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header(traj.dim))
    writer.writerows(trajectory_rows(traj, time, tau))
    _atomic_write(Path(path), buf.getvalue())
    return Path(path)


def read_trajectory_csv(path, parameter: str = "t") -> Trajectory:
    """Read a trajectory CSV; ``parameter`` picks the column used as time (``t`` or ``tau``)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader)
        rows = [r for r in reader if r]
    dim = sum(1 for h in head if h.startswith("q_"))
    if head != header(dim):
        raise ValueError(f"unexpected CSV header in {path}")
    if not rows:
        raise ValueError(f"{path} has no samples")

    def column(name):
        k = head.index(name)
        vals = [r[k] for r in rows]
        if any(v == "" for v in vals):
            return None
        return np.array([float(v) for v in vals])

    q = np.column_stack([column(f"q_{i}") for i in range(dim)])
    p = np.column_stack([column(f"p_{i}") for i in range(dim)])
    channels = {}
    for name in ("t", "tau", *CHANNELS):
        col = column(name)
        if col is not None and name != parameter:
            channels[name if name != "t" else "t_origin"] = col
    time = column(parameter)
    if time is None:
        raise ValueError(f"column {parameter!r} is empty in {path}")
    return Trajectory(time, q, p, channels, {"source": str(path)})


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, data: dict) -> Path:
    _atomic_write(Path(path), json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return Path(path)
