"""CSV/JSON writers and the matching reader.

Floats are written with 17 significant digits so that reading a file back
reproduces every value bit for bit.  Output is locale-independent.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import doa as doa_mod


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        s = format(float(v), ".17g")
        # keep floats distinguishable from integer flags on read-back
        return s if any(c in s for c in ".enN") else s + ".0"
    return str(v)


def write_csv(path, header, rows) -> int:
    """Write ``rows`` under ``header``; returns the number of data rows."""
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
            n += 1
    return n


def _parse(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> dict:
    """Read a CSV written by :func:`write_csv` into ``{column: list}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        cols = {h: [] for h in header}
        for row in r:
            for h, v in zip(header, row):
                cols[h].append(_parse(v))
    return cols


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path, obj) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default, allow_nan=True)
        fh.write("\n")


TRAJECTORY_HEADER = ("t", "x", "z", "u")
FLOQUET_HEADER = (
    "delta", "m11", "m12", "m21", "m22", "re1", "im1", "re2", "im2", "specrad", "stable",
)
DOA_LONG_HEADER = ("x0", "z0", "t0", "class")
DOA_SUMMARY_HEADER = ("x0", "z0", "conservativeFlag", "alwaysDivergesFlag", "dependentFlag")


def trajectory_rows(traj, u_values):
    for t, (x, z), u in zip(traj.t, traj.states, u_values):
        yield t, x, z, u


def floquet_rows(results):
    for r in results:
        m = r.monodromy
        l1, l2 = r.multipliers
        yield (
            r.delta, m[0, 0], m[0, 1], m[1, 0], m[1, 1],
            l1.real, l1.imag, l2.real, l2.imag, r.spectral_radius, r.stable,
        )


def doa_long_rows(grid):
    xs, zs = grid.x, grid.z
    for j, t0 in enumerate(grid.config.t0_samples):
        codes = grid.per_t0[j]
        for ix, x in enumerate(xs):
            for iz, z in enumerate(zs):
                yield x, z, t0, doa_mod.CLASS_NAMES[int(codes[ix, iz])]


def doa_summary_rows(grid):
    cons, div, dep = grid.conservative, grid.always_diverges, grid.t0_dependent
    for ix, x in enumerate(grid.x):
        for iz, z in enumerate(grid.z):
            yield x, z, cons[ix, iz], div[ix, iz], dep[ix, iz]

