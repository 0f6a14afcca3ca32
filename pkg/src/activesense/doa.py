"""Grid estimate of the domain of attraction of the active-sensing orbit.

Each initial state is integrated from each sampled initial time and labelled
CONVERGES (stayed within ``convergence_tol`` of the moving orbit point for a
full period), DIVERGES (left the ``escape_radius`` ball or hit NaN/Inf) or
UNDECIDED (neither before the horizon).  The conservative domain is the set
of cells that converge for every sampled initial time; it is conservative
only up to the ``t0`` discretization.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .dynamics import SystemParams

UNDECIDED, CONVERGES, DIVERGES = 0, 1, 2
CLASS_NAMES = {UNDECIDED: "undecided", CONVERGES: "converges", DIVERGES: "diverges"}
TWO_PI = 2.0 * math.pi


def uniform_t0(n: int) -> tuple:
    return tuple(TWO_PI * j / n for j in range(n))


@dataclass(frozen=True)
class DoaConfig:
    x_range: tuple = (-4.0, 4.0)
    z_range: tuple = (-4.0, 4.0)
    nx: int = 200
    nz: int = 200
    t0_samples: tuple = field(default_factory=lambda: uniform_t0(16))
    horizon: float = 100 * TWO_PI
    convergence_tol: float = None
    escape_radius: float = 1e3
    params: SystemParams = field(default_factory=lambda: SystemParams(1.0, 1.0 / math.sqrt(2.0)))
    steps_per_period: int = 1000

    def __post_init__(self):
        if self.convergence_tol is None:
            object.__setattr__(self, "convergence_tol", 0.05 * self.params.a)
        object.__setattr__(self, "x_range", tuple(float(v) for v in self.x_range))
        object.__setattr__(self, "z_range", tuple(float(v) for v in self.z_range))
        object.__setattr__(self, "t0_samples", tuple(float(v) for v in self.t0_samples))
        self.validate()

    def validate(self):
        for name, (lo, hi), n in (("x", self.x_range, self.nx), ("z", self.z_range, self.nz)):
            if n < 1 or (n == 1 and lo != hi) or (n > 1 and not lo < hi):
                raise ValueError(f"bad {name} grid: range {(lo, hi)} with {n} points")
        if not self.t0_samples:
            raise ValueError("need at least one initial time")
        if not all(0.0 <= t < TWO_PI for t in self.t0_samples):
            raise ValueError("initial times must lie in [0, 2 pi)")
        if not 0 < self.convergence_tol < self.params.a:
            raise ValueError("convergence tolerance must lie in (0, a)")
        reach = max(abs(v) for v in self.x_range + self.z_range)
        if not self.escape_radius > reach:
            raise ValueError("escape radius must exceed the grid extent")
        if not self.horizon > TWO_PI:
            raise ValueError("horizon must exceed one period")
        if self.steps_per_period < 4:
            raise ValueError("need at least 4 steps per period")

    @property
    def h(self) -> float:
        return TWO_PI / self.steps_per_period

    @property
    def n_steps(self) -> int:
        return math.ceil(self.horizon / self.h - 1e-9)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.nx)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(*self.z_range, self.nz)


@numba.njit(cache=True)
def _classify_kernel(x0, z0, force, xs, zs, h, k, tol2, esc2, n_steps, n_hold, cls, when):
    # steps outer, cells inner: independent cells keep the pipeline busy
    n = x0.size
    x = x0.copy()
    z = z0.copy()
    run = np.zeros(n, np.int64)
    idx = np.arange(n)
    n_act = n
    hh = 0.5 * h
    h6 = h / 6.0
    for i in range(n_steps):
        f0 = force[2 * i]
        f1 = force[2 * i + 1]
        f2 = force[2 * i + 2]
        xr = xs[i + 1]
        zr = zs[i + 1]
        n_done = 0
        for m in range(n_act):
            xm = x[m]
            zm = z[m]
            k1x = zm
            k1z = -zm - k * xm * zm * zm + f0
            xx = xm + hh * k1x
            zz = zm + hh * k1z
            k2x = zz
            k2z = -zz - k * xx * zz * zz + f1
            xx = xm + hh * k2x
            zz = zm + hh * k2z
            k3x = zz
            k3z = -zz - k * xx * zz * zz + f1
            xx = xm + h * k3x
            zz = zm + h * k3z
            k4x = zz
            k4z = -zz - k * xx * zz * zz + f2
            xm = xm + h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            zm = zm + h6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            x[m] = xm
            z[m] = zm
            dx = xm - xr
            dz = zm - zr
            r = run[m] + 1 if dx * dx + dz * dz < tol2 else 0
            run[m] = r
            if not (xm * xm + zm * zm <= esc2):
                cls[idx[m]] = 2
                when[idx[m]] = i + 1
                n_done += 1
            elif r >= n_hold:
                cls[idx[m]] = 1
                when[idx[m]] = i + 1
                n_done += 1
        if n_done:
            w = 0
            for m in range(n_act):
                if cls[idx[m]] == 0:
                    x[w] = x[m]
                    z[w] = z[m]
                    run[w] = run[m]
                    idx[w] = idx[m]
                    w += 1
            n_act = w
            if n_act == 0:
                break


def _tables(t0: float, cfg: DoaConfig):
    """Time-only forcing at half steps and orbit points at full steps."""
    p = cfg.params
    tt = t0 + (0.5 * cfg.h) * np.arange(2 * cfg.n_steps + 1, dtype=float)
    sn, cs = np.sin(tt), np.cos(tt)
    force = p.k * p.a**3 * sn * cs * cs + p.a * cs - p.a * sn
    return force, p.a * sn[::2].copy(), p.a * cs[::2].copy()


def classify_batch(x0, z0, t0: float, cfg: DoaConfig):
    """Classify many initial states sharing one initial time.

    Returns ``(codes, steps)``: class codes and the step index at which each
    decision was made (0 for undecided).
    """
    x0 = np.ascontiguousarray(x0, dtype=float).ravel()
    z0 = np.ascontiguousarray(z0, dtype=float).ravel()
    cls = np.zeros(x0.size, np.int8)
    when = np.zeros(x0.size, np.int64)
    if x0.size:
        force, xs, zs = _tables(t0, cfg)
        _classify_kernel(
            x0, z0, force, xs, zs, cfg.h, cfg.params.k,
            cfg.convergence_tol**2, cfg.escape_radius**2,
            cfg.n_steps, cfg.steps_per_period, cls, when,
        )
    return cls, when


def classify_cell(s0, t0: float, cfg: DoaConfig) -> int:
    x, z = s0
    return int(classify_batch([x], [z], t0, cfg)[0][0])


@dataclass
class DoaGrid:
    config: DoaConfig
    per_t0: np.ndarray  # (n_t0, nx, nz) class codes

    @property
    def x(self) -> np.ndarray:
        return self.config.x

    @property
    def z(self) -> np.ndarray:
        return self.config.z

    @property
    def conservative(self) -> np.ndarray:
        return np.all(self.per_t0 == CONVERGES, axis=0)

    @property
    def always_diverges(self) -> np.ndarray:
        return np.all(self.per_t0 == DIVERGES, axis=0)

    @property
    def t0_dependent(self) -> np.ndarray:
        conv = self.per_t0 == CONVERGES
        return np.any(conv, axis=0) & ~np.all(conv, axis=0)

    @property
    def undecided(self) -> np.ndarray:
        return ~(self.conservative | self.always_diverges | self.t0_dependent)

    def counts(self) -> dict:
        return {
            "conservative": int(self.conservative.sum()),
            "alwaysDiverges": int(self.always_diverges.sum()),
            "t0Dependent": int(self.t0_dependent.sum()),
            "undecided": int(self.undecided.sum()),
        }

    def cell_index(self, x: float, z: float) -> tuple:
        """Indices of the grid node nearest to ``(x, z)``."""
        return int(np.abs(self.x - x).argmin()), int(np.abs(self.z - z).argmin())


def _grid_task(args):
    j, lo, hi, cfg = args
    xg, zg = np.meshgrid(cfg.x, cfg.z, indexing="ij")
    cls, _ = classify_batch(xg.ravel()[lo:hi], zg.ravel()[lo:hi], cfg.t0_samples[j], cfg)
    return j, lo, hi, cls


def compute_grid(cfg: DoaConfig, workers: int = 1, chunks_per_t0: int = 1) -> DoaGrid:
    """Classify every grid node for every sampled initial time.

    Work is split into ``(t0, cell range)`` items.  Each cell is integrated
    independently, so the raster does not depend on ``workers`` or on how
    the items are chunked.
    """
    n_cells = cfg.nx * cfg.nz
    n_chunks = max(1, min(chunks_per_t0, n_cells))
    edges = np.linspace(0, n_cells, n_chunks + 1).astype(int)
    tasks = [
        (j, int(lo), int(hi), cfg)
        for j in range(len(cfg.t0_samples))
        for lo, hi in zip(edges[:-1], edges[1:])
    ]
    flat = np.zeros((len(cfg.t0_samples), n_cells), np.int8)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_task, tasks))
    else:
        results = [_grid_task(t) for t in tasks]
    for j, lo, hi, cls in results:
        flat[j, lo:hi] = cls
    return DoaGrid(config=cfg, per_t0=flat.reshape(len(cfg.t0_samples), cfg.nx, cfg.nz))
