"""Monodromy matrices and Floquet multipliers of the pi-periodic linearization.

The linearized closed loop depends on the gains only through ``delta = k a**2``.
Monodromy matrices are computed for whole arrays of ``delta`` at once; a
single evaluation is the same kernel on a length-one array, so sweep entries
and direct calls agree bit for bit.
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .integrate import MONODROMY_CONFIG, NonFiniteState, StepperConfig, time_grid

PERIOD = math.pi
DET_MONODROMY = math.exp(-math.pi)


class BracketInvalid(ValueError):
    """The bisection interval does not straddle the stability boundary."""


@dataclass(frozen=True)
class FloquetResult:
    delta: float
    monodromy: np.ndarray
    multipliers: tuple
    spectral_radius: float
    stable: bool
    discriminant: float
    error: Optional[str] = None


def monodromy_batch(deltas, cfg: StepperConfig = MONODROMY_CONFIG) -> np.ndarray:
    """Monodromy matrices ``Phi(pi)``, ``Phi(0) = I``, for every entry of ``deltas``.

    Returns an array of shape ``(len(deltas), 2, 2)``.  Entries whose flow
    overflows come back as NaN.
    """
    d = np.atleast_1d(np.asarray(deltas, dtype=float))
    grid = time_grid(0.0, PERIOD, cfg.h)
    # columns of Phi: (p11, p21) and (p12, p22)
    p11 = np.ones_like(d)
    p12 = np.zeros_like(d)
    p21 = np.zeros_like(d)
    p22 = np.ones_like(d)

    def rates(q11, q12, q21, q22, c, s2):
        lo = -d * (c * c)
        di = -1.0 - d * s2
        return q21, q22, lo * q11 + di * q21, lo * q12 + di * q22

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(len(grid) - 1):
            t = grid[i]
            h = grid[i + 1] - t
            hh = 0.5 * h
            c0, s0 = math.cos(t), math.sin(2.0 * t)
            c1, s1 = math.cos(t + hh), math.sin(2.0 * (t + hh))
            c2, s2 = math.cos(t + h), math.sin(2.0 * (t + h))
            k1 = rates(p11, p12, p21, p22, c0, s0)
            k2 = rates(p11 + hh * k1[0], p12 + hh * k1[1], p21 + hh * k1[2], p22 + hh * k1[3], c1, s1)
            k3 = rates(p11 + hh * k2[0], p12 + hh * k2[1], p21 + hh * k2[2], p22 + hh * k2[3], c1, s1)
            k4 = rates(p11 + h * k3[0], p12 + h * k3[1], p21 + h * k3[2], p22 + h * k3[3], c2, s2)
            w = h / 6.0
            p11 = p11 + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            p12 = p12 + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            p21 = p21 + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            p22 = p22 + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    out = np.empty((d.size, 2, 2))
    out[:, 0, 0], out[:, 0, 1], out[:, 1, 0], out[:, 1, 1] = p11, p12, p21, p22
    bad = ~np.all(np.isfinite(out), axis=(1, 2))
    out[bad] = np.nan
    return out


def monodromy(delta: float, cfg: StepperConfig = MONODROMY_CONFIG) -> np.ndarray:
    if not delta >= 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    m = monodromy_batch([delta], cfg)[0]
    if not np.all(np.isfinite(m)):
        raise NonFiniteState(f"monodromy overflowed for delta={delta}")
    return m


def discriminant(m) -> float:
    """``tr(M)**2 - 4 det(M)``, written as ``(m11 - m22)**2 + 4 m12 m21`` to avoid cancellation."""
    m = np.asarray(m, dtype=float)
    return float((m[0, 0] - m[1, 1]) ** 2 + 4.0 * m[0, 1] * m[1, 0])


def multipliers(m) -> tuple:
    """Eigenvalues of a real 2x2 matrix, largest modulus first (ties: larger real part)."""
    m = np.asarray(m, dtype=float)
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = discriminant(m)
    if disc >= 0:
        root = math.sqrt(disc)
        big = 0.5 * (tr + math.copysign(root, tr))
        small = det / big if big != 0 else 0.5 * (tr - math.copysign(root, tr))
        pair = [complex(big), complex(small)]
    else:
        im = 0.5 * math.sqrt(-disc)
        pair = [complex(0.5 * tr, im), complex(0.5 * tr, -im)]
    pair.sort(key=lambda lam: (-abs(lam), -lam.real, -lam.imag))
    return tuple(pair)


def _result(delta: float, m: np.ndarray) -> FloquetResult:
    if not np.all(np.isfinite(m)):
        nan = complex(math.nan, math.nan)
        return FloquetResult(
            delta=delta,
            monodromy=m,
            multipliers=(nan, nan),
            spectral_radius=math.nan,
            stable=False,
            discriminant=math.nan,
            error="NonFiniteState",
        )
    lams = multipliers(m)
    rho = max(abs(lam) for lam in lams)
    return FloquetResult(
        delta=delta,
        monodromy=m,
        multipliers=lams,
        spectral_radius=rho,
        stable=rho < 1.0,
        discriminant=discriminant(m),
    )


def analyze(delta: float, cfg: StepperConfig = MONODROMY_CONFIG) -> FloquetResult:
    return _result(float(delta), monodromy_batch([delta], cfg)[0])


def spectral_radius(delta: float, cfg: StepperConfig = MONODROMY_CONFIG) -> float:
    return analyze(delta, cfg).spectral_radius


def delta_grid(delta_min: float, delta_max: float, step: float) -> np.ndarray:
    if not (0 <= delta_min < delta_max):
        raise ValueError(f"need 0 <= delta_min < delta_max, got {delta_min}, {delta_max}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    n = math.floor((delta_max - delta_min) / step + 1e-9)
    return delta_min + step * np.arange(n + 1, dtype=float)


def sweep_delta(
    delta_min: float,
    delta_max: float,
    step: float = 0.01,
    cfg: StepperConfig = MONODROMY_CONFIG,
    workers: int = 1,
) -> list:
    """Floquet analysis on a uniform ``delta`` grid.

    With ``workers > 1`` the grid is split into contiguous chunks evaluated in
    separate processes; the assembled list is identical to the serial one.
    """
    deltas = delta_grid(delta_min, delta_max, step)
    if workers > 1 and deltas.size > 1:
        chunks = np.array_split(deltas, min(workers, deltas.size))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(monodromy_batch, chunks, [cfg] * len(chunks)))
        mats = np.concatenate(parts)
    else:
        mats = monodromy_batch(deltas, cfg)
    return [_result(float(d), m) for d, m in zip(deltas, mats)]


def bisect(fun, lo: float, hi: float, tol: float) -> float:
    """Midpoint of a bracket ``[lo, hi]`` shrunk to width ``tol`` around a sign change of ``fun``."""
    f_lo = fun(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fun(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_critical_delta(
    lo: float = 3.0,
    hi: float = 3.5,
    tol: float = 1e-4,
    cfg: StepperConfig = MONODROMY_CONFIG,
) -> float:
    """Largest stable ``delta``: bisection on ``spectral_radius(delta) - 1``."""

    def excess(d):
        return spectral_radius(d, cfg) - 1.0

    if not (excess(lo) < 0 < excess(hi)):
        raise BracketInvalid(
            f"spectral radius must be < 1 at {lo} and > 1 at {hi}"
        )
    return bisect(excess, lo, hi, tol)


def discriminant_crossings(results: list, tol: float = 1e-6, cfg: StepperConfig = MONODROMY_CONFIG) -> list:
    """Refined ``delta`` values where the multipliers switch between real and complex.

    Sign changes of the discriminant between adjacent sweep points are
    bisected down to ``tol``.
    """

    def disc(d):
        return analyze(d, cfg).discriminant

    roots = []
    for left, right in zip(results, results[1:]):
        if left.error or right.error:
            continue
        if (left.discriminant < 0) != (right.discriminant < 0):
            roots.append(bisect(disc, left.delta, right.delta, tol))
    return roots


def floquet_exponents(lams) -> tuple:
    """``log(lambda) / pi`` for each multiplier."""
    return tuple(cmath.log(lam) / PERIOD for lam in lams)
