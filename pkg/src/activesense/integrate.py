"""Fixed-step integration of small nonautonomous systems and 2x2 matrix flows."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .dynamics import State, SystemParams

RK4 = "RK4"
DP45 = "DP45"


class NonFiniteState(ArithmeticError):
    """The vector field produced NaN or Inf."""


@dataclass(frozen=True)
class StepperConfig:
    h: float = 1e-3
    method: str = RK4
    escape_radius: float = 1e6

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"step size must be positive, got {self.h}")
        if self.method not in (RK4, DP45):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.escape_radius > 0:
            raise ValueError(f"escape radius must be positive, got {self.escape_radius}")


# Defaults used throughout: monodromy at pi/2000, nonlinear runs at 1e-3.
MONODROMY_CONFIG = StepperConfig(h=math.pi / 2000)
SIMULATION_CONFIG = StepperConfig(h=1e-3)


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    params: Optional[SystemParams]
    t0: float
    step_size: float
    truncated: bool = False
    method: str = RK4

    @property
    def samples(self) -> Iterator[tuple]:
        for ti, (x, z) in zip(self.t, self.states):
            yield float(ti), State(float(x), float(z))

    @property
    def final(self) -> State:
        return State(*map(float, self.states[-1]))

    def __len__(self):
        return len(self.t)


def time_grid(t0: float, t_end: float, h: float) -> np.ndarray:
    """Uniform grid ``t0 + i h`` ending exactly at ``t_end``.

    When ``t_end - t0`` is not a multiple of ``h`` the last interval is shorter.
    """
    if not t_end > t0:
        raise ValueError(f"t_end must exceed t0 ({t_end} <= {t0})")
    ratio = (t_end - t0) / h
    n = round(ratio)
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        n = math.floor(ratio)
        grid = t0 + h * np.arange(n + 2, dtype=float)
    else:
        grid = t0 + h * np.arange(n + 1, dtype=float)
    grid[-1] = t_end
    return grid


def _rk4_step(f, t, y, h):
    if len(y) == 2:
        return _rk4_step_planar(f, t, y, h)
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, [yi + 0.5 * h * ki for yi, ki in zip(y, k1)])
    k3 = f(t + 0.5 * h, [yi + 0.5 * h * ki for yi, ki in zip(y, k2)])
    k4 = f(t + h, [yi + h * ki for yi, ki in zip(y, k3)])
    return [
        yi + h / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
    ]


def _rk4_step_planar(f, t, y, h):
    x, z = y
    hh = 0.5 * h
    a1, b1 = f(t, (x, z))
    a2, b2 = f(t + hh, (x + hh * a1, z + hh * b1))
    a3, b3 = f(t + hh, (x + hh * a2, z + hh * b2))
    a4, b4 = f(t + h, (x + h * a3, z + h * b3))
    return (
        x + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        z + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
    )


# Dormand-Prince tableau; only the fifth-order weights are used (fixed step).
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)


def _dp5_step(f, t, y, h):
    ks = []
    for c, row in zip(_DP_C, _DP_A):
        yi = [
            y[j] + h * sum(aij * k[j] for aij, k in zip(row, ks))
            for j in range(len(y))
        ]
        ks.append(f(t + c * h, yi))
    return [
        y[j] + h * sum(b * k[j] for b, k in zip(_DP_B, ks)) for j in range(len(y))
    ]


_STEPPERS = {RK4: _rk4_step, DP45: _dp5_step}


def integrate_state(
    field: Callable,
    s0,
    t0: float,
    t_end: float,
    cfg: StepperConfig = SIMULATION_CONFIG,
    params: Optional[SystemParams] = None,
) -> Trajectory:
    """Integrate ``s' = field(t, s)`` from ``(t0, s0)`` to ``t_end``.

    Stops early, with ``truncated=True``, once the state norm exceeds
    ``cfg.escape_radius``.  Raises :class:`NonFiniteState` on NaN/Inf.
    """
    step = _STEPPERS[cfg.method]
    grid = time_grid(t0, t_end, cfg.h)
    y = [float(v) for v in s0]
    if not all(math.isfinite(v) for v in y):
        raise NonFiniteState(f"initial state {y} is not finite")
    out = np.empty((len(grid), len(y)))
    out[0] = y
    esc2 = cfg.escape_radius**2
    truncated = False
    n = len(grid)
    for i in range(len(grid) - 1):
        ti = grid[i]
        y = step(field, ti, y, grid[i + 1] - ti)
        r2 = sum(v * v for v in y)
        if not math.isfinite(r2):
            raise NonFiniteState(f"non-finite state at t={grid[i + 1]}")
        out[i + 1] = y
        if r2 > esc2:
            truncated = True
            n = i + 2
            break
    return Trajectory(
        t=grid[:n].copy(),
        states=out[:n],
        params=params,
        t0=float(t0),
        step_size=cfg.h,
        truncated=truncated,
        method=cfg.method,
    )


def integrate_matrix_ode(
    a_of_t: Callable,
    m0,
    t0: float,
    t_end: float,
    cfg: StepperConfig = MONODROMY_CONFIG,
) -> np.ndarray:
    """Solve ``Phi' = A(t) Phi`` with ``Phi(t0) = m0`` by RK4; returns ``Phi(t_end)``."""
    grid = time_grid(t0, t_end, cfg.h)
    phi = np.array(m0, dtype=float)
    for i in range(len(grid) - 1):
        t = grid[i]
        h = grid[i + 1] - t
        a1 = np.asarray(a_of_t(t))
        a2 = np.asarray(a_of_t(t + 0.5 * h))
        a3 = np.asarray(a_of_t(t + h))
        k1 = a1 @ phi
        k2 = a2 @ (phi + 0.5 * h * k1)
        k3 = a2 @ (phi + 0.5 * h * k2)
        k4 = a3 @ (phi + h * k3)
        phi = phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(phi)):
            raise NonFiniteState(f"non-finite fundamental matrix at t={grid[i + 1]}")
    return phi
