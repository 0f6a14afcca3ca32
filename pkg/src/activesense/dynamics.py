"""Plant, outputs, reference orbit and the active-sensing closed loop.

The plant is a unit mass-damper ``x' = z, z' = -z + u`` whose sensor only
reports rates.  With the quadratic scene (``gamma(x) = x``) and a velocity
sensor the measured output is ``y = (x z, z)``.  The controller adds a
periodic excitation ``alpha(t) = a cos t - a sin t`` to a nonlinear output
feedback, which makes ``(a sin t, a cos t)`` the unique periodic solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np


class State(NamedTuple):
    x: float
    z: float


class Output(NamedTuple):
    y1: float
    y2: float


@dataclass(frozen=True)
class SystemParams:
    """Feedback gain ``k`` and excitation amplitude ``a``; ``delta = k a**2``."""

    k: float
    a: float
    delta: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k >= 0):
            raise ValueError(f"k must be finite and >= 0, got {self.k}")
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"a must be finite and > 0, got {self.a}")
        object.__setattr__(self, "delta", self.k * self.a**2)

    @classmethod
    def from_delta(cls, delta: float) -> "SystemParams":
        """Representative parameters for a given ``delta``.

        Uses ``k = 1, a = sqrt(delta)``; ``delta = 0`` maps to ``k = 0, a = 1``
        since the amplitude must stay positive.
        """
        if not delta >= 0:
            raise ValueError(f"delta must be >= 0, got {delta}")
        if delta == 0:
            return cls(k=0.0, a=1.0)
        return cls(k=1.0, a=math.sqrt(delta))


@dataclass(frozen=True)
class ScalarField:
    """A scalar map ``gamma`` with its first two derivatives."""

    f: Callable[[float], float]
    df: Callable[[float], float]
    d2f: Callable[[float], float]
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.f(x)

    def describe(self) -> dict:
        return {"name": self.name, **self.params}


def quadratic_scene() -> ScalarField:
    """``s(x) = x**2 / 2`` so ``gamma(x) = x``."""
    return ScalarField(
        f=lambda x: x,
        df=lambda x: 1.0 + 0.0 * x,
        d2f=lambda x: 0.0 * x,
        name="quadratic",
    )


def hyperbolic_scene(c0: float, c1: float) -> ScalarField:
    """``gamma(x) = 1 / (c1 x + c0)``, the case where the observability test degenerates."""
    return ScalarField(
        f=lambda x: 1.0 / (c1 * x + c0),
        df=lambda x: -c1 / (c1 * x + c0) ** 2,
        d2f=lambda x: 2.0 * c1**2 / (c1 * x + c0) ** 3,
        name="hyperbolic",
        params={"c0": c0, "c1": c1},
    )


def open_loop_rhs(u: Callable = lambda t: 0.0) -> Callable:
    """``f(t, y)`` for the plant driven by an open-loop input ``u(t)``."""

    def rhs(t, y):
        return open_loop_field(y, u(t))

    return rhs


def open_loop_field(s, u):
    x, z = s
    return State(z, -z + u)


def augmented_output(s) -> Output:
    x, z = s
    return Output(x * z, z)


def active_sensing_input(t, a):
    return a * np.cos(t) - a * np.sin(t)


def reference_orbit(t, a) -> State:
    return State(a * np.sin(t), a * np.cos(t))


def reference_orbit_rate(t, a) -> State:
    return State(a * np.cos(t), -a * np.sin(t))


def control_law(s, t, p: SystemParams):
    """Excitation minus ``k (F(y) - F(y*))`` with ``F(y) = y1 y2``."""
    x, z = s
    a = p.a
    f_meas = x * z * z
    f_ref = a**3 * np.sin(t) * np.cos(t) ** 2
    return active_sensing_input(t, a) - p.k * (f_meas - f_ref)


def closed_loop_field(s, t, p: SystemParams) -> State:
    x, z = s
    st, ct = math.sin(t), math.cos(t)
    a, k = p.a, p.k
    return State(z, -z - k * (x * z * z - a**3 * st * ct * ct) + a * ct - a * st)


def linearized_a(t, delta: float) -> np.ndarray:
    """Jacobian of the closed loop along the reference orbit (period pi)."""
    c = math.cos(t)
    return np.array([[0.0, 1.0], [-delta * c * c, -1.0 - delta * math.sin(2.0 * t)]])


def closed_loop_rhs(p: SystemParams) -> Callable:
    """``f(t, y)`` form of the closed loop for the integrators."""

    def rhs(t, y):
        return closed_loop_field(y, t, p)

    return rhs


def linearized_rhs(delta: float) -> Callable:
    """``f(t, y)`` for the deviation dynamics ``y' = A(t) y``."""

    def rhs(t, y):
        c = math.cos(t)
        return State(y[1], -delta * c * c * y[0] + (-1.0 - delta * math.sin(2.0 * t)) * y[1])

    return rhs


def orbit_distance(t, states, a) -> np.ndarray:
    """Euclidean distance from each state to the reference orbit at the same time."""
    states = np.asarray(states, dtype=float)
    xr, zr = reference_orbit(np.asarray(t, dtype=float), a)
    return np.hypot(states[..., 0] - xr, states[..., 1] - zr)
