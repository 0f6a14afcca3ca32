"""Observability diagnostics and the output-feedback impossibility check.

At rest (``z = 0``) the rate sensor reads zero wherever the plant sits, so
any dynamic output feedback sees identical measurements for every position.
``impossibility_witness`` evaluates that blindness directly: the coupled
plant-plus-controller vector field is compared at two positions on the
``z = 0`` slice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import ScalarField, State, augmented_output, quadratic_scene

RANK_THRESHOLD = 1e-12
CONDITION_THRESHOLD = 1e-9

A_OPEN = np.array([[0.0, 1.0], [0.0, -1.0]])


@dataclass(frozen=True)
class ObservabilityReport:
    point: State
    gamma: dict
    linear_rank: int
    nonlinear_condition: float
    locally_observable: bool

    def to_json_dict(self) -> dict:
        return {
            "point": {"x": self.point.x, "z": self.point.z},
            "gamma": self.gamma,
            "linearRank": self.linear_rank,
            "nonlinearCondition": self.nonlinear_condition,
            "locallyObservable": self.locally_observable,
        }


@dataclass
class GenericFeedback:
    """Dynamic output feedback ``q' = g(q, y, t)``, ``u = law(y, q, t)``.

    Both callables take ``q`` of shape ``(nq, ...)`` and ``y`` of shape
    ``(2, ...)``; extra trailing axes broadcast.
    """

    g: Callable
    law: Callable
    nq: int
    name: str = "feedback"
    q0: np.ndarray = field(default=None)


def linear_observability_rank(gamma_star: float) -> int:
    """Rank of ``[C; C A]`` for the plant linearized at rest, ``C = [0, gamma*]``."""
    c = np.array([0.0, gamma_star])
    obs = np.vstack([c, c @ A_OPEN])
    scale = max(1.0, float(np.abs(obs).max()))
    if abs(obs[0, 0] * obs[1, 1] - obs[0, 1] * obs[1, 0]) > RANK_THRESHOLD * scale**2:
        return 2
    if np.any(np.abs(obs) > RANK_THRESHOLD * scale):
        return 1
    return 0


def nonlinear_condition(s, gamma: ScalarField):
    """``z**2 (2 gamma'(x)**2 - gamma(x) gamma''(x))``; nonzero means locally observable."""
    x, z = s
    return z * z * (2.0 * gamma.df(x) ** 2 - gamma.f(x) * gamma.d2f(x))


def report(s, gamma: ScalarField | None = None) -> ObservabilityReport:
    gamma = gamma or quadratic_scene()
    x, z = (float(v) for v in s)
    cond = float(nonlinear_condition((x, z), gamma))
    return ObservabilityReport(
        point=State(x, z),
        gamma=gamma.describe(),
        linear_rank=linear_observability_rank(float(gamma.f(x))),
        nonlinear_condition=cond,
        locally_observable=abs(cond) > CONDITION_THRESHOLD,
    )


def coupled_field(fb: GenericFeedback, s, q, t, output: Callable = augmented_output):
    """Rates ``(x', z', q')`` of the plant in feedback with ``fb`` through ``output``."""
    x, z = s
    y = np.asarray(output((x, z)))
    u = fb.law(y, q, t)
    qdot = fb.g(q, y, t)
    return np.asarray(z), np.asarray(-z + u), np.asarray(qdot)


def impossibility_witness(fb: GenericFeedback, x_shift, t, q=None, output: Callable = augmented_output):
    """Norm of the coupled-field difference between ``(0, 0, q)`` and ``(x_shift, 0, q)``.

    Vectorized over ``x_shift`` and ``t``.  With the rate-type augmented
    output it is zero for every feedback.
    """
    x_shift = np.asarray(x_shift, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(x_shift.shape, t.shape)
    if q is None:
        q = np.zeros((fb.nq,) + shape) if fb.q0 is None else np.broadcast_to(
            np.reshape(fb.q0, (fb.nq,) + (1,) * len(shape)), (fb.nq,) + shape
        )
    zero = np.zeros(shape)
    base = coupled_field(fb, (zero, zero), q, t, output)
    shifted = coupled_field(fb, (zero + x_shift, zero), q, t, output)
    sq = sum(
        np.sum(np.reshape((b - s) ** 2, (-1,) + shape), axis=0) for b, s in zip(base, shifted)
    )
    return np.sqrt(sq)


def pid_feedback(kp: float = 2.0, ki: float = 0.5, kd: float = 1.0) -> GenericFeedback:
    """PID-style controller: ``q`` integrates both outputs, ``u`` mixes them."""

    def g(q, y, t):
        return np.stack([y[0], y[1]])

    def law(y, q, t):
        return -kp * y[0] - ki * (q[0] + q[1]) - kd * y[1] + 0.0 * t

    return GenericFeedback(g=g, law=law, nq=2, name="pid", q0=np.array([0.3, -0.2]))


class _RandomSmooth:
    """``c0 + sum_j c_j prim_j(w_j . v + b_j)`` over inputs ``v = (q, y, t)``.

    Primitives are low-degree polynomials, sine, cosine and tanh.
    """

    PRIMS = (
        lambda s: s,
        lambda s: s * s,
        lambda s: s * s * s,
        np.sin,
        np.cos,
        np.tanh,
    )

    def __init__(self, rng: np.random.Generator, n_in: int, n_terms: int):
        self.c0 = rng.normal()
        self.coef = rng.normal(size=n_terms)
        self.w = rng.normal(size=(n_terms, n_in))
        self.b = rng.uniform(-math.pi, math.pi, size=n_terms)
        self.kind = rng.integers(0, len(self.PRIMS), size=n_terms)

    def __call__(self, v):
        out = self.c0 + 0.0 * v[0]
        for c, w, b, kind in zip(self.coef, self.w, self.b, self.kind):
            arg = b + sum(wi * vi for wi, vi in zip(w, v))
            out = out + c * self.PRIMS[kind](arg)
        return out


def random_feedback(rng: np.random.Generator, max_nq: int = 3, max_terms: int = 4) -> GenericFeedback:
    """A dynamic feedback built from seeded random smooth primitives."""
    nq = int(rng.integers(1, max_nq + 1))
    n_in = nq + 3
    g_parts = [_RandomSmooth(rng, n_in, int(rng.integers(1, max_terms + 1))) for _ in range(nq)]
    law_part = _RandomSmooth(rng, n_in, int(rng.integers(1, max_terms + 1)))
    q0 = rng.normal(size=nq)

    def inputs(q, y, t):
        return [*q, *y, t + 0.0 * y[0]]

    def g(q, y, t):
        v = inputs(q, y, t)
        return np.stack([part(v) for part in g_parts])

    def law(y, q, t):
        return law_part(inputs(q, y, t))

    return GenericFeedback(g=g, law=law, nq=nq, name="random", q0=q0)
