"""Quadratic Lyapunov certificate for the linearized closed loop.

``V = x^T P x / 2`` with ``P = [[1, 1], [1, eta]]``, ``eta > 1``.  Along the
linearized flow ``dV/dt = -x^T Q(t) x`` with ``Q = -(P A + A^T P) / 2``; the
certificate checks that ``Q(t)`` is positive semidefinite over one period by
dense sampling of its trace and determinant.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dynamics import linearized_a
from .integrate import Trajectory

DET_TOLERANCE = 1e-10


class ParamMismatch(ValueError):
    """The trajectory was generated for a different ``delta``."""


@dataclass(frozen=True)
class LyapunovCert:
    delta: float
    eta: float
    worst_det_q: float
    worst_trace_q: float
    argmin_t: float
    verified: bool

    @property
    def p(self) -> np.ndarray:
        return p_matrix(self.eta)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        return {
            "delta": d["delta"],
            "eta": d["eta"],
            "verified": d["verified"],
            "worstDetQ": d["worst_det_q"],
            "worstTraceQ": d["worst_trace_q"],
            "argminT": d["argmin_t"],
        }


def analytic_bounds() -> tuple:
    """``(delta_dagger, eta_dagger) = (2 (sqrt 7 - 2) / 3, 1 + sqrt 7)``."""
    r7 = math.sqrt(7.0)
    return 2.0 * (r7 - 2.0) / 3.0, 1.0 + r7


def det_bound(eta):
    """Largest ``delta`` for which the crude determinant estimate keeps ``det Q >= 0``."""
    eta = np.asarray(eta, dtype=float)
    return 4.0 * (eta - 1.0) / (eta**2 + 2.0 * eta + 4.0)


def p_matrix(eta: float) -> np.ndarray:
    return np.array([[1.0, 1.0], [1.0, eta]])


def _check_eta(eta):
    if not eta > 1:
        raise ValueError(f"eta must exceed 1, got {eta}")


def q_entries(t, delta: float, eta: float) -> tuple:
    """Entries ``(q11, q12, q22)`` of the symmetric ``Q(t)``; ``t`` may be an array."""
    t = np.asarray(t, dtype=float)
    c2 = np.cos(t) ** 2
    s2t = np.sin(2.0 * t)
    q11 = delta * c2
    q12 = 0.5 * delta * (s2t + eta * c2)
    q22 = delta * eta * s2t + (eta - 1.0)
    return q11, q12, q22


def q_matrix(t: float, delta: float, eta: float) -> np.ndarray:
    _check_eta(eta)
    q11, q12, q22 = (float(v) for v in q_entries(t, delta, eta))
    return np.array([[q11, q12], [q12, q22]])


def q_from_a(t: float, delta: float, eta: float) -> np.ndarray:
    """``-(P A(t) + A(t)^T P) / 2`` evaluated directly from the system matrix."""
    p = p_matrix(eta)
    a = linearized_a(t, delta)
    return -0.5 * (p @ a + a.T @ p)


def certify(delta: float, eta: float | None = None, n_samples: int = 10_000) -> LyapunovCert:
    """Sample ``Q(t)`` on a uniform grid over ``[0, pi]`` and check semidefiniteness.

    ``eta=None`` uses the optimal ``1 + sqrt 7``.  ``Q`` is exactly singular
    where ``cos t = 0``, hence the small negative tolerance on the determinant.
    """
    if eta is None:
        eta = analytic_bounds()[1]
    _check_eta(eta)
    if n_samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {n_samples}")
    t = np.linspace(0.0, math.pi, n_samples)
    q11, q12, q22 = q_entries(t, delta, eta)
    det = q11 * q22 - q12 * q12
    tr = q11 + q22
    i = int(np.argmin(det))
    worst_det = float(det[i])
    worst_tr = float(tr.min())
    return LyapunovCert(
        delta=float(delta),
        eta=float(eta),
        worst_det_q=worst_det,
        worst_trace_q=worst_tr,
        argmin_t=float(t[i]),
        verified=bool(worst_det >= -DET_TOLERANCE and worst_tr > 0),
    )


def v_dot_along_flow(traj: Trajectory, eta: float, delta: float | None = None) -> np.ndarray:
    """Rows ``(t, V, dV/dt)`` along a trajectory of the linearized system.

    ``traj.params.delta`` identifies the system; passing a different
    ``delta`` raises :class:`ParamMismatch`.
    """
    _check_eta(eta)
    traj_delta = traj.params.delta if traj.params is not None else None
    if delta is None:
        if traj_delta is None:
            raise ParamMismatch("trajectory carries no parameters and no delta was given")
        delta = traj_delta
    elif traj_delta is not None and not math.isclose(traj_delta, delta, rel_tol=1e-12, abs_tol=1e-15):
        raise ParamMismatch(f"trajectory delta {traj_delta} != requested {delta}")
    x = traj.states[:, 0]
    z = traj.states[:, 1]
    v = 0.5 * (x * x + 2.0 * x * z + eta * z * z)
    q11, q12, q22 = q_entries(traj.t, delta, eta)
    vdot = -(q11 * x * x + 2.0 * q12 * x * z + q22 * z * z)
    return np.column_stack([traj.t, v, vdot])
