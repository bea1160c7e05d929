"""Divergence-free drift C = S grad(U) with S antisymmetric.

For antisymmetric S the two structural conditions hold identically:
C . grad(U) = (grad U)^T S grad U = 0, and div C = trace(S Hess U) = 0.
``verify_conditions`` re-checks both numerically on random probe points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .potentials import InputError, Scenario, _check_point

__all__ = ["DriftField", "ConditionReport", "eval_drift", "verify_conditions",
           "rk4_drift_orbit"]


@dataclass(frozen=True)
class DriftField:
    scenario: Scenario
    s: float = 1.0           # S_12 = s, S_21 = -s
    delta: float = 0.0       # irreversibility strength, applied by the integrator
    s_matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        if not np.isfinite(self.s):
            raise InputError("s must be finite")
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise InputError(f"delta must be a finite nonnegative float, got {self.delta}")
        object.__setattr__(
            self, "s_matrix", np.array([[0.0, self.s], [-self.s, 0.0]])
        )

    @staticmethod
    def from_matrix(scenario, s_matrix, delta=0.0) -> "DriftField":
        m = np.asarray(s_matrix, dtype=float)
        if m.shape != (2, 2) or not np.allclose(m, -m.T, atol=0.0):
            raise InputError(f"s_matrix must be 2x2 antisymmetric, got {m!r}")
        return DriftField(scenario, s=float(m[0, 1]), delta=delta)

    def c(self, x, y):
        """Vectorized C = S grad U (unscaled by delta)."""
        gx, gy = self.scenario.grad_u(x, y)
        return self.s * np.asarray(gy), -self.s * np.asarray(gx)


def eval_drift(field: DriftField, point) -> np.ndarray:
    x, y = _check_point(point)
    cx, cy = field.c(x, y)
    return np.array([float(cx), float(cy)])


@dataclass(frozen=True)
class ConditionReport:
    max_orthogonality: float
    max_divergence: float
    orthogonality_ok: bool
    divergence_ok: bool
    worst_orthogonality_point: np.ndarray
    worst_divergence_point: np.ndarray
    n_probes: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.orthogonality_ok and self.divergence_ok


def verify_conditions(field: DriftField, n_probes: int = 100, tol: float = 1e-6,
                      seed: int = 0, box: float = 2.5) -> ConditionReport:
    """Check C.gradU = 0 and finite-difference div C = 0 at random probes."""
    if n_probes < 1 or not tol > 0:
        raise InputError("need n_probes >= 1 and tol > 0")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-box, box, size=(n_probes, 2))
    x, y = pts[:, 0], pts[:, 1]

    gx, gy = field.scenario.grad_u(x, y)
    cx, cy = field.c(x, y)
    ortho = np.abs(cx * gx + cy * gy)

    h = 1e-5
    div = (
        (field.c(x + h, y)[0] - field.c(x - h, y)[0])
        + (field.c(x, y + h)[1] - field.c(x, y - h)[1])
    ) / (2 * h)
    div = np.abs(div)

    io, idv = int(np.argmax(ortho)), int(np.argmax(div))
    return ConditionReport(
        max_orthogonality=float(ortho[io]),
        max_divergence=float(div[idv]),
        orthogonality_ok=bool(ortho[io] <= tol),
        divergence_ok=bool(div[idv] <= tol),
        worst_orthogonality_point=pts[io],
        worst_divergence_point=pts[idv],
        n_probes=n_probes,
        tol=tol,
    )


def rk4_drift_orbit(field: DriftField, x0, t_final: float, dt: float = 1e-3):
    """Integrate the pure fast flow xdot = C(x) by RK4; returns (times, states).

    Used to check energy conservation along level sets and as an ergodic-orbit
    oracle for level-set averages.
    """
    p = np.asarray(x0, dtype=float)
    n = int(round(t_final / dt))
    out = np.empty((n + 1, 2))
    out[0] = p

    def rhs(q):
        cx, cy = field.c(q[0], q[1])
        return np.array([float(cx), float(cy)])

    for k in range(n):
        k1 = rhs(p)
        k2 = rhs(p + 0.5 * dt * k1)
        k3 = rhs(p + 0.5 * dt * k2)
        k4 = rhs(p + dt * k3)
        p = p + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = p
    return np.arange(n + 1) * dt, out
