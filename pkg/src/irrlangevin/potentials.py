"""Potentials, their derivatives, critical points, observables and the Gibbs density.

Shipped scenarios are the quadratic bowl U = (x^2 + y^2)/2 and the double well
U = (x^2 - 1)^2/4 + y^2/2, both on R^2 with hand-coded derivatives.  Custom
polynomial potentials can be declared by coefficient lists; their derivatives
are generated symbolically from the coefficient array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

__all__ = [
    "CriticalPoint",
    "Scenario",
    "GibbsSpec",
    "get_scenario",
    "scenario_names",
    "polynomial_scenario",
    "eval_gradient",
    "classify_critical_points",
    "gibbs_log_density",
    "gibbs_quadrature_mean",
]

GRAD_TOL = 1e-12
HESS_MIN_EIG = 1e-8


class InputError(ValueError):
    """Invalid argument to a scenario or Gibbs evaluator."""


@dataclass(frozen=True)
class CriticalPoint:
    location: np.ndarray
    value: float
    kind: str  # "minimum" | "saddle" | "maximum"

    def __post_init__(self):
        object.__setattr__(self, "location", np.asarray(self.location, dtype=float))


@dataclass(frozen=True)
class Scenario:
    """A potential U on R^2 with evaluators and named observables.

    The callables are vectorized: they accept broadcastable arrays x, y.
    ``hess_u(x, y)`` returns an array of shape ``(..., 2, 2)``.
    """

    name: str
    u: Callable
    grad_u: Callable
    hess_u: Callable
    laplacian_u: Callable
    critical_points: tuple
    observables: dict = field(default_factory=dict)
    dim: int = 2

    def u_point(self, point) -> float:
        x, y = _check_point(point)
        return float(self.u(x, y))

    def grad_point(self, point) -> np.ndarray:
        x, y = _check_point(point)
        gx, gy = self.grad_u(x, y)
        return np.array([float(gx), float(gy)])

    def hess_point(self, point) -> np.ndarray:
        x, y = _check_point(point)
        return np.asarray(self.hess_u(x, y), dtype=float)


@dataclass(frozen=True)
class GibbsSpec:
    """Target measure pi propto exp(-U/beta)."""

    scenario: Scenario
    beta: float

    def __post_init__(self):
        if not (self.beta > 0):
            raise InputError(f"beta must be positive, got {self.beta}")


def _check_point(point):
    p = np.asarray(point, dtype=float)
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise InputError(f"expected a finite 2-d point, got {point!r}")
    return p[0], p[1]


# ---------------------------------------------------------------------------
# shipped scenarios
# ---------------------------------------------------------------------------

def _bowl_u(x, y):
    return 0.5 * (np.asarray(x) ** 2 + np.asarray(y) ** 2)


def _bowl_grad(x, y):
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _bowl_hess(x, y):
    x = np.asarray(x, dtype=float)
    h = np.zeros(x.shape + (2, 2))
    h[..., 0, 0] = 1.0
    h[..., 1, 1] = 1.0
    return h


def _bowl_lap(x, y):
    return 2.0 * np.ones_like(np.asarray(x, dtype=float))


def _dw_u(x, y):
    x = np.asarray(x)
    y = np.asarray(y)
    return 0.25 * (x**2 - 1.0) ** 2 + 0.5 * y**2


def _dw_grad(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x * (x**2 - 1.0), y


def _dw_hess(x, y):
    x = np.asarray(x, dtype=float)
    h = np.zeros(x.shape + (2, 2))
    h[..., 0, 0] = 3.0 * x**2 - 1.0
    h[..., 1, 1] = 1.0
    return h


def _dw_lap(x, y):
    x = np.asarray(x, dtype=float)
    return 3.0 * x**2


def _obs_f2(x, y):
    return np.asarray(x) ** 2 + np.asarray(y) ** 2


def _obs_x(x, y):
    return np.asarray(x, dtype=float) + 0.0 * np.asarray(y)


_STANDARD_OBSERVABLES = {"f2": _obs_f2, "x": _obs_x}

BOWL = Scenario(
    name="bowl",
    u=_bowl_u,
    grad_u=_bowl_grad,
    hess_u=_bowl_hess,
    laplacian_u=_bowl_lap,
    critical_points=(CriticalPoint((0.0, 0.0), 0.0, "minimum"),),
    observables=dict(_STANDARD_OBSERVABLES),
)

DOUBLE_WELL = Scenario(
    name="double_well",
    u=_dw_u,
    grad_u=_dw_grad,
    hess_u=_dw_hess,
    laplacian_u=_dw_lap,
    critical_points=(
        CriticalPoint((-1.0, 0.0), 0.0, "minimum"),
        CriticalPoint((1.0, 0.0), 0.0, "minimum"),
        CriticalPoint((0.0, 0.0), 0.25, "saddle"),
    ),
    observables=dict(_STANDARD_OBSERVABLES),
)

_REGISTRY = {"bowl": BOWL, "double_well": DOUBLE_WELL}


def scenario_names():
    return sorted(_REGISTRY)


def get_scenario(name: str) -> Scenario:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise InputError(
            f"unknown scenario {name!r}; available: {', '.join(scenario_names())}"
        ) from None


# ---------------------------------------------------------------------------
# custom polynomial potentials
# ---------------------------------------------------------------------------

class _Poly2D:
    """Bivariate polynomial sum_k c_k x^i_k y^j_k with exact derivatives."""

    def __init__(self, terms):
        self.terms = [(int(i), int(j), float(c)) for i, j, c in terms]

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for i, j, c in self.terms:
            out += c * x**i * y**j
        return out

    def diff(self, axis):
        out = []
        for i, j, c in self.terms:
            if axis == 0 and i > 0:
                out.append((i - 1, j, c * i))
            elif axis == 1 and j > 0:
                out.append((i, j - 1, c * j))
        return _Poly2D(out)


def polynomial_scenario(name: str, terms: Sequence, seeds=None,
                        observables=None) -> Scenario:
    """Build a scenario from polynomial terms ``[(i, j, coeff), ...]``.

    Critical points are refined by Newton iteration from ``seeds`` (defaults
    to a coarse lattice over [-2, 2]^2).
    """
    u = _Poly2D(terms)
    ux, uy = u.diff(0), u.diff(1)
    uxx, uxy, uyy = ux.diff(0), ux.diff(1), uy.diff(1)

    def grad(x, y):
        return ux(x, y), uy(x, y)

    def hess(x, y):
        a = np.asarray(uxx(x, y), dtype=float)
        h = np.zeros(a.shape + (2, 2))
        h[..., 0, 0] = a
        h[..., 0, 1] = h[..., 1, 0] = uxy(x, y)
        h[..., 1, 1] = uyy(x, y)
        return h

    def lap(x, y):
        return uxx(x, y) + uyy(x, y)

    scen = Scenario(
        name=name, u=u, grad_u=grad, hess_u=hess, laplacian_u=lap,
        critical_points=(),
        observables=dict(_STANDARD_OBSERVABLES, **(observables or {})),
    )
    cps = _find_critical_points(scen, seeds)
    return Scenario(
        name=name, u=u, grad_u=grad, hess_u=hess, laplacian_u=lap,
        critical_points=tuple(cps), observables=scen.observables,
    )


def _find_critical_points(scenario, seeds=None):
    if seeds is None:
        g = np.linspace(-2.0, 2.0, 9)
        seeds = [(a, b) for a in g for b in g]
    found = []
    for s in seeds:
        sol = optimize.root(
            lambda p: np.array(scenario.grad_u(p[0], p[1])),
            np.asarray(s, dtype=float),
            jac=lambda p: scenario.hess_u(p[0], p[1]),
            tol=1e-14,
        )
        if not sol.success:
            continue
        p = sol.x
        if np.linalg.norm(scenario.grad_point(p)) > GRAD_TOL:
            continue
        if any(np.linalg.norm(p - c.location) < 1e-6 for c in found):
            continue
        found.append(_classify_one(scenario, p))
    found.sort(key=lambda c: (c.value, c.location[0]))
    return found


def _classify_one(scenario, p) -> CriticalPoint:
    h = scenario.hess_point(p)
    eig = np.linalg.eigvalsh(h)
    if np.min(np.abs(eig)) <= HESS_MIN_EIG:
        raise InputError(f"degenerate critical point at {p}: eigenvalues {eig}")
    if np.all(eig > 0):
        kind = "minimum"
    elif np.all(eig < 0):
        kind = "maximum"
    else:
        kind = "saddle"
    return CriticalPoint(np.asarray(p, float), float(scenario.u_point(p)), kind)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def eval_gradient(scenario: Scenario, point) -> np.ndarray:
    return scenario.grad_point(point)


def classify_critical_points(scenario: Scenario):
    """Return the scenario's critical points, re-verified against the Hessian."""
    out = []
    for cp in scenario.critical_points:
        g = scenario.grad_point(cp.location)
        if np.linalg.norm(g) > GRAD_TOL:
            raise InputError(f"catalogued point {cp.location} is not critical: grad={g}")
        out.append(_classify_one(scenario, cp.location))
    return out


def gibbs_log_density(spec: GibbsSpec, point) -> float:
    """Unnormalized log density -U(x)/beta."""
    return -spec.scenario.u_point(point) / spec.beta


def gibbs_quadrature_mean(spec: GibbsSpec, f: Callable, box: float = 4.0,
                          n: int = 2048) -> float:
    """Mean of f under pi by trapezoid quadrature on [-box, box]^2.

    The integrand decays like exp(-U/beta) with all derivatives vanishing at
    the box edge, so the trapezoid rule is effectively spectrally accurate.
    """
    x = np.linspace(-box, box, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    w = np.exp(-spec.scenario.u(X, Y) / spec.beta)
    # trapezoid edge weights
    e = np.ones(n)
    e[0] = e[-1] = 0.5
    W = np.outer(e, e) * w
    return float(np.sum(f(X, Y) * W) / np.sum(W))
