"""Level-set averages per graph edge: T(z), A_hat(z), M(z), f_hat(z), b_jk.

Contour integrals use smooth closed parametrizations of the level curves
(exact circle for the bowl; trigonometric substitution for the double-well
loops and a star-shaped radial solve for its outer curve), so the periodic
trapezoid rule converges spectrally.  A marching-squares polyline route is
kept as an independent geometric cross-check and as the fallback for custom
potentials.  Area integrals are reduced to 1-d adaptive quadrature with a
Gauss rule across the section, independent of the contour route, which lets
the Gauss-theorem identity A_hat = 2 beta M act as a self-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .potentials import InputError, Scenario
from .reeb import DW_SADDLE_Z, GraphTopology, UnsupportedScenario

__all__ = ["EdgeCoefficients", "contour_nodes", "contour_quantities",
           "interior_area_laplacian", "gluing_weights",
           "tabulate_edge_coefficients", "marching_squares_loops",
           "GeometryError"]

VERTEX_EXCLUSION = 1e-4
_GAUSS_N = 24


class GeometryError(RuntimeError):
    """Contour extraction or region masking failed."""


# ---------------------------------------------------------------------------
# contour parametrizations
# ---------------------------------------------------------------------------

def _bowl_loop(z, n):
    r = np.sqrt(2.0 * z)
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    xy = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    w = np.full(n, r * 2.0 * np.pi / n)
    return xy, w


def _dw_inner_loop(z, side, n):
    # x^2 - 1 = kappa cos(theta), y = sqrt(2 z) sin(theta); smooth for z < 1/4
    kappa = 2.0 * np.sqrt(z)
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    g = np.sqrt(1.0 + kappa * np.cos(theta))
    x = side * g
    y = np.sqrt(2.0 * z) * np.sin(theta)
    dx = side * (-kappa * np.sin(theta)) / (2.0 * g)
    dy = np.sqrt(2.0 * z) * np.cos(theta)
    speed = np.hypot(dx, dy)
    xy = np.stack([x, y], axis=1)
    return xy, speed * (2.0 * np.pi / n)


def _dw_outer_radius(scenario, z, phi, tol=1e-13):
    """Radial coordinate of the outer level curve, solved per angle.

    For z > 1/4 the curve is star-shaped about the origin, so U(r, phi) = z
    has a unique root in r; safeguarded Newton from the outside.
    """
    c, s = np.cos(phi), np.sin(phi)
    # outermost point is on the x-axis for small z but at x = sqrt(2) once
    # the curve bulges; take the larger of the two radii as the safe start
    r_hi = np.sqrt(max(1.0 + 2.0 * np.sqrt(z), 1.5 + 2.0 * z)) + 1e-9
    r = np.full_like(phi, r_hi)
    for _ in range(100):
        x, y = r * c, r * s
        val = scenario.u(x, y) - z
        gx, gy = scenario.grad_u(x, y)
        ur = gx * c + gy * s
        step = val / np.where(np.abs(ur) > 1e-300, ur, 1e-300)
        step = np.clip(step, -0.2 * r_hi, 0.2 * r_hi)
        r_new = np.clip(r - step, 1e-12, r_hi)
        if np.max(np.abs(r_new - r)) < tol:
            r = r_new
            break
        r = r_new
    x, y = r * c, r * s
    if np.max(np.abs(scenario.u(x, y) - z)) > 1e-9 * max(z, 1.0):
        raise GeometryError(f"outer contour solve did not converge at z = {z:g}")
    return r


def _dw_outer_loop(scenario, z, n):
    phi = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    r = _dw_outer_radius(scenario, z, phi)
    c, s = np.cos(phi), np.sin(phi)
    x, y = r * c, r * s
    gx, gy = scenario.grad_u(x, y)
    ur = gx * c + gy * s
    uphi = -gx * r * s + gy * r * c
    rprime = -uphi / ur
    speed = np.hypot(r, rprime)
    xy = np.stack([x, y], axis=1)
    return xy, speed * (2.0 * np.pi / n)


def contour_nodes(topology: GraphTopology, edge_id: str, z: float, n: int = 4096):
    """Quadrature nodes and arc-length weights for the closed curve d_i(z)."""
    edge = topology.edge(edge_id)
    if not (edge.z_lo < z < edge.z_hi):
        raise InputError(f"z = {z:g} outside the open range of edge {edge_id}")
    if min(z - edge.z_lo, edge.z_hi - z) < VERTEX_EXCLUSION:
        raise InputError(
            f"z = {z:g} within {VERTEX_EXCLUSION:g} of a vertex of edge {edge_id}; "
            "|grad U| is near-singular on the separatrix"
        )
    scen = topology.scenario
    if scen.name == "bowl":
        return _bowl_loop(z, n)
    if scen.name == "double_well":
        if edge_id == "I1":
            return _dw_inner_loop(z, -1.0, n)
        if edge_id == "I2":
            return _dw_inner_loop(z, +1.0, n)
        return _dw_outer_loop(scen, z, n)
    raise UnsupportedScenario(scen.name)


def contour_quantities(topology, edge_id, z, observable, beta, n=4096):
    """(T, A_hat, f_hat) on one level-set component, m identically 1."""
    xy, w = contour_nodes(topology, edge_id, z, n)
    gx, gy = topology.scenario.grad_u(xy[:, 0], xy[:, 1])
    gnorm = np.hypot(gx, gy)
    if np.any(gnorm <= 0):
        raise GeometryError(f"vanishing gradient on contour at z = {z:g}")
    # m == 1 requires |C| = |grad U|, exact for C = S grad U with |s| = 1
    cnorm = np.hypot(gy, -gx)
    if not np.allclose(cnorm, gnorm, rtol=1e-12, atol=0.0):
        raise GeometryError("invariant density is not Lebesgue: |C| != |grad U|")
    T = float(np.sum(w / gnorm))
    A_hat = float(2.0 * beta * np.sum(gnorm * w))
    fv = np.asarray(observable(xy[:, 0], xy[:, 1]), dtype=float)
    f_hat = float(np.sum(fv * w / gnorm) / T)
    return T, A_hat, f_hat


# ---------------------------------------------------------------------------
# marching-squares cross-check / generic fallback
# ---------------------------------------------------------------------------

def marching_squares_loops(scenario: Scenario, z: float, grid_n: int = 1024,
                           box: float = 2.5):
    """Polyline loops of {U = z} from marching squares on a grid.

    Returns a list of (midpoints, segment_lengths, centroid) per closed loop.
    """
    from skimage import measure

    ax = np.linspace(-box, box, grid_n)
    h = ax[1] - ax[0]
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    grid = scenario.u(X, Y)
    loops = []
    for poly in measure.find_contours(grid, z):
        if len(poly) < 3:
            continue
        closed = np.allclose(poly[0], poly[-1])
        if not closed:
            raise GeometryError(
                f"open contour at z = {z:g}: level curve leaves the box {box:g}"
            )
        pts = poly * h - box  # index -> xy (ij indexing)
        seg = np.diff(pts, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        mids = 0.5 * (pts[:-1] + pts[1:])
        loops.append((mids, lengths, mids.mean(axis=0)))
    if not loops:
        raise GeometryError(f"no contour found at z = {z:g}")
    return loops


def ms_contour_quantities(scenario, z, observable, beta, grid_n=1024, box=2.5,
                          select=None):
    """Contour quantities from marching-squares polylines (cross-check route)."""
    loops = marching_squares_loops(scenario, z, grid_n, box)
    if select is not None:
        loops = [lp for lp in loops if select(lp[2])]
    if len(loops) != 1:
        raise GeometryError(f"expected one loop after selection, got {len(loops)}")
    mids, lengths, _ = loops[0]
    gx, gy = scenario.grad_u(mids[:, 0], mids[:, 1])
    gnorm = np.hypot(gx, gy)
    T = float(np.sum(lengths / gnorm))
    A_hat = float(2.0 * beta * np.sum(gnorm * lengths))
    fv = np.asarray(observable(mids[:, 0], mids[:, 1]), dtype=float)
    f_hat = float(np.sum(fv * lengths / gnorm) / T)
    return T, A_hat, f_hat


# ---------------------------------------------------------------------------
# interior area integrals
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GAUSS_N)


def _column_integral(scenario, x, half_width):
    """integral of Laplacian(U) over the vertical section [-Y, Y] at x."""
    y = np.multiply.outer(half_width, _GL_NODES)
    vals = scenario.laplacian_u(np.expand_dims(x, -1), y)
    return half_width * np.sum(vals * _GL_WEIGHTS, axis=-1)


def interior_area_laplacian(topology, edge_id, z) -> float:
    """M(z): area integral of Laplacian(U) over the region inside d_i(z)."""
    edge = topology.edge(edge_id)
    if not (edge.z_lo < z < edge.z_hi):
        raise InputError(f"z = {z:g} outside the open range of edge {edge_id}")
    scen = topology.scenario

    if scen.name == "bowl":
        r = np.sqrt(2.0 * z)

        def f(t):
            x = r * np.sin(t)
            hw = r * np.cos(t)
            return _column_integral(scen, x, hw) * r * np.cos(t)

        val, _ = integrate.quad(f, -np.pi / 2, np.pi / 2, epsabs=1e-12, epsrel=1e-11)
        return float(val)

    if scen.name == "double_well":
        kappa = 2.0 * np.sqrt(z)
        if edge_id in ("I1", "I2"):
            side = -1.0 if edge_id == "I1" else 1.0

            def f(psi):
                g = np.sqrt(1.0 + kappa * np.sin(psi))
                x = side * g
                hw = np.sqrt(2.0 * z) * np.cos(psi)
                dxdpsi = kappa * np.cos(psi) / (2.0 * g)
                return _column_integral(scen, x, hw) * dxdpsi

            val, _ = integrate.quad(f, -np.pi / 2, np.pi / 2,
                                    epsabs=1e-12, epsrel=1e-11, limit=200)
            return float(val)

        a = np.sqrt(1.0 + kappa)

        def f(t):
            x = a * np.sin(t)
            inner = 2.0 * z - 0.5 * (x**2 - 1.0) ** 2
            hw = np.sqrt(np.maximum(inner, 0.0))
            return _column_integral(scen, x, hw) * a * np.cos(t)

        val, _ = integrate.quad(f, -np.pi / 2, np.pi / 2,
                                epsabs=1e-12, epsrel=1e-11, limit=400)
        return float(val)

    raise UnsupportedScenario(scen.name)


def masked_grid_area_laplacian(scenario, region_mask_fn, grid_n=1024, box=2.5):
    """Midpoint-rule oracle for the area integral, Richardson-checked in tests."""
    ax = (np.arange(grid_n) + 0.5) * (2 * box / grid_n) - box
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    mask = region_mask_fn(X, Y)
    if not np.any(mask):
        raise GeometryError("empty region mask")
    h = 2 * box / grid_n
    return float(np.sum(scenario.laplacian_u(X, Y)[mask]) * h * h)


# ---------------------------------------------------------------------------
# gluing weights and tabulation
# ---------------------------------------------------------------------------

def gluing_weights(topology, vertex_id, beta, deltas=(1e-4, 5e-5), n=16384,
                   flag_tol=0.02):
    """b_jk = one-sided limit of 2 beta * contour integral of |grad U|.

    Evaluated just off the vertex at two offsets and linearly extrapolated;
    warns when the two evaluations disagree by more than ``flag_tol``.
    """
    v = topology.vertex(vertex_id)
    if v.kind != "interior_saddle":
        if v.kind in ("exterior_min", "truncation_cap"):
            return {}
        raise InputError(f"vertex {vertex_id} is not interior")
    out = {}
    for e in topology.incident_edges(vertex_id):
        sign = -1.0 if e.upper == vertex_id else 1.0  # approach from inside
        vals = []
        for d in deltas:
            zq = v.z + sign * d
            xy, w = _raw_contour_nodes(topology, e.id, zq, n)
            gx, gy = topology.scenario.grad_u(xy[:, 0], xy[:, 1])
            vals.append(2.0 * beta * float(np.sum(np.hypot(gx, gy) * w)))
        v1, v2 = vals
        if abs(v1 - v2) > flag_tol * abs(v2):
            warnings.warn(
                f"gluing weight for edge {e.id} at {vertex_id} varies by "
                f"{abs(v1 - v2) / abs(v2):.2%} between offsets {deltas}",
                stacklevel=2,
            )
        d1, d2 = deltas
        out[e.id] = v2 + (v1 - v2) * (0.0 - d2) / (d1 - d2)
    return out


def _raw_contour_nodes(topology, edge_id, z, n):
    # same dispatch as contour_nodes but without the vertex-exclusion guard,
    # needed for the one-sided limits defining the gluing weights
    scen = topology.scenario
    if scen.name == "bowl":
        return _bowl_loop(z, n)
    if scen.name == "double_well":
        if edge_id == "I1":
            return _dw_inner_loop(z, -1.0, n)
        if edge_id == "I2":
            return _dw_inner_loop(z, +1.0, n)
        return _dw_outer_loop(scen, z, n)
    raise UnsupportedScenario(scen.name)


@dataclass(frozen=True)
class EdgeCoefficients:
    edge_id: str
    z_grid: np.ndarray
    T: np.ndarray
    A_hat: np.ndarray
    M: np.ndarray
    f_hat: np.ndarray
    drift: np.ndarray
    diffusion_var: np.ndarray       # SDE variance coefficient A_hat/T
    m_choice: str = "lebesgue_constant"
    _interp: dict = field(default_factory=dict, compare=False, repr=False)

    def _fn(self, name, values):
        if name not in self._interp:
            self._interp[name] = PchipInterpolator(self.z_grid, values,
                                                   extrapolate=True)
        return self._interp[name]

    def drift_fn(self, z):
        return self._fn("drift", self.drift)(z)

    def diffusion_fn(self, z):
        return self._fn("diffusion_var", self.diffusion_var)(z)

    def f_hat_fn(self, z):
        return self._fn("f_hat", self.f_hat)(z)

    def T_fn(self, z):
        return self._fn("T", self.T)(z)

    def M_fn(self, z):
        return self._fn("M", self.M)(z)


def _chebyshev_grid(lo, hi, n):
    k = np.arange(n)
    x = np.cos(np.pi * (2 * k + 1) / (2 * n))  # (-1, 1), endpoint-clustered
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * x)


def tabulate_edge_coefficients(topology, observable, beta, n_grid=128,
                               contour_n=4096):
    """Per-edge tables of T, A_hat, M, f_hat and the 1-d drift/diffusion."""
    if n_grid < 64:
        raise InputError("n_grid must be >= 64")
    out = []
    for edge in topology.edges:
        length = edge.z_hi - edge.z_lo
        off = 1e-3 * length
        zg = _chebyshev_grid(edge.z_lo + off, edge.z_hi - off, n_grid)
        T = np.empty(n_grid)
        A = np.empty(n_grid)
        fh = np.empty(n_grid)
        M = np.empty(n_grid)
        for k, z in enumerate(zg):
            T[k], A[k], fh[k] = contour_quantities(
                topology, edge.id, z, observable, beta, contour_n)
            M[k] = interior_area_laplacian(topology, edge.id, z)
        for name, arr in (("T", T), ("A_hat", A), ("M", M)):
            if np.any(arr <= 0):
                bad = zg[int(np.argmin(arr))]
                raise GeometryError(
                    f"{name} not positive on edge {edge.id} at z = {bad:g}")
        Mp = np.gradient(M, zg)
        out.append(EdgeCoefficients(
            edge_id=edge.id, z_grid=zg, T=T, A_hat=A, M=M, f_hat=fh,
            drift=(-M + beta * Mp) / T, diffusion_var=A / T,
        ))
    return out
