"""The limiting slow diffusion on the Reeb graph.

Two realizations: a Monte Carlo simulation with offset-restart vertex gluing
(branch probabilities proportional to the gluing weights), and a deterministic
per-edge finite-difference solve of the graph Poisson problem whose flux
balance at interior vertices yields the large-irreversibility limit of the
asymptotic variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import warnings

import numpy as np
from numba import njit
from scipy import integrate, sparse
from scipy.sparse.linalg import spsolve

from . import rng as _rng
from .edges import EdgeCoefficients, _raw_contour_nodes, gluing_weights
from .potentials import InputError
from .reeb import GraphPoint, GraphTopology

__all__ = ["GraphPath", "GraphMeasure", "build_graph_measure", "graph_mean",
           "simulate_graph", "graph_terminal_z", "solve_graph_poisson",
           "limiting_variance", "GraphPoissonSolution"]

_NOISE_CHUNK = 1_000_000


# ---------------------------------------------------------------------------
# projected Gibbs measure on the graph
# ---------------------------------------------------------------------------

def _T_direct(topology, edge_id, z, beta, observable=None, n=2048):
    xy, w = _raw_contour_nodes(topology, edge_id, z, n)
    gx, gy = topology.scenario.grad_u(xy[:, 0], xy[:, 1])
    gnorm = np.hypot(gx, gy)
    T = float(np.sum(w / gnorm))
    if observable is None:
        return T, None
    fv = np.asarray(observable(xy[:, 0], xy[:, 1]), dtype=float)
    return T, float(np.sum(fv * w / gnorm) / T)


@dataclass(frozen=True)
class GraphMeasure:
    topology: GraphTopology
    beta: float
    edge_mass: dict
    normalization: float

    def density(self, edge_id, z):
        """Normalized density of z on the given edge."""
        T, _ = _T_direct(self.topology, edge_id, z, self.beta)
        return np.exp(-z / self.beta) * T / self.normalization


def build_graph_measure(topology, beta) -> GraphMeasure:
    masses = {}
    for e in topology.edges:
        def integrand(z, eid=e.id):
            T, _ = _T_direct(topology, eid, z, beta)
            return np.exp(-z / beta) * T

        with warnings.catch_warnings():
            # integrands span ~e^{-z_max/beta} in magnitude; quad reports
            # roundoff saturation long after the digits we need are converged
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(integrand, e.z_lo, e.z_hi,
                                    epsabs=1e-14, epsrel=1e-10, limit=200)
        masses[e.id] = val
    return GraphMeasure(topology, beta, masses, sum(masses.values()))


def graph_mean(topology, beta, observable, measure: GraphMeasure = None) -> float:
    """Mean of the level-set average f_hat under the projected Gibbs measure."""
    if measure is None:
        measure = build_graph_measure(topology, beta)
    total = 0.0
    for e in topology.edges:
        def integrand(z, eid=e.id):
            T, fh = _T_direct(topology, eid, z, beta, observable)
            return np.exp(-z / beta) * T * fh

        with warnings.catch_warnings():
            # integrands span ~e^{-z_max/beta} in magnitude; quad reports
            # roundoff saturation long after the digits we need are converged
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(integrand, e.z_lo, e.z_hi,
                                    epsabs=1e-14, epsrel=1e-10, limit=200)
        total += val
    return total / measure.normalization


# ---------------------------------------------------------------------------
# Monte Carlo on the graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphPath:
    times: np.ndarray
    z: np.ndarray
    edge_index: np.ndarray
    edge_ids: tuple
    seed: int
    vertex_events: list      # (time, vertex_id, chosen_edge_id)
    n_events_total: int

    def points(self):
        return [GraphPoint(float(z), self.edge_ids[e])
                for z, e in zip(self.z, self.edge_index)]


@njit(cache=True)
def _graph_chunk(state, k0, n, dt, rho, normals, uniforms, zlo, zhi,
                 drift_tab, diff_tab, edge_lower, edge_upper, vkind, vz,
                 bptr, bedge, bside, bcum, thin, out_z, out_e, j0,
                 ev_t, ev_v, ev_e, ev_n, max_ev):
    e = int(state[0])
    z = state[1]
    j = j0
    nev = ev_n
    ntab = drift_tab.shape[1]
    for i in range(n):
        L = zlo[e]
        H = zhi[e]
        u = (z - L) / (H - L) * (ntab - 1)
        if u < 0.0:
            u = 0.0
        if u > ntab - 1.0:
            u = ntab - 1.0
        i0 = int(u)
        if i0 >= ntab - 1:
            i0 = ntab - 2
        fr = u - i0
        a = drift_tab[e, i0] * (1.0 - fr) + drift_tab[e, i0 + 1] * fr
        b = diff_tab[e, i0] * (1.0 - fr) + diff_tab[e, i0 + 1] * fr
        if b < 0.0:
            b = 0.0
        z = z + a * dt + np.sqrt(b * dt) * normals[i]
        v = -1
        if z <= L + rho:
            v = edge_lower[e]
        elif z >= H - rho:
            v = edge_upper[e]
        if v >= 0:
            if vkind[v] == 0:  # reflecting (exterior minimum or cap)
                if z <= L + rho:
                    z = L + rho
                else:
                    z = H - rho
            else:              # interior saddle: branch with b-proportions
                r = uniforms[i]
                idx = bptr[v]
                while r > bcum[idx]:
                    idx += 1
                enew = bedge[idx]
                z = vz[v] + rho * bside[idx]
                if nev < max_ev:
                    ev_t[nev] = (k0 + i + 1) * dt
                    ev_v[nev] = v
                    ev_e[nev] = enew
                nev += 1
                e = enew
        k = k0 + i + 1
        if k % thin == 0:
            out_z[j] = z
            out_e[j] = e
            j += 1
    state[0] = float(e)
    state[1] = z
    return j, nev


class _GraphTables:
    """Flat arrays for the numba kernel, built from tabulated coefficients."""

    def __init__(self, coeffs, topology, beta, n_tab=1024):
        self.edge_ids = tuple(c.edge_id for c in coeffs)
        E = len(coeffs)
        self.zlo = np.empty(E)
        self.zhi = np.empty(E)
        self.drift_tab = np.empty((E, n_tab))
        self.diff_tab = np.empty((E, n_tab))
        vids = [v.id for v in topology.vertices]
        self.vertex_ids = tuple(vids)
        vidx = {vid: k for k, vid in enumerate(vids)}
        self.edge_lower = np.empty(E, dtype=np.int64)
        self.edge_upper = np.empty(E, dtype=np.int64)
        for k, c in enumerate(coeffs):
            edge = topology.edge(c.edge_id)
            self.zlo[k] = edge.z_lo
            self.zhi[k] = edge.z_hi
            zu = np.linspace(edge.z_lo, edge.z_hi, n_tab)
            self.drift_tab[k] = c.drift_fn(zu)
            self.diff_tab[k] = np.maximum(c.diffusion_fn(zu), 0.0)
            self.edge_lower[k] = vidx[edge.lower]
            self.edge_upper[k] = vidx[edge.upper]
        eidx = {eid: k for k, eid in enumerate(self.edge_ids)}
        V = len(vids)
        self.vkind = np.zeros(V, dtype=np.int64)
        self.vz = np.array([v.z for v in topology.vertices])
        ptr, bedge, bside, bcum = np.zeros(V, dtype=np.int64), [], [], []
        for k, v in enumerate(topology.vertices):
            ptr[k] = len(bedge)
            if v.kind != "interior_saddle":
                continue
            self.vkind[k] = 1
            bw = gluing_weights(topology, v.id, beta)
            tot = sum(bw.values())
            acc = 0.0
            for eid, b in sorted(bw.items()):
                acc += b / tot
                edge = topology.edge(eid)
                bedge.append(eidx[eid])
                bside.append(1.0 if edge.lower == v.id else -1.0)
                bcum.append(acc)
            bcum[-1] = 1.0 + 1e-12
        self.bptr = ptr
        self.bedge = np.array(bedge or [0], dtype=np.int64)
        self.bside = np.array(bside or [0.0])
        self.bcum = np.array(bcum or [2.0])
        self.branch_weights = {
            v.id: gluing_weights(topology, v.id, beta)
            for v in topology.vertices if v.kind == "interior_saddle"
        }


def simulate_graph(coeffs, topology, y0: GraphPoint, dt, t_final, seed,
                   vertex_offset=1e-3, thin=1, beta=None, max_events=1_000_000,
                   _tables=None):
    """Euler-Maruyama for the slow coordinate on the graph with vertex gluing."""
    if beta is None:
        raise InputError("beta is required to derive gluing weights")
    tb = _tables if _tables is not None else _GraphTables(coeffs, topology, beta)
    eidx = {eid: k for k, eid in enumerate(tb.edge_ids)}
    if y0.edge_id not in eidx:
        raise InputError(f"start edge {y0.edge_id!r} has no tabulated coefficients")
    n_steps = int(np.floor(t_final / dt + 1e-9))
    n_kept = n_steps // thin + 1
    out_z = np.empty(n_kept)
    out_e = np.empty(n_kept, dtype=np.int64)
    e0 = eidx[y0.edge_id]
    z0 = float(np.clip(y0.z, tb.zlo[e0] + vertex_offset, tb.zhi[e0] - vertex_offset))
    out_z[0], out_e[0] = z0, e0

    ev_t = np.empty(max_events)
    ev_v = np.empty(max_events, dtype=np.int64)
    ev_e = np.empty(max_events, dtype=np.int64)
    gen = _rng.generator(seed)
    state = np.array([float(e0), z0])
    j, nev, k0 = 1, 0, 0
    while k0 < n_steps:
        n = min(_NOISE_CHUNK, n_steps - k0)
        normals = gen.standard_normal(n)
        uniforms = gen.random(n)
        j, nev = _graph_chunk(
            state, k0, n, dt, vertex_offset, normals, uniforms,
            tb.zlo, tb.zhi, tb.drift_tab, tb.diff_tab,
            tb.edge_lower, tb.edge_upper, tb.vkind, tb.vz,
            tb.bptr, tb.bedge, tb.bside, tb.bcum,
            thin, out_z, out_e, j, ev_t, ev_v, ev_e, nev, max_events)
        k0 += n

    nrec = min(nev, max_events)
    events = [(float(ev_t[i]), tb.vertex_ids[ev_v[i]], tb.edge_ids[ev_e[i]])
              for i in range(nrec)]
    times = np.arange(n_kept) * (thin * dt)
    return GraphPath(times=times, z=out_z, edge_index=out_e,
                     edge_ids=tb.edge_ids, seed=seed, vertex_events=events,
                     n_events_total=nev)


def graph_terminal_z(coeffs, topology, y0, dt, t_final, master_seed, n_replicas,
                     vertex_offset=1e-3, beta=None):
    """Terminal z of independent graph replicas (derived seeds)."""
    tb = _GraphTables(coeffs, topology, beta)
    n_steps = max(int(np.floor(t_final / dt + 1e-9)), 1)
    out = np.empty(n_replicas)
    for r in range(n_replicas):
        path = simulate_graph(
            coeffs, topology, y0, dt, t_final,
            _rng.derive_seed(master_seed, r), vertex_offset,
            thin=n_steps, beta=beta, max_events=1, _tables=tb)
        out[r] = path.z[-1]
    return out


# ---------------------------------------------------------------------------
# deterministic graph Poisson solve and the limiting variance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphPoissonSolution:
    edge_ids: tuple
    grids: dict              # edge_id -> z nodes (incl. endpoints)
    phi: dict                # edge_id -> values on nodes
    vertex_values: dict
    f_bar: float
    gluing_residual: float

    def phi_fn(self, edge_id, z):
        return np.interp(z, self.grids[edge_id], self.phi[edge_id])


def solve_graph_poisson(coeffs, topology, beta, observable=None, f_bar=None,
                        n_solve=2000, measure=None) -> GraphPoissonSolution:
    """Solve -L^Y Phi = f_hat - f_bar with flux gluing at interior vertices.

    Conservative finite volumes per edge (the generator is a weighted
    Sturm-Liouville operator), continuity at vertices through shared vertex
    unknowns, flux balance at interior saddles from the assembly itself,
    zero-flux ends at exterior minima and the truncation cap; the free
    constant is fixed by a bordered row enforcing a vanishing mu-average.
    """
    cmap = {c.edge_id: c for c in coeffs}
    if f_bar is None:
        if observable is None:
            raise InputError("need either f_bar or an observable to center")
        f_bar = graph_mean(topology, beta, observable, measure)

    vidx = {}
    offset = 0
    for v in topology.vertices:
        vidx[v.id] = offset
        offset += 1
    edge_node_start = {}
    for e in topology.edges:
        edge_node_start[e.id] = offset
        offset += n_solve - 2
    n_unknowns = offset

    bweights = {}
    for v in topology.vertices:
        if v.kind == "interior_saddle":
            bweights[v.id] = gluing_weights(topology, v.id, beta)

    rows_l, cols_l, vals_l = [], [], []

    def add(r, c, v):
        rows_l.append(r)
        cols_l.append(c)
        vals_l.append(v)

    rhs = np.zeros(n_unknowns + 1)
    grids = {}
    mu_w = np.zeros(n_unknowns)

    def col(eid, i, grid_len):
        e = topology.edge(eid)
        if i == 0:
            return vidx[e.lower]
        if i == grid_len - 1:
            return vidx[e.upper]
        return edge_node_start[eid] + i - 1

    # conservative finite volumes: the edge generator is exactly
    #   L g = (T e^{-z/beta})^{-1} d/dz( beta M e^{-z/beta} g' ),
    # so -L Phi = f_c becomes a resistor network with face conductances
    # kappa = beta M e^{-z/beta}; summing the assembled equations telescopes,
    # which makes the singular system exactly compatible after centering and
    # yields the saddle flux condition with weights proportional to b_jk
    # (b = A_hat limit = 2 beta M there).
    for e in topology.edges:
        c = cmap[e.id]
        zg = np.linspace(e.z_lo, e.z_hi, n_solve)
        grids[e.id] = zg
        h = zg[1] - zg[0]
        zm = 0.5 * (zg[:-1] + zg[1:])
        kappa = beta * np.maximum(np.asarray(c.M_fn(zm), dtype=float), 0.0) \
            * np.exp(-zm / beta)
        g = kappa / h
        fc = np.asarray(c.f_hat_fn(zg), dtype=float) - f_bar
        w_node = np.maximum(np.asarray(c.T_fn(zg), dtype=float), 1e-300) \
            * np.exp(-zg / beta)
        cell = np.full(n_solve, h)
        cell[0] = cell[-1] = 0.5 * h
        idxs = [col(e.id, i, n_solve) for i in range(n_solve)]
        for i in range(n_solve - 1):
            p, q = idxs[i], idxs[i + 1]
            add(p, p, g[i])
            add(p, q, -g[i])
            add(q, q, g[i])
            add(q, p, -g[i])
        for i in range(n_solve):
            rhs[idxs[i]] += fc[i] * w_node[i] * cell[i]
            mu_w[idxs[i]] += w_node[i] * cell[i]

    mu_w /= mu_w.sum()
    # project the load onto the compatible subspace (removes the residual
    # centering error of f_bar so the Lagrange multiplier stays at rounding)
    rhs[:n_unknowns] -= mu_w * rhs[:n_unknowns].sum()

    K = sparse.coo_matrix((vals_l, (rows_l, cols_l)),
                          shape=(n_unknowns + 1, n_unknowns + 1)).tolil()
    K[:n_unknowns, n_unknowns] = mu_w.reshape(-1, 1)
    K[n_unknowns, :n_unknowns] = mu_w
    sol = spsolve(sparse.csc_matrix(K), rhs)
    phi_all = sol[:n_unknowns]

    phi = {}
    vvals = {v.id: float(phi_all[vidx[v.id]]) for v in topology.vertices}
    for e in topology.edges:
        vals = np.empty(n_solve)
        vals[0] = vvals[e.lower]
        vals[-1] = vvals[e.upper]
        st = edge_node_start[e.id]
        vals[1:-1] = phi_all[st:st + n_solve - 2]
        phi[e.id] = vals

    residual = _gluing_residual(topology, bweights, grids, phi)
    return GraphPoissonSolution(
        edge_ids=tuple(e.id for e in topology.edges), grids=grids, phi=phi,
        vertex_values=vvals, f_bar=f_bar, gluing_residual=residual)


def _gluing_residual(topology, bweights, grids, phi):
    worst = 0.0
    for v in topology.vertices:
        if v.kind != "interior_saddle":
            continue
        flux, scale = 0.0, 0.0
        for e in topology.incident_edges(v.id):
            zg = grids[e.id]
            h = zg[1] - zg[0]
            p = phi[e.id]
            if e.upper == v.id:
                d = (3 * p[-1] - 4 * p[-2] + p[-3]) / (2 * h)
                flux += bweights[v.id][e.id] * d
            else:
                d = (-3 * p[0] + 4 * p[1] - p[2]) / (2 * h)
                flux -= bweights[v.id][e.id] * d
            scale = max(scale, abs(bweights[v.id][e.id] * d))
        if scale > 0:
            worst = max(worst, abs(flux) / scale)
    return worst


def limiting_variance(topology, observable, beta, coeffs=None, n_grid=128,
                      n_solve=2000):
    """sigma^2_f(0) = 2 * integral over the graph of Phi (f_hat - f_bar) dmu."""
    from .edges import tabulate_edge_coefficients
    from .variance import VarianceEstimate

    if coeffs is None:
        coeffs = tabulate_edge_coefficients(topology, observable, beta, n_grid)
    measure = build_graph_measure(topology, beta)
    f_bar = graph_mean(topology, beta, observable, measure)
    sol = solve_graph_poisson(coeffs, topology, beta, f_bar=f_bar,
                              n_solve=n_solve, measure=measure)

    total = 0.0
    for e in topology.edges:
        def integrand(z, eid=e.id):
            T, fh = _T_direct(topology, eid, z, beta, observable)
            return sol.phi_fn(eid, z) * (fh - f_bar) * np.exp(-z / beta) * T

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(integrand, e.z_lo, e.z_hi,
                                    epsabs=1e-14, epsrel=1e-9, limit=200)
        total += val
    sigma2 = 2.0 * total / measure.normalization
    return VarianceEstimate(
        value=float(sigma2), kind="asymptotic_sigma2", t_horizon=np.inf,
        n_batches=0, ci_halfwidth=0.0, method="graph_limit", delta=np.inf)
