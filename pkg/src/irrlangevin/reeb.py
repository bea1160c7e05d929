"""Reeb graph of connected level-set components and the projection Q.

The two shipped potentials are handled from their analytic structure (a
single edge for the bowl; two wells merging at the saddle for the double
well).  A grid flood-fill of sublevel sets is provided as an independent
cross-check of component labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .potentials import InputError, Scenario, classify_critical_points

__all__ = ["Vertex", "Edge", "GraphTopology", "GraphPoint", "build_graph",
           "project", "OutOfGraphError", "UnsupportedScenario",
           "sublevel_component_count", "floodfill_edge_id"]

DW_SADDLE_Z = 0.25


class OutOfGraphError(ValueError):
    """Point energy exceeds the truncation cap z_max."""


class UnsupportedScenario(NotImplementedError):
    """Graph machinery is wired for the shipped scenarios only."""


@dataclass(frozen=True)
class Vertex:
    id: str
    z: float
    kind: str            # "exterior_min" | "interior_saddle" | "truncation_cap"
    location: tuple = None


@dataclass(frozen=True)
class Edge:
    id: str
    z_lo: float
    z_hi: float
    lower: str           # vertex id at z_lo
    upper: str           # vertex id at z_hi


@dataclass(frozen=True)
class GraphTopology:
    scenario: Scenario
    vertices: tuple
    edges: tuple
    z_max: float

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def incident_edges(self, vid: str):
        return [e for e in self.edges if vid in (e.lower, e.upper)]


@dataclass(frozen=True)
class GraphPoint:
    z: float
    edge_id: str


def build_graph(scenario: Scenario, z_max: float = 4.0) -> GraphTopology:
    cps = classify_critical_points(scenario)
    if any(c.value >= z_max for c in cps):
        raise InputError(f"z_max = {z_max} must exceed all critical values")

    if scenario.name == "bowl":
        v0 = Vertex("min", 0.0, "exterior_min", (0.0, 0.0))
        cap = Vertex("cap", z_max, "truncation_cap")
        edges = (Edge("I1", 0.0, z_max, "min", "cap"),)
        return GraphTopology(scenario, (v0, cap), edges, z_max)

    if scenario.name == "double_well":
        vl = Vertex("min_left", 0.0, "exterior_min", (-1.0, 0.0))
        vr = Vertex("min_right", 0.0, "exterior_min", (1.0, 0.0))
        vs = Vertex("saddle", DW_SADDLE_Z, "interior_saddle", (0.0, 0.0))
        cap = Vertex("cap", z_max, "truncation_cap")
        edges = (
            Edge("I1", 0.0, DW_SADDLE_Z, "min_left", "saddle"),
            Edge("I2", 0.0, DW_SADDLE_Z, "min_right", "saddle"),
            Edge("I3", DW_SADDLE_Z, z_max, "saddle", "cap"),
        )
        return GraphTopology(scenario, (vl, vr, vs, cap), edges, z_max)

    raise UnsupportedScenario(
        f"no analytic level-set decomposition for scenario {scenario.name!r}"
    )


def project(topology: GraphTopology, point) -> GraphPoint:
    """Q(x) = (U(x), edge containing the level-set component of x)."""
    scen = topology.scenario
    z = scen.u_point(point)
    if z > topology.z_max:
        raise OutOfGraphError(f"U(point) = {z:g} exceeds z_max = {topology.z_max:g}")

    if scen.name == "bowl":
        return GraphPoint(z, "I1")
    if scen.name == "double_well":
        if z >= DW_SADDLE_Z:
            return GraphPoint(z, "I3")
        # separatrix tie-break: x <= 0 goes to the left well edge
        return GraphPoint(z, "I1" if point[0] <= 0.0 else "I2")
    raise UnsupportedScenario(scen.name)


# ---------------------------------------------------------------------------
# flood-fill cross-checks
# ---------------------------------------------------------------------------

def _sublevel_labels(scenario, z, n=512, box=2.5):
    x = np.linspace(-box, box, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    mask = scenario.u(X, Y) < z
    labels, count = ndimage.label(mask)
    return x, labels, count


def sublevel_component_count(scenario, z, n=512, box=2.5) -> int:
    return _sublevel_labels(scenario, z, n, box)[2]


def floodfill_edge_id(topology, point, n=512, box=2.5) -> str:
    """Edge assignment from grid component labels; oracle for ``project``.

    Labels the sublevel set {U < z + eps} and matches the component of the
    point against the components of the exterior minima.
    """
    scen = topology.scenario
    z = scen.u_point(point)
    # the point snaps to a grid node, which can raise U by about h |grad U|
    h = 2.0 * box / (n - 1)
    gnorm = float(np.hypot(*scen.grad_point(point)))
    eps = max(1e-6, 2.0 * h * gnorm + 4.0 * h * h)
    x, labels, _ = _sublevel_labels(scen, z + eps, n, box)

    def label_at(p):
        i = int(np.clip(np.searchsorted(x, p[0]), 0, len(x) - 1))
        j = int(np.clip(np.searchsorted(x, p[1]), 0, len(x) - 1))
        return labels[i, j]

    lp = label_at(np.asarray(point, dtype=float))
    if lp == 0:
        raise InputError(f"point {point} not resolved on the flood-fill grid")

    mins = [v for v in topology.vertices if v.kind == "exterior_min"]
    hits = [v for v in mins if label_at(np.asarray(v.location)) == lp]
    if len(hits) == 1:
        # below every merge: the unique edge rooted at that minimum
        for e in topology.edges:
            if e.lower == hits[0].id and e.z_lo <= z <= e.z_hi:
                return e.id
    # component contains several minima: pick the edge spanning this z
    for e in topology.edges:
        if e.z_lo < z <= e.z_hi and topology.vertex(e.lower).kind != "exterior_min":
            return e.id
    raise InputError(f"no edge found for point {point} at z = {z:g}")
