import numpy as np
import pytest
from scipy import stats

from irrlangevin import rng as _rng
from irrlangevin.edges import tabulate_edge_coefficients
from irrlangevin.graphdiff import (
    build_graph_measure,
    graph_mean,
    graph_terminal_z,
    limiting_variance,
    simulate_graph,
    solve_graph_poisson,
)
from irrlangevin.potentials import BOWL, DOUBLE_WELL, GibbsSpec, gibbs_quadrature_mean
from irrlangevin.reeb import GraphPoint, build_graph
from irrlangevin.sde import Trajectory
from irrlangevin.variance import batch_means_variance

BETA = 0.1


@pytest.fixture(scope="module")
def bowl():
    top = build_graph(BOWL)
    f = BOWL.observables["f2"]
    return top, f, tabulate_edge_coefficients(top, f, BETA, n_grid=96)


@pytest.fixture(scope="module")
def dw():
    top = build_graph(DOUBLE_WELL)
    f = DOUBLE_WELL.observables["f2"]
    return top, f, tabulate_edge_coefficients(top, f, BETA, n_grid=96)


def test_measure_normalization_bowl(bowl):
    top, _, _ = bowl
    mu = build_graph_measure(top, BETA)
    # T = 2 pi on the single edge, so the mass is 2 pi beta (1 - e^{-zmax/beta})
    assert mu.normalization == pytest.approx(2 * np.pi * BETA, rel=1e-9)
    assert sum(mu.edge_mass.values()) == pytest.approx(mu.normalization)
    assert mu.density("I1", 0.3) == pytest.approx(np.exp(-3.0) / BETA, rel=1e-9)


def test_measure_well_symmetry(dw):
    top, _, _ = dw
    mu = build_graph_measure(top, BETA)
    assert mu.edge_mass["I1"] == pytest.approx(mu.edge_mass["I2"], rel=1e-10)


def test_graph_mean_matches_2d_quadrature(dw):
    # the projected measure must reproduce plane Gibbs averages of f
    top, f, _ = dw
    plane = gibbs_quadrature_mean(GibbsSpec(DOUBLE_WELL, BETA), f)
    assert graph_mean(top, BETA, f) == pytest.approx(plane, rel=1e-6)


def test_graph_mean_bowl_closed_form(bowl):
    top, f, _ = bowl
    # truncated exponential: E f_hat = 2 E z = 2 beta up to e^{-z_max/beta}
    assert graph_mean(top, BETA, f) == pytest.approx(2 * BETA, rel=1e-9)


def test_poisson_f_bar_paths_agree(bowl):
    top, f, coeffs = bowl
    a = solve_graph_poisson(coeffs, top, BETA, observable=f)
    b = solve_graph_poisson(coeffs, top, BETA, f_bar=a.f_bar)
    assert b.f_bar == a.f_bar
    np.testing.assert_allclose(a.phi["I1"], b.phi["I1"], atol=1e-12)


def test_bowl_poisson_solution_slope(bowl):
    # the centered cell problem for f = x^2 + y^2 has the exact solution
    # Phi(z) = z + const, so the interior slope is 1
    top, f, coeffs = bowl
    sol = solve_graph_poisson(coeffs, top, BETA, observable=f)
    zg = sol.grids["I1"]
    dphi = np.gradient(sol.phi["I1"], zg)
    core = (zg > 0.05) & (zg < 1.5)
    np.testing.assert_allclose(dphi[core], 1.0, atol=1e-3)


def test_limiting_variance_bowl(bowl):
    top, f, coeffs = bowl
    est = limiting_variance(top, f, BETA, coeffs=coeffs)
    assert est.method == "graph_limit"
    assert est.value == pytest.approx(4 * BETA**2, rel=1e-3)


def test_limiting_variance_dw_reference(dw):
    top, f, coeffs = dw
    est = limiting_variance(top, f, BETA, coeffs=coeffs)
    assert est.value == pytest.approx(3.0577e-3, rel=5e-3)


def test_limiting_variance_grid_insensitive(dw):
    # z_max truncation barely matters at beta = 0.1
    f = DOUBLE_WELL.observables["f2"]
    vals = []
    for zmax in (3.0, 4.0, 5.0):
        top = build_graph(DOUBLE_WELL, z_max=zmax)
        vals.append(limiting_variance(top, f, BETA, n_grid=96).value)
    for v in vals:
        assert v == pytest.approx(vals[1], rel=1e-2)


def test_solve_refinement_converged(dw):
    top, f, coeffs = dw
    coarse = limiting_variance(top, f, BETA, coeffs=coeffs, n_solve=1000)
    fine = limiting_variance(top, f, BETA, coeffs=coeffs, n_solve=2000)
    assert coarse.value == pytest.approx(fine.value, rel=1e-3)


def test_graph_mc_determinism(bowl):
    top, _, coeffs = bowl
    y0 = GraphPoint(0.1, "I1")
    a = simulate_graph(coeffs, top, y0, dt=1e-3, t_final=5.0, seed=3, beta=BETA)
    b = simulate_graph(coeffs, top, y0, dt=1e-3, t_final=5.0, seed=3, beta=BETA)
    np.testing.assert_array_equal(a.z, b.z)
    np.testing.assert_array_equal(a.edge_index, b.edge_index)


def test_graph_mc_stationary_law(bowl):
    top, _, coeffs = bowl
    path = simulate_graph(coeffs, top, GraphPoint(0.1, "I1"), dt=1e-3,
                          t_final=5000.0, seed=7, thin=1000, beta=BETA)
    z = path.z[200:]
    cdf = lambda v: (1 - np.exp(-v / BETA)) / (1 - np.exp(-top.z_max / BETA))
    ks = stats.kstest(z, cdf).statistic
    assert ks < 0.05


def test_graph_mc_matches_deterministic_limit(bowl):
    top, f, coeffs = bowl
    lim = limiting_variance(top, f, BETA, coeffs=coeffs).value
    vals = []
    for r in range(6):
        path = simulate_graph(coeffs, top, GraphPoint(0.1, "I1"), dt=1e-3,
                              t_final=5000.0, seed=_rng.derive_seed(42, r),
                              thin=5, beta=BETA)
        fh = 2.0 * path.z  # f_hat(z) = 2z on the bowl
        tr = Trajectory(times=path.times, states=np.stack([fh, 0 * fh], 1),
                        seed=0, dt_effective=1e-3, thin=5)
        vals.append(batch_means_variance(tr, lambda x, y: x, n_batches=50)[1].value)
    assert np.mean(vals) == pytest.approx(lim, rel=0.10)


def test_vertex_offset_halving(bowl):
    # same noise stream; the restart offset must not move the statistics
    top, _, coeffs = bowl
    means = []
    for rho in (1e-3, 5e-4):
        p = simulate_graph(coeffs, top, GraphPoint(0.1, "I1"), dt=1e-3,
                           t_final=2000.0, seed=9, thin=10, beta=BETA,
                           vertex_offset=rho)
        means.append(np.mean(p.z))
    assert abs(means[0] - means[1]) < 0.02 * means[0]


def test_saddle_branch_frequencies(dw):
    top, _, coeffs = dw
    path = simulate_graph(coeffs, top, GraphPoint(0.3, "I3"), dt=1e-3,
                          t_final=2000.0, seed=11, thin=1000, beta=BETA)
    n = path.n_events_total
    assert n > 10000
    counts = {"I1": 0, "I2": 0, "I3": 0}
    for _, vid, eid in path.vertex_events:
        assert vid == "saddle"
        counts[eid] += 1
    # b-proportional branching: 1/4, 1/4, 1/2
    for eid, p_exp in (("I1", 0.25), ("I2", 0.25), ("I3", 0.5)):
        se = np.sqrt(p_exp * (1 - p_exp) / n)
        assert abs(counts[eid] / n - p_exp) < 3 * se


def test_graph_terminal_z(bowl):
    top, _, coeffs = bowl
    out = graph_terminal_z(coeffs, top, GraphPoint(0.1, "I1"), dt=1e-3,
                           t_final=2.0, master_seed=5, n_replicas=8, beta=BETA)
    assert out.shape == (8,)
    assert np.all((out >= 0) & (out <= top.z_max))
    assert len(set(out.round(12))) == 8
