import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrlangevin.potentials import (
    BOWL,
    DOUBLE_WELL,
    GibbsSpec,
    InputError,
    classify_critical_points,
    get_scenario,
    gibbs_log_density,
    gibbs_quadrature_mean,
    polynomial_scenario,
    scenario_names,
)


def test_registry_names():
    assert scenario_names() == ["bowl", "double_well"]
    assert get_scenario("bowl") is BOWL
    with pytest.raises(InputError):
        get_scenario("triple_well")


def test_bowl_values_and_derivatives():
    x = np.array([0.0, 1.0, -2.0])
    y = np.array([0.0, 2.0, 0.5])
    np.testing.assert_allclose(BOWL.u(x, y), 0.5 * (x**2 + y**2))
    gx, gy = BOWL.grad_u(x, y)
    np.testing.assert_allclose(gx, x)
    np.testing.assert_allclose(gy, y)
    np.testing.assert_allclose(BOWL.laplacian_u(x, y), 2.0)
    h = BOWL.hess_u(x, y)
    assert h.shape == (3, 2, 2)
    np.testing.assert_allclose(h[:, 0, 0], 1.0)
    np.testing.assert_allclose(h[:, 0, 1], 0.0)


def test_double_well_critical_values():
    # minima at (+-1, 0) with U = 0, saddle at the origin with U = 1/4
    assert DOUBLE_WELL.u_point((1.0, 0.0)) == 0.0
    assert DOUBLE_WELL.u_point((-1.0, 0.0)) == 0.0
    assert DOUBLE_WELL.u_point((0.0, 0.0)) == 0.25
    np.testing.assert_allclose(DOUBLE_WELL.grad_point((1.0, 0.0)), 0.0)


def test_classify_critical_points():
    kinds = {(tuple(c.location), c.kind) for c in classify_critical_points(DOUBLE_WELL)}
    assert ((-1.0, 0.0), "minimum") in kinds
    assert ((1.0, 0.0), "minimum") in kinds
    assert ((0.0, 0.0), "saddle") in kinds
    bowl_cps = classify_critical_points(BOWL)
    assert len(bowl_cps) == 1 and bowl_cps[0].kind == "minimum"


def test_hessian_laplacian_consistency():
    xs = np.linspace(-2, 2, 7)
    for scen in (BOWL, DOUBLE_WELL):
        h = scen.hess_u(xs, xs)
        np.testing.assert_allclose(h[..., 0, 0] + h[..., 1, 1],
                                   scen.laplacian_u(xs, xs))


def test_polynomial_scenario_matches_double_well():
    # (x^2-1)^2/4 + y^2/2 expanded in monomials
    scen = polynomial_scenario(
        "dw_poly",
        [(4, 0, 0.25), (2, 0, -0.5), (0, 0, 0.25), (0, 2, 0.5)],
        seeds=[(-1.2, 0.1), (1.2, -0.1), (0.05, 0.05)],
    )
    pts = np.random.default_rng(0).uniform(-2, 2, size=(20, 2))
    np.testing.assert_allclose(
        scen.u(pts[:, 0], pts[:, 1]),
        DOUBLE_WELL.u(pts[:, 0], pts[:, 1]), atol=1e-12)
    found = {(round(c.location[0], 6), c.kind) for c in scen.critical_points}
    assert (-1.0, "minimum") in found
    assert (1.0, "minimum") in found
    assert (0.0, "saddle") in found


@settings(max_examples=30, deadline=None)
@given(
    terms=st.lists(
        st.tuples(st.integers(0, 3), st.integers(0, 3),
                  st.floats(-2, 2, allow_nan=False)),
        min_size=1, max_size=5),
    x=st.floats(-1.5, 1.5), y=st.floats(-1.5, 1.5),
)
def test_polynomial_gradient_matches_finite_differences(terms, x, y):
    scen = polynomial_scenario("p", terms, seeds=[])
    h = 1e-6
    gx, gy = scen.grad_u(x, y)
    fx = (scen.u(x + h, y) - scen.u(x - h, y)) / (2 * h)
    fy = (scen.u(x, y + h) - scen.u(x, y - h)) / (2 * h)
    assert abs(gx - fx) < 1e-5 * (1 + abs(gx))
    assert abs(gy - fy) < 1e-5 * (1 + abs(gy))


def test_degenerate_critical_point_rejected():
    # pure quartic: Hessian vanishes at the origin
    with pytest.raises(InputError):
        polynomial_scenario("quartic", [(4, 0, 1.0), (0, 4, 1.0)],
                            seeds=[(0.0, 0.0)])


def test_gibbs_spec_validation():
    with pytest.raises(InputError):
        GibbsSpec(BOWL, -0.1)
    with pytest.raises(InputError):
        BOWL.u_point((1.0, 2.0, 3.0))


def test_gibbs_log_density():
    spec = GibbsSpec(BOWL, 0.1)
    assert gibbs_log_density(spec, (0.0, 0.0)) == 0.0
    np.testing.assert_allclose(gibbs_log_density(spec, (1.0, 1.0)), -10.0)


def test_gibbs_quadrature_mean_bowl():
    # Gaussian moments: E(x^2 + y^2) = 2 beta for U = (x^2+y^2)/2
    spec = GibbsSpec(BOWL, 0.1)
    val = gibbs_quadrature_mean(spec, lambda x, y: x**2 + y**2)
    np.testing.assert_allclose(val, 0.2, rtol=1e-10)
    # odd observable integrates to zero by symmetry
    assert abs(gibbs_quadrature_mean(spec, lambda x, y: x)) < 1e-12


def test_gibbs_quadrature_mean_double_well_reference():
    spec = GibbsSpec(DOUBLE_WELL, 0.1)
    coarse = gibbs_quadrature_mean(spec, DOUBLE_WELL.observables["f2"], n=1024)
    fine = gibbs_quadrature_mean(spec, DOUBLE_WELL.observables["f2"], n=2048)
    np.testing.assert_allclose(coarse, fine, rtol=1e-9)
