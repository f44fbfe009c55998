import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homsurf.ambient import ChartDomainError, ModelSpace
from homsurf.immersion import (
    CATALOG,
    DegenerateImmersionError,
    Grid,
    SurfacePatch,
    adapted_frame,
    catalog,
    fundamental_data,
    gram_schmidt_frame,
    mean_curvature,
    quadruple_from_gst,
)
from homsurf.numerics import partial4
from conftest import SURFACES, catalog_quadruple


def test_catalog_points():
    assert np.allclose(catalog("vertical-plane")(3, 7), [7, 0, 3])
    assert np.allclose(catalog("nil-z0")(1, 0), [1, 0, 0])
    assert np.allclose(catalog("tube", H=1)(0, 0), [0, 0.5, 0])


def test_catalog_errors():
    with pytest.raises(KeyError, match="unknown catalog surface"):
        catalog("klein-bottle")
    for name in ("tube", "sphere"):
        with pytest.raises(ValueError):
            catalog(name, H=0.0)
        with pytest.raises(ValueError):
            catalog(name, H=-1.0)


@pytest.mark.parametrize("name", list(CATALOG))
def test_catalog_derivatives_are_exact(name):
    p = catalog(name, **SURFACES[name])
    uv = p.default_grid(7, 7).points()
    for axis, d in ((0, p.du), (1, p.dv)):
        assert np.abs(d(uv) - partial4(p.point, uv, axis, 1e-3)).max() < 1e-9


@pytest.mark.parametrize("name", list(CATALOG))
def test_catalog_patches_stay_in_chart_and_immersed(name):
    q = catalog_quadruple(name, 41)
    assert np.all(np.linalg.det(q.g) > 1e-6)


def test_vertical_plane_quadruple():
    q = catalog_quadruple("vertical-plane")
    assert np.abs(q.nu).max() < 1e-12
    assert np.abs(q.T - [1.0, 0.0]).max() < 1e-12
    assert np.abs(q.S - np.array([[0.0, -0.5], [-0.5, 0.0]])).max() < 1e-10
    assert np.abs(q.g - np.eye(2)).max() < 1e-14
    assert np.abs(mean_curvature(q)).max() < 1e-10


def test_nil_z0_normal_and_tangent_part():
    q = catalog_quadruple("nil-z0")
    i = 40
    assert q.grid.u[i] == pytest.approx(2.0)
    assert np.allclose(q.nu[i], 1 / np.sqrt(2), atol=1e-12)
    # oracle: <xi, phi_u>, <xi, phi_v> straight from the metric, then solve
    p = catalog("nil-z0")
    m = p.model
    for j in (0, 17, 80):
        uv = np.array([2.0, q.grid.v[j]])
        P, Xu, Xv = p.point(uv), p.du(uv), p.dv(uv)
        G = m.metric_at(P)
        g = np.array([[Xu @ G @ Xu, Xu @ G @ Xv], [Xv @ G @ Xu, Xv @ G @ Xv]])
        rhs = np.array([(G @ Xu)[2], (G @ Xv)[2]])
        t = np.linalg.solve(g, rhs)
        assert t @ g @ t == pytest.approx(0.5, abs=1e-12)
        assert np.sum(q.T[i, j] ** 2) == pytest.approx(0.5, abs=1e-12)


def test_nil_z0_tangent_part_along_e2():
    # -u / (2 sqrt(1 + u^2/4)) times the unit vector e2
    q = catalog_quadruple("nil-z0")
    u = q.grid.u[:, None]
    assert np.abs(q.T[..., 0]).max() < 1e-12
    assert np.abs(q.T[..., 1] + u / (2 * np.sqrt(1 + u**2 / 4))).max() < 1e-12


def test_mean_curvature_examples():
    assert np.abs(catalog_quadruple("tube").mean_curvature() - 1.0).max() < 1e-8
    assert np.abs(catalog_quadruple("sphere").mean_curvature() + 1.0).max() < 1e-8
    assert np.abs(catalog_quadruple("horocycle-cylinder").mean_curvature() - 0.5).max() < 1e-8
    assert np.abs(catalog_quadruple("cmc-graph-B").mean_curvature() - 0.5).max() < 1e-8


@pytest.mark.parametrize("name", list(CATALOG))
def test_unit_norm_and_symmetry(name):
    q = catalog_quadruple(name)
    assert np.abs(q.unit_norm_defect()).max() < 1e-8
    assert np.array_equal(q.S, np.swapaxes(q.S, -1, -2))
    assert q.s_asymmetry < 1e-8


@pytest.mark.parametrize("name", list(CATALOG))
def test_orientation_is_direct(name):
    p = catalog(name, **SURFACES[name])
    u0, u1, v0, v1 = p.rect
    for u, v in [(u0, v0), (u1, v1), (0.5 * (u0 + u1), 0.3 * v0 + 0.7 * v1)]:
        A, _ = adapted_frame(p, u, v)
        assert np.linalg.det(A) == pytest.approx(1.0, abs=1e-8)
        assert np.abs(A.T @ A - np.eye(3)).max() < 1e-12


@pytest.mark.parametrize("name", list(CATALOG))
def test_frame_is_orthonormal_and_seeded_by_du(name):
    q = catalog_quadruple(name, 21)
    E = q.frame
    gram = np.swapaxes(E, -1, -2) @ q.g @ E
    assert np.abs(gram - np.eye(2)).max() < 1e-10
    assert np.abs(E[..., 1, 0]).max() == 0.0
    assert np.all(E[..., 0, 0] > 0)
    assert np.all(np.linalg.det(E) > 0)


def test_rotated_frame_conjugates_data():
    p = catalog("tube", H=1.0)
    grid = p.default_grid(21, 21)
    rng = np.random.default_rng(0)
    angle = rng.uniform(-np.pi, np.pi, grid.shape)
    q0 = fundamental_data(p, grid)
    q1 = fundamental_data(p, grid, frame_angle=angle)
    c, s = np.cos(angle), np.sin(angle)
    R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    Rt = np.swapaxes(R, -1, -2)
    assert np.abs(q1.S - Rt @ q0.S @ R).max() < 1e-10
    assert np.abs(q1.T - np.einsum("...ji,...j->...i", R, q0.T)).max() < 1e-12
    assert np.abs(q1.nu - q0.nu).max() == 0.0


def test_finite_difference_mode_is_second_order():
    p = catalog("sphere", H=1.0)
    grid = p.default_grid(9, 9)
    exact = fundamental_data(p, grid)
    errs = [fundamental_data(p.finite_difference(h), grid).max_difference(exact) for h in (1e-2, 5e-3)]
    assert errs[1] < 1e-4
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_sampled_patch_reproduces_analytic_data():
    p = catalog("tube", H=1.0)
    grid = p.default_grid(41, 41)
    sampled = SurfacePatch.from_samples(p.model, grid, p.point(grid.points()))
    assert fundamental_data(sampled, grid).max_difference(fundamental_data(p, grid)) < 1e-5


def test_degenerate_immersion_is_rejected():
    m = ModelSpace(0.0, 0.5)
    flat_line = SurfacePatch(m, lambda uv: np.stack([uv[..., 0], 0 * uv[..., 0], 0 * uv[..., 0]], -1), name="line")
    with pytest.raises(DegenerateImmersionError):
        fundamental_data(flat_line, Grid(0, 1, 0, 1, 5, 5))


def test_chart_exit_is_reported():
    m = ModelSpace(-1.0, 0.0)
    strip = SurfacePatch(m, lambda uv: np.stack([uv[..., 0], uv[..., 1], 0 * uv[..., 0]], -1), name="strip")
    with pytest.raises(ChartDomainError):
        fundamental_data(strip, Grid(1.5, 2.5, 0, 0.5, 5, 5))


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.2, 3.0), st.floats(-2.0, 2.0), st.floats(0.2, 3.0), st.floats(-np.pi, np.pi)
)
def test_gram_schmidt_frame_properties(a, b, c, angle):
    g = np.array([[a * a + b * b, b * c], [b * c, c * c]])
    E = gram_schmidt_frame(g, angle)
    assert np.abs(E.T @ g @ E - np.eye(2)).max() < 1e-9
    assert np.linalg.det(E) > 0


def test_quadruple_from_gst_symmetrizes():
    grid = Grid(0, 1, 0, 1, 2, 2)
    S = np.zeros((2, 2, 2, 2))
    S[..., 0, 1] = 1.0
    q = quadruple_from_gst(ModelSpace(0, 0.5), grid, np.broadcast_to(np.eye(2), S.shape), S, np.zeros((2, 2, 2)), np.ones((2, 2)))
    assert np.all(q.S[..., 0, 1] == 0.5) and np.all(q.S[..., 1, 0] == 0.5)
    assert np.allclose(q.frame, np.eye(2))


def test_grid_helpers():
    g = Grid(0.0, 1.0, -1.0, 1.0, 3, 5)
    assert g.hu == 0.5 and g.hv == 0.5
    assert g.points().shape == (3, 5, 2)
    assert g.refined().nu == 5 and g.refined().nv == 9
