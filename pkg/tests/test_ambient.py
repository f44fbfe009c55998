import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homsurf.ambient import (
    AmbientVector,
    ChartDomainError,
    ModelSpace,
    cross,
    curvature_tensor,
    frame_brackets,
    frame_christoffels_koszul,
    frame_vector,
    inner,
)
from oracles import curvature_fd, frame_connection_fd, random_points

NIL = ModelSpace(0.0, 0.5)
H2R = ModelSpace(-1.0, 0.0)
MODELS = [NIL, ModelSpace(4.0, 0.5), ModelSpace(-1.0, 0.5), H2R, ModelSpace(3.0, 1.0), ModelSpace(-0.75, 0.25)]

coord = st.floats(-1.5, 1.5, allow_nan=False)
comp = st.floats(-3, 3, allow_nan=False)
vec3 = st.tuples(comp, comp, comp)


def test_constructor_rejects_space_forms():
    for k, t in [(4.0, 1.0), (0.0, 0.0), (1.0, 0.5), (4.0, -1.0)]:
        with pytest.raises(ValueError, match="kappa equals 4 tau"):
            ModelSpace(k, t)
    # explicit opt-in for formula-level use
    assert ModelSpace(4.0, 1.0, allow_space_form=True).sigma == 2.0


def test_derived_constants():
    m = ModelSpace(3.0, 1.0)
    assert m.sigma == 1.5
    assert m.aniso == -1.0
    with pytest.raises(ValueError):
        H2R.sigma
    with pytest.raises(AttributeError):
        m.kappa = 2.0


def test_metric_examples():
    assert np.allclose(NIL.metric_at([0, 0, 0]), np.eye(3), atol=0)
    assert np.allclose(NIL.metric_at([0, 2, 0]), [[2, 0, 1], [0, 1, 0], [1, 0, 1]], atol=1e-15)
    assert np.allclose(H2R.metric_at([0, 0, 5]), np.eye(3), atol=0)


def test_metric_domain_error():
    with pytest.raises(ChartDomainError):
        H2R.metric_at([2.0, 0.0, 0.0])
    with pytest.raises(ChartDomainError):
        ModelSpace(-4.0, 0.5).canonical_frame_at([0.8, 0.7, 0.0])
    # kappa > 0: whole R^3
    ModelSpace(4.0, 0.5).metric_at([100.0, -50.0, 3.0])


def test_canonical_frame_examples():
    assert np.allclose(NIL.canonical_frame_at([0, 0, 0]), np.eye(3), atol=0)
    B = NIL.canonical_frame_at([1, 0, 0])
    assert np.allclose(B[:, 0], [1, 0, 0])
    assert np.allclose(B[:, 1], [0, 1, 0.5])
    assert np.allclose(B[:, 2], [0, 0, 1])


@pytest.mark.parametrize("m", MODELS, ids=lambda m: m.label())
def test_frame_orthonormal_and_direct(m):
    rng = np.random.default_rng(1)
    p = random_points(rng, m, 1000, 2.0)
    B = m.canonical_frame_at(p)
    G = m.metric_at(p)
    err = np.abs(np.swapaxes(B, -1, -2) @ G @ B - np.eye(3)).max()
    assert err < 1e-10
    assert np.all(np.linalg.det(B) * np.sqrt(np.linalg.det(G)) > 0)
    assert np.allclose(B[..., :, 2], [0, 0, 1], atol=0)
    Binv = m.frame_inverse(p)
    assert np.abs(Binv @ B - np.eye(3)).max() < 1e-10


def test_christoffel_table_nil():
    gam = NIL.frame_christoffels()
    assert gam[2, 0, 1] == 0.5
    assert gam[0, 2, 1] == 0.5
    nonzero = {(2, 0, 1): 0.5, (0, 1, 2): 0.5, (2, 1, 0): -0.5, (1, 0, 2): -0.5, (0, 2, 1): 0.5, (1, 2, 0): -0.5}
    for idx in np.ndindex(3, 3, 3):
        assert gam[idx] == nonzero.get(idx, 0.0)


def test_christoffel_table_sphere_model():
    m = ModelSpace(4.0, 1.0, allow_space_form=True)
    assert m.frame_christoffels()[0, 2, 1] == -1.0


@pytest.mark.parametrize("m", MODELS, ids=lambda m: m.label())
def test_christoffels_match_coordinate_oracle(m):
    rng = np.random.default_rng(2)
    p = random_points(rng, m, 20)
    ref = frame_connection_fd(m, p)
    assert np.abs(m.frame_christoffels(p) - ref).max() < 1e-6


def test_christoffels_product_space_at_origin():
    p = np.zeros(3)
    ref = frame_connection_fd(H2R, p)
    assert np.abs(H2R.frame_christoffels(p) - ref).max() < 1e-6
    with pytest.raises(ValueError):
        H2R.frame_christoffels()


@pytest.mark.parametrize("m", MODELS, ids=lambda m: m.label())
def test_christoffels_metric_compatible(m):
    # <nabla E_e, E_d> + <E_e, nabla E_d> = 0
    rng = np.random.default_rng(3)
    gam = m.frame_christoffels(random_points(rng, m, 10))
    assert np.abs(gam + np.swapaxes(gam, -1, -3)).max() < 1e-8


def test_christoffels_not_antisymmetric_in_lower_pair():
    gam = NIL.frame_christoffels()
    assert np.abs(gam + np.swapaxes(gam, -1, -2)).max() > 0.1


@pytest.mark.parametrize("m", [m for m in MODELS if m.tau != 0], ids=lambda m: m.label())
def test_koszul_agrees_with_table(m):
    rng = np.random.default_rng(4)
    p = random_points(rng, m, 10)
    assert np.abs(frame_christoffels_koszul(m, p) - m.christoffel_table()).max() < 1e-6


@pytest.mark.parametrize("m", [m for m in MODELS if m.tau != 0], ids=lambda m: m.label())
def test_bracket_relations(m):
    rng = np.random.default_rng(5)
    p = random_points(rng, m, 10)
    errs = []
    for h in (2e-3, 1e-3):
        C = frame_brackets(m, p, h)
        ref = np.zeros((3, 3, 3))
        ref[2, 0, 1], ref[2, 1, 0] = 2 * m.tau, -2 * m.tau
        ref[0, 1, 2], ref[0, 2, 1] = m.sigma, -m.sigma
        ref[1, 2, 0], ref[1, 0, 2] = m.sigma, -m.sigma
        errs.append(np.abs(C - ref).max())
    assert errs[1] < 1e-4
    # O(h^2), unless already at rounding level
    assert errs[1] < 1e-10 or errs[0] / errs[1] > 3.0


@pytest.mark.parametrize("m", MODELS, ids=lambda m: m.label())
def test_vertical_field_is_killing_with_twist(m):
    # nabla_X E3 = tau X x E3, i.e. <nabla_{E_g} E3, E_d> = tau (E_g x E3)_d
    rng = np.random.default_rng(6)
    p = random_points(rng, m, 10)
    gam = frame_connection_fd(m, p)
    ref = np.zeros((3, 3))
    for g in range(3):
        e = np.zeros(3)
        e[g] = 1
        ref[:, g] = m.tau * np.cross(e, [0, 0, 1])
    assert np.abs(gam[..., :, :, 2] - ref).max() < 1e-6


def test_coordinate_christoffels_nil_origin():
    # hand derivation: d_y G_13 = tau, d_x G_23 = -tau, G = I at the origin
    Gam = NIL.coordinate_christoffels(np.zeros(3))
    ref = np.zeros((3, 3, 3))
    ref[0, 1, 2] = ref[0, 2, 1] = 0.5
    ref[1, 0, 2] = ref[1, 2, 0] = -0.5
    assert np.abs(Gam - ref).max() < 1e-8


def test_coordinate_christoffels_flat_and_symmetric():
    flat = ModelSpace(0.0, 0.0, allow_space_form=True)
    assert np.abs(flat.coordinate_christoffels(np.array([0.3, -1.0, 2.0]))).max() == 0.0
    rng = np.random.default_rng(7)
    for m in MODELS:
        Gam = m.coordinate_christoffels(random_points(rng, m, 5))
        assert np.array_equal(Gam, np.swapaxes(Gam, -1, -2))


def test_coordinate_christoffels_fourth_order_is_closer():
    m = ModelSpace(-1.0, 0.5)
    p = np.array([0.7, -0.4, 0.3])
    ref = m.coordinate_christoffels(p, 1e-3, order=4)
    e2 = np.abs(m.coordinate_christoffels(p, 1e-2) - ref).max()
    e4 = np.abs(m.coordinate_christoffels(p, 1e-2, order=4) - ref).max()
    assert e4 < e2 / 100


def test_curvature_examples():
    p = (0.0, 0.0, 0.0)
    E = [frame_vector(p, i) for i in range(3)]
    assert curvature_tensor(NIL, E[1], E[2], E[1], E[2]) == pytest.approx(0.25, abs=1e-15)
    assert curvature_tensor(NIL, E[0], E[1], E[0], E[1]) == pytest.approx(-0.75, abs=1e-15)
    assert curvature_tensor(NIL, E[0], E[0], E[1], E[2]) == 0.0


def test_curvature_rejects_mixed_tags_and_points():
    p = (0.0, 0.0, 0.0)
    X = frame_vector(p, 0)
    Y = AmbientVector(p, (0, 1, 0), "coordinate")
    with pytest.raises(ValueError, match="same basis"):
        curvature_tensor(NIL, X, Y, X, X)
    with pytest.raises(ValueError, match="same point"):
        curvature_tensor(NIL, X, frame_vector((1, 0, 0), 1), X, X)


@pytest.mark.parametrize("m", MODELS, ids=lambda m: m.label())
def test_curvature_operator_diagonal(m):
    E = np.eye(3)
    planes = [(E[1], E[2]), (E[2], E[0]), (E[0], E[1])]
    K = np.array([[m.curvature_frame(X, Y, Z, W) for (Z, W) in planes] for (X, Y) in planes])
    assert np.abs(K - np.diag([m.tau**2, m.tau**2, m.kappa - 3 * m.tau**2])).max() < 1e-12


def test_curvature_b_from_sigma():
    # b = -3 tau^2 + 2 sigma tau equals kappa - 3 tau^2
    for m in MODELS:
        if m.tau:
            assert m.curvature_frame([1, 0, 0], [0, 1, 0], [1, 0, 0], [0, 1, 0]) == pytest.approx(
                -3 * m.tau**2 + 2 * m.sigma * m.tau
            )


@pytest.mark.parametrize("m", MODELS[:4], ids=lambda m: m.label())
def test_curvature_matches_finite_differences(m):
    rng = np.random.default_rng(8)
    p = random_points(rng, m, 30)
    V = [rng.standard_normal((30, 3)) for _ in range(4)]
    V = [v / np.linalg.norm(v, axis=1, keepdims=True) for v in V]
    B = m.canonical_frame_at(p)
    coords = [np.einsum("nij,nj->ni", B, v) for v in V]
    assert np.abs(curvature_fd(m, p, *coords) - m.curvature_frame(*V)).max() < 1e-4


@settings(max_examples=50, deadline=None)
@given(vec3, vec3, vec3, vec3, vec3, st.floats(-2, 2))
def test_curvature_symmetries(X, Y, Z, W, V, s):
    m = ModelSpace(-1.0, 0.5)
    R = m.curvature_frame
    assert R(X, Y, Z, W) == pytest.approx(-R(Y, X, Z, W), abs=1e-9)
    assert R(X, Y, Z, W) == pytest.approx(-R(X, Y, W, Z), abs=1e-9)
    assert R(X, Y, Z, W) == pytest.approx(R(Z, W, X, Y), abs=1e-9)
    assert R(X, X, Z, W) == pytest.approx(0.0, abs=1e-9)
    XV = np.add(X, np.multiply(s, V))
    assert R(XV, Y, Z, W) == pytest.approx(R(X, Y, Z, W) + s * R(V, Y, Z, W), abs=1e-8)


def test_cross_and_inner_examples():
    p = (0.0, 2.0, 0.0)
    E1, E2, E3 = (frame_vector(p, i) for i in range(3))
    assert np.allclose(cross(NIL, p, E1, E2).array, E3.array)
    dx = AmbientVector(p, (1, 0, 0))
    dz = AmbientVector(p, (0, 0, 1))
    assert inner(NIL, p, dx, dz) == pytest.approx(1.0)
    assert np.allclose(cross(NIL, p, dx, dx).array, 0)


@settings(max_examples=50, deadline=None)
@given(st.tuples(coord, coord, coord), vec3, vec3)
def test_cross_is_orthogonal_and_keeps_tag(p, a, b):
    m = ModelSpace(-0.5, 0.3)
    X = AmbientVector(p, a, "coordinate")
    Y = AmbientVector(p, b, "frame")
    C = cross(m, p, X, Y)
    assert C.basis == "coordinate"
    scale = 1 + np.linalg.norm(a) * np.linalg.norm(b) * 10
    assert abs(inner(m, p, C, X)) < 1e-9 * scale
    assert abs(inner(m, p, C, Y)) < 1e-9 * scale


@settings(max_examples=50, deadline=None)
@given(st.tuples(coord, coord, coord), vec3, vec3, st.floats(-3, 3))
def test_vector_algebra_preserves_tag(p, a, b, s):
    m = ModelSpace(4.0, 0.5)
    X = AmbientVector(p, a, "frame")
    Y = AmbientVector(p, b, "frame")
    assert (X + Y).basis == "frame"
    assert (s * X - Y).basis == "frame"
    with pytest.raises(ValueError):
        X + Y.to_coordinate(m)
    back = X.to_coordinate(m).to_frame(m)
    assert np.allclose(back.array, X.array, atol=1e-9)
    assert inner(m, p, X, Y) == pytest.approx(inner(m, p, X.to_coordinate(m), Y.to_coordinate(m)), abs=1e-8)


def test_vector_basis_validation():
    with pytest.raises(ValueError):
        AmbientVector((0, 0, 0), (1, 0, 0), "polar")
