"""Surface patches in E(kappa, tau) and their fundamental data.

A patch maps a parameter rectangle into the chart of a model space.  From it
we extract, on a uniform grid, the quadruple (g, S, T, nu): the induced metric
(in the (d_u, d_v) basis), the shape operator and the tangential part of the
vertical field (both in an orthonormal tangent frame), and nu = <N, xi>.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import RectBivariateSpline

from .ambient import ModelSpace
from .numerics import partial, partial4

NIL = ModelSpace(0.0, 0.5)
H2R = ModelSpace(-1.0, 0.0)

EPS_IMMERSION = 1e-12


class DegenerateImmersionError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    u0: float
    u1: float
    v0: float
    v1: float
    nu: int = 41
    nv: int = 41

    def __post_init__(self):
        if self.nu < 1 or self.nv < 1:
            raise ValueError("grid needs at least one point per direction")

    @property
    def u(self):
        return np.linspace(self.u0, self.u1, self.nu)

    @property
    def v(self):
        return np.linspace(self.v0, self.v1, self.nv)

    @property
    def hu(self):
        return (self.u1 - self.u0) / (self.nu - 1) if self.nu > 1 else 0.0

    @property
    def hv(self):
        return (self.v1 - self.v0) / (self.nv - 1) if self.nv > 1 else 0.0

    @property
    def shape(self):
        return (self.nu, self.nv)

    def points(self):
        """Parameter points, shape (nu, nv, 2), indexed [i, j] -> (u_i, v_j)."""
        U, V = np.meshgrid(self.u, self.v, indexing="ij")
        return np.stack([U, V], axis=-1)

    def refined(self):
        """Same rectangle with half the step."""
        return replace(self, nu=2 * self.nu - 1, nv=2 * self.nv - 1)

    def with_size(self, nu, nv):
        return replace(self, nu=nu, nv=nv)


@dataclass
class SurfacePatch:
    """Parametrized surface (u, v) -> chart point of ``model``.

    ``point``, ``du`` and ``dv`` take arrays of shape (..., 2) and return
    (..., 3).  When ``derivative_mode`` is "finite-difference" the supplied
    derivatives are ignored and central differences of ``point`` are used.
    """

    model: ModelSpace
    point: object
    du: object = None
    dv: object = None
    rect: tuple = (0.0, 1.0, 0.0, 1.0)
    name: str = "patch"
    params: dict = field(default_factory=dict)
    derivative_mode: str = "analytic"
    h_fd: float = 1e-4

    def __call__(self, u, v):
        return self.point(np.stack(np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float)), -1))

    def default_grid(self, nu=41, nv=41):
        return Grid(*self.rect, nu=nu, nv=nv)

    def tangents(self, uv):
        uv = np.asarray(uv, dtype=float)
        if self.derivative_mode == "finite-difference" or self.du is None:
            return partial(self.point, uv, 0, self.h_fd), partial(self.point, uv, 1, self.h_fd)
        return self.du(uv), self.dv(uv)

    def finite_difference(self, h=1e-4):
        return replace(self, derivative_mode="finite-difference", h_fd=h)

    @classmethod
    def from_samples(cls, model, grid, positions, name="sampled", degree=5):
        """Interpolating spline patch through chart positions of shape (nu, nv, 3)."""
        positions = np.asarray(positions, dtype=float)
        k_u = min(degree, grid.nu - 1)
        k_v = min(degree, grid.nv - 1)
        splines = [RectBivariateSpline(grid.u, grid.v, positions[..., c], kx=k_u, ky=k_v, s=0) for c in range(3)]

        def evaluator(dx, dy):
            def f(uv):
                uv = np.asarray(uv, dtype=float)
                out = [s.ev(uv[..., 0], uv[..., 1], dx=dx, dy=dy) for s in splines]
                return np.stack(out, axis=-1)

            return f

        return cls(
            model,
            evaluator(0, 0),
            evaluator(1, 0),
            evaluator(0, 1),
            rect=(grid.u0, grid.u1, grid.v0, grid.v1),
            name=name,
            derivative_mode="sampled",
        )


# -- tangent frames ------------------------------------------------------


def gram_schmidt_frame(g, angle=0.0):
    """Direct orthonormal frame from the metric, seeded by d_u.

    Returns E of shape (..., 2, 2) whose columns are e1, e2 in (d_u, d_v)
    components.  A nonzero ``angle`` (scalar or per point) rotates the frame.
    """
    g = np.asarray(g, dtype=float)
    g11, g12, g22 = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
    det = g11 * g22 - g12**2
    r = np.sqrt(g11)
    E = np.zeros(g.shape)
    E[..., 0, 0] = 1.0 / r
    E[..., 0, 1] = -g12 / (r * np.sqrt(det))
    E[..., 1, 1] = g11 / (r * np.sqrt(det))
    if np.any(angle != 0.0):
        c, s = np.cos(angle), np.sin(angle)
        R = np.zeros(np.broadcast(c, g11).shape + (2, 2))
        R[..., 0, 0], R[..., 0, 1], R[..., 1, 0], R[..., 1, 1] = c, -s, s, c
        E = E @ R
    return E


def rotation2(theta):
    """e^{theta J} with J the quarter turn [[0, -1], [1, 0]]."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


# -- quadruple data ------------------------------------------------------


@dataclass
class QuadrupleField:
    """Per-gridpoint (g, S, T, nu) plus the tangent frame they are expressed in.

    Shapes: g, S, frame (nu, nv, 2, 2); T (nu, nv, 2); nu (nu, nv).
    ``frame[..., :, k]`` holds e_{k+1} in (d_u, d_v) components.
    """

    model: ModelSpace
    grid: Grid
    g: np.ndarray
    S: np.ndarray
    T: np.ndarray
    nu: np.ndarray
    frame: np.ndarray
    s_asymmetry: float = 0.0
    label: str = ""

    @property
    def kappa(self):
        return self.model.kappa

    @property
    def tau(self):
        return self.model.tau

    def unit_norm_defect(self):
        return np.sum(self.T**2, axis=-1) + self.nu**2 - 1.0

    def mean_curvature(self):
        return mean_curvature(self)

    def coframe(self):
        """omega^k(d_a): inverse of the frame matrix, shape (..., 2, 2) [k, a]."""
        return np.linalg.inv(self.frame)

    def replace(self, **kw):
        return replace(self, **kw)

    def max_difference(self, other):
        """Largest absolute deviation over g, S, T and nu."""
        return max(
            float(np.max(np.abs(self.g - other.g))),
            float(np.max(np.abs(self.S - other.S))),
            float(np.max(np.abs(self.T - other.T))),
            float(np.max(np.abs(self.nu - other.nu))),
        )


def mean_curvature(q):
    return 0.5 * (q.S[..., 0, 0] + q.S[..., 1, 1])


def quadruple_from_gst(model, grid, g, S, T, nu, frame=None, label=""):
    """Assemble a field from raw arrays; the frame defaults to Gram-Schmidt."""
    g = np.asarray(g, dtype=float)
    S = np.asarray(S, dtype=float)
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    if frame is None:
        frame = gram_schmidt_frame(g)
    return QuadrupleField(model, grid, g, S, np.asarray(T, float), np.asarray(nu, float), frame, label=label)


def _normal_data(patch, uv):
    """Chart point, tangents, unit normal (coordinate and frame components)."""
    m = patch.model
    P = patch.point(uv)
    Xu, Xv = patch.tangents(uv)
    B = m.canonical_frame_at(P)
    Binv = m.frame_inverse(P)
    a = np.einsum("...ij,...j->...i", Binv, Xu)
    b = np.einsum("...ij,...j->...i", Binv, Xv)
    n = np.cross(a, b)
    norm = np.linalg.norm(n, axis=-1)
    if np.any(norm <= EPS_IMMERSION):
        raise DegenerateImmersionError(f"{patch.name}: tangent vectors are dependent somewhere on the grid")
    n = n / norm[..., None]
    N = np.einsum("...ij,...j->...i", B, n)
    return P, Xu, Xv, a, b, n, N


def _derivative_in_rect(func, uv, axis, h, bounds=None):
    """Fourth-order derivative; with ``bounds`` the stencil never leaves the rectangle."""
    if bounds is None:
        return partial4(func, uv, axis, h)
    lo, hi = bounds[axis]
    step = np.zeros(2)
    step[axis] = h
    x = uv[..., axis]
    out = partial4(func, uv, axis, h)
    fwd = x - 2 * h < lo - 1e-12
    bwd = x + 2 * h > hi + 1e-12
    if np.any(fwd):
        p = uv[fwd]
        f = [func(p + k * step) for k in range(5)]
        out[fwd] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    if np.any(bwd):
        p = uv[bwd]
        f = [func(p - k * step) for k in range(5)]
        out[bwd] = (25 * f[0] - 48 * f[1] + 36 * f[2] - 16 * f[3] + 3 * f[4]) / (12 * h)
    return out


def fundamental_data(patch, grid=None, h_amb=1e-4, h_par=1e-3, frame_angle=0.0):
    """Extract the quadruple of ``patch`` on ``grid``.

    The normal is the normalized vector product of the frame components of
    d_u, d_v, so (d_u, d_v, N) is direct.  S comes from -nabla N, with the
    derivative of N taken by a fourth-order stencil of step ``h_par`` in
    parameter space and the coordinate Christoffel symbols by a fourth-order
    stencil of step ``h_amb``.
    """
    m = patch.model
    grid = grid or patch.default_grid()
    uv = grid.points()
    P, Xu, Xv, a, b, n, N = _normal_data(patch, uv)

    g = np.empty(uv.shape[:-1] + (2, 2))
    g[..., 0, 0] = np.sum(a * a, -1)
    g[..., 0, 1] = g[..., 1, 0] = np.sum(a * b, -1)
    g[..., 1, 1] = np.sum(b * b, -1)
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    if np.any(det <= EPS_IMMERSION):
        raise DegenerateImmersionError(f"{patch.name}: induced metric degenerates (det g <= {EPS_IMMERSION})")

    E = gram_schmidt_frame(g, frame_angle)
    nu = n[..., 2]
    # <xi, d_u>, <xi, d_v>: xi = E3, frame components are orthonormal
    xi_par = np.stack([a[..., 2], b[..., 2]], -1)
    t_param = np.linalg.solve(g, xi_par[..., None])[..., 0]
    T = np.einsum("...ak,...ab,...b->...k", E, g, t_param)

    def normal(x):
        return _normal_data(patch, x)[-1]

    bounds = None
    if patch.derivative_mode == "sampled":
        bounds = ((grid.u0, grid.u1), (grid.v0, grid.v1))
    dN = np.stack([_derivative_in_rect(normal, uv, a, h_par, bounds) for a in range(2)], axis=-2)
    Gam = m.coordinate_christoffels(P, h_amb, order=4)
    X = np.stack([Xu, Xv], axis=-2)  # X[..., a, :] = d_a phi
    cov = dN + np.einsum("...cij,...ai,...j->...ac", Gam, X, N)
    G = m.metric_at(P)
    two = -np.einsum("...ac,...cd,...bd->...ab", cov, G, X)
    S = np.einsum("...ak,...ab,...bl->...kl", E, two, E)
    asym = float(np.max(np.abs(S - np.swapaxes(S, -1, -2)))) if S.size else 0.0
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    return QuadrupleField(m, grid, g, S, T, nu, E, s_asymmetry=asym, label=patch.name)


def adapted_frame(patch, u, v):
    """Frame matrix A with columns (dphi(e1), dphi(e2), N) in canonical-frame
    components at (u, v), and the chart point phi(u, v)."""
    uv = np.array([u, v], dtype=float)
    P, Xu, Xv, a, b, n, N = _normal_data(patch, uv)
    g = np.array([[a @ a, a @ b], [a @ b, b @ b]])
    E = gram_schmidt_frame(g)
    A = np.column_stack([E[0, 0] * a + E[1, 0] * b, E[0, 1] * a + E[1, 1] * b, n])
    return A, P


# -- catalog -------------------------------------------------------------


def _f(v, H):
    c, s = np.cos(v), np.sin(v)
    return np.sqrt(1 + c**2 / (4 * H**2)) * s + (1 + 4 * H**2) / (2 * H) * np.arcsin(s / np.sqrt(1 + 4 * H**2))


def _fprime(v, H):
    c = np.cos(v)
    return 2 * c * np.sqrt(1 + c**2 / (4 * H**2))


def _vec(*cs):
    arrs = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in cs])
    return np.stack(arrs, axis=-1)


def _vertical_plane(params):
    def point(uv):
        u, v = uv[..., 0], uv[..., 1]
        return _vec(v, 0 * u, u)

    return SurfacePatch(
        NIL,
        point,
        lambda uv: _vec(0 * uv[..., 0], 0, 1),
        lambda uv: _vec(1 + 0 * uv[..., 0], 0, 0),
        rect=(-1.0, 1.0, -1.0, 1.0),
        name="vertical-plane",
    )


def _nil_z0(params):
    def point(uv):
        u, v = uv[..., 0], uv[..., 1]
        return _vec(u * np.cos(v), u * np.sin(v), 0 * u)

    def du(uv):
        v = uv[..., 1]
        return _vec(np.cos(v), np.sin(v), 0 * v)

    def dv(uv):
        u, v = uv[..., 0], uv[..., 1]
        return _vec(-u * np.sin(v), u * np.cos(v), 0 * v)

    return SurfacePatch(NIL, point, du, dv, rect=(1.5, 2.5, 0.0, 1.0), name="nil-z0")


def _horocycle_cylinder(params):
    # the horocycle y = 1 of the upper half-plane, carried into the disk
    # chart by the Cayley map w = (z - i)/(z + i) followed by X = 2w
    def point(uv):
        u, v = uv[..., 0], uv[..., 1]
        d = u**2 + 4
        return _vec(2 * u**2 / d, 4 * u / d, v)

    def du(uv):
        u = uv[..., 0]
        d = u**2 + 4
        return _vec(16 * u / d**2, 4 * (4 - u**2) / d**2, 0 * u)

    def dv(uv):
        u = uv[..., 0]
        return _vec(0 * u, 0, 1)

    return SurfacePatch(H2R, point, du, dv, rect=(-1.0, 1.0, -1.0, 1.0), name="horocycle-cylinder")


def _cmc_graph_b(params):
    # Lorentz-model parametrization pushed to the disk chart of radius 2:
    # X + iY = 2 (x1 + i x2)/(1 + x0), Z = x3
    def point(uv):
        u, v = uv[..., 0], uv[..., 1]
        s = np.sqrt(1 + u**2 / 4)
        return _vec(u * np.cos(v) / s, u * np.sin(v) / s, 2 * s)

    def du(uv):
        u, v = uv[..., 0], uv[..., 1]
        s = np.sqrt(1 + u**2 / 4)
        return _vec(np.cos(v) / s**3, np.sin(v) / s**3, u / (2 * s))

    def dv(uv):
        u, v = uv[..., 0], uv[..., 1]
        s = np.sqrt(1 + u**2 / 4)
        return _vec(-u * np.sin(v) / s, u * np.cos(v) / s, 0 * u)

    return SurfacePatch(H2R, point, du, dv, rect=(1.5, 2.5, 0.0, 1.0), name="cmc-graph-B")


def _positive_H(params):
    H = float(params.get("H", 1.0))
    if not H > 0:
        raise ValueError(f"H must be positive, got {H}")
    return H


def _tube(params):
    H = _positive_H(params)

    def point(uv):
        u, v = uv[..., 0], uv[..., 1]
        c = np.cos(v)
        return _vec(u, c / (2 * H), u * c / (4 * H) + _f(v, H) / (4 * H))

    def du(uv):
        v = uv[..., 1]
        return _vec(1 + 0 * v, 0, np.cos(v) / (4 * H))

    def dv(uv):
        u, v = uv[..., 0], uv[..., 1]
        return _vec(0 * u, -np.sin(v) / (2 * H), -u * np.sin(v) / (4 * H) + _fprime(v, H) / (4 * H))

    return SurfacePatch(NIL, point, du, dv, rect=(-0.5, 0.5, -0.5, 0.5), name="tube", params={"H": H})


def _sphere(params):
    H = _positive_H(params)

    def point(uv):
        u, v = uv[..., 0], uv[..., 1]
        return _vec(np.cos(u) * np.cos(v) / H, np.sin(u) * np.cos(v) / H, _f(v, H) / (2 * H))

    def du(uv):
        u, v = uv[..., 0], uv[..., 1]
        return _vec(-np.sin(u) * np.cos(v) / H, np.cos(u) * np.cos(v) / H, 0 * u)

    def dv(uv):
        u, v = uv[..., 0], uv[..., 1]
        return _vec(-np.cos(u) * np.sin(v) / H, -np.sin(u) * np.sin(v) / H, _fprime(v, H) / (2 * H))

    return SurfacePatch(NIL, point, du, dv, rect=(-0.3, 0.3, -0.3, 0.3), name="sphere", params={"H": H})


CATALOG = {
    "vertical-plane": (_vertical_plane, "vertical plane (v, 0, u) in Nil3; flat and minimal"),
    "nil-z0": (_nil_z0, "surface z = 0 in Nil3, polar parametrization; minimal"),
    "horocycle-cylinder": (_horocycle_cylinder, "horocycle x R in H^2 x R; CMC 1/2"),
    "cmc-graph-B": (_cmc_graph_b, "rotational CMC 1/2 entire graph in H^2 x R"),
    "tube": (_tube, "translation-invariant CMC H tube in Nil3 (param H > 0)"),
    "sphere": (_sphere, "rotational sphere in Nil3 with mean curvature -H (param H > 0)"),
}


def catalog(name, **params):
    if name not in CATALOG:
        raise KeyError(f"unknown catalog surface {name!r}; known: {', '.join(CATALOG)}")
    return CATALOG[name][0](params)


def catalog_names():
    return list(CATALOG)


def reparametrized(patch, shift, shift_prime, name=None):
    """Patch (u, v) -> patch(u + shift(v), -v).

    This is how the twin of a tube or sphere is realized on the same surface.
    """

    def point(uv):
        u, v = uv[..., 0], uv[..., 1]
        return patch.point(_vec(u + shift(v), -v))

    def du(uv):
        u, v = uv[..., 0], uv[..., 1]
        return patch.du(_vec(u + shift(v), -v))

    def dv(uv):
        u, v = uv[..., 0], uv[..., 1]
        w = _vec(u + shift(v), -v)
        return shift_prime(v)[..., None] * patch.du(w) - patch.dv(w)

    return replace(patch, point=point, du=du, dv=dv, name=name or f"{patch.name}~")


def twin_shift(name, H):
    """Shift function for the twin reparametrization of "tube" or "sphere".

    Returns (shift, shift_prime) with shift(0) = 0.
    """
    if name == "tube":
        def prime(v):
            c = np.cos(v)
            return c**2 / (2 * H**2 * np.sqrt(1 + c**2 / (4 * H**2)))
    elif name == "sphere":
        def prime(v):
            c = np.cos(v)
            return -c / (H * np.sqrt(1 + c**2 / (4 * H**2)))
    else:
        raise KeyError(f"no twin reparametrization for {name!r}")

    def shift(v):
        v = np.asarray(v, dtype=float)
        flat = [quad(lambda t: float(prime(t)), 0.0, float(x), epsabs=1e-14, epsrel=1e-13)[0] for x in v.ravel()]
        return np.reshape(flat, v.shape)

    return shift, lambda v: prime(np.asarray(v, dtype=float))
