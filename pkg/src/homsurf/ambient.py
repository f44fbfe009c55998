"""Model spaces E(kappa, tau) in the chart used throughout the package.

Points are triples (x, y, z).  The metric is

    lam^2 (dx^2 + dy^2) + (tau lam (y dx - x dy) + dz)^2,
    lam = 1 / (1 + kappa/4 (x^2 + y^2)),

which covers Nil3 (kappa = 0), the Berger-type spaces (kappa > 0, minus one
fiber) and the PSL-type spaces / H^2 x R (kappa < 0, on the disk of radius
2/sqrt(-kappa)).  Every routine accepts batches: a point array of shape
(..., 3) yields results with the same leading shape.

Frame Christoffel symbols are stored as ``gam[d, g, e] = <nabla_{E_g} E_e, E_d>``
(upper index first), so ``gam[2, 0, 1]`` is the symbol written with upper
index 3 and lower indices 1, 2.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import jacobian

BASES = ("coordinate", "frame")


class ChartDomainError(ValueError):
    """A point lies outside the chart of the model space."""


@dataclass(frozen=True)
class ModelSpace:
    kappa: float
    tau: float
    # kappa = 4 tau^2 is the round sphere / R^3; the chart formulas still hold
    # there, so callers that only need the formulas may opt in explicitly.
    allow_space_form: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "tau", float(self.tau))
        if not self.allow_space_form and abs(self.kappa - 4.0 * self.tau**2) <= 1e-12 * max(1.0, abs(self.kappa)):
            raise ValueError(
                f"kappa equals 4 tau^2 (kappa={self.kappa}, tau={self.tau}): "
                "that is a space form, not an E(kappa, tau)"
            )

    @property
    def sigma(self):
        if self.tau == 0.0:
            raise ValueError("sigma = kappa/(2 tau) is undefined for tau = 0")
        return self.kappa / (2.0 * self.tau)

    @property
    def aniso(self):
        return self.kappa - 4.0 * self.tau**2

    @property
    def disk_radius(self):
        """Radius of the chart disk in the (x, y) plane; inf unless kappa < 0."""
        return 2.0 / np.sqrt(-self.kappa) if self.kappa < 0 else np.inf

    def label(self):
        return f"E(kappa={self.kappa:g}, tau={self.tau:g})"

    # -- chart ---------------------------------------------------------

    def in_domain(self, p):
        p = np.asarray(p, dtype=float)
        if self.kappa >= 0:
            return np.all(np.isfinite(p), axis=-1)
        return p[..., 0] ** 2 + p[..., 1] ** 2 < 4.0 / (-self.kappa)

    def check_domain(self, p):
        ok = self.in_domain(p)
        if not np.all(ok):
            bad = np.asarray(p)[~ok] if np.ndim(ok) else np.asarray(p)
            raise ChartDomainError(
                f"point(s) outside the chart of {self.label()}: "
                f"x^2+y^2 must stay below {4.0 / -self.kappa:g}; first offender {bad.reshape(-1, 3)[0]}"
            )

    def lam(self, p):
        p = np.asarray(p, dtype=float)
        return 1.0 / (1.0 + 0.25 * self.kappa * (p[..., 0] ** 2 + p[..., 1] ** 2))

    def metric_at(self, p):
        """Coordinate metric G at p, shape (..., 3, 3)."""
        p = np.asarray(p, dtype=float)
        self.check_domain(p)
        lam = self.lam(p)
        # vertical one-form tau lam (y dx - x dy) + dz
        theta = np.stack(
            [self.tau * lam * p[..., 1], -self.tau * lam * p[..., 0], np.ones_like(lam)], axis=-1
        )
        G = theta[..., :, None] * theta[..., None, :]
        G[..., 0, 0] += lam**2
        G[..., 1, 1] += lam**2
        return G

    def canonical_frame_at(self, p):
        """Matrix B whose columns are E1, E2, E3 in coordinate components."""
        p = np.asarray(p, dtype=float)
        self.check_domain(p)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        inv = 1.0 / self.lam(p)
        if self.tau == 0.0:
            c, s = np.ones_like(z), np.zeros_like(z)
        else:
            c, s = np.cos(self.sigma * z), np.sin(self.sigma * z)
        B = np.zeros(p.shape[:-1] + (3, 3))
        B[..., 0, 0] = inv * c
        B[..., 1, 0] = inv * s
        B[..., 2, 0] = self.tau * (x * s - y * c)
        B[..., 0, 1] = -inv * s
        B[..., 1, 1] = inv * c
        B[..., 2, 1] = self.tau * (x * c + y * s)
        B[..., 2, 2] = 1.0
        return B

    def frame_inverse(self, p):
        """B^{-1} = B^T G, mapping coordinate components to frame components."""
        B = self.canonical_frame_at(p)
        return np.swapaxes(B, -1, -2) @ self.metric_at(p)

    # -- connection ----------------------------------------------------

    def christoffel_table(self):
        """Constant frame Christoffel symbols for tau != 0."""
        if self.tau == 0.0:
            raise ValueError("the frame symbols are position dependent when tau = 0")
        t, ts = self.tau, self.tau - self.sigma
        gam = np.zeros((3, 3, 3))
        gam[2, 0, 1] = t
        gam[0, 1, 2] = t
        gam[2, 1, 0] = -t
        gam[1, 0, 2] = -t
        gam[0, 2, 1] = ts
        gam[1, 2, 0] = -ts
        return gam

    def frame_christoffels(self, p=None, h=1e-4):
        """Frame Christoffel symbols at p.

        For tau != 0 this is the constant table, broadcast to the batch shape
        of p.  For tau = 0 the symbols are obtained from the Koszul formula
        with Lie brackets of the frame fields taken by central differences.
        """
        if self.tau != 0.0:
            gam = self.christoffel_table()
            if p is None:
                return gam
            shape = np.asarray(p).shape[:-1]
            return np.broadcast_to(gam, shape + (3, 3, 3)).copy()
        if p is None:
            raise ValueError("a point is required when tau = 0")
        return frame_christoffels_koszul(self, p, h)

    def coordinate_christoffels(self, p, h=1e-4, order=2):
        """Gamma[a, b, c] = Gamma^a_{bc} of the coordinate metric, by central differences.

        ``order`` selects the 3-point (2) or 5-point (4) stencil.
        """
        p = np.asarray(p, dtype=float)
        G = self.metric_at(p)
        dG = jacobian(self.metric_at, p, h, order)  # dG[..., a, b, c] = d_c G_ab
        first = 0.5 * (
            np.einsum("...dcb->...dbc", dG)
            + np.einsum("...dbc->...dbc", dG)
            - np.einsum("...bcd->...dbc", dG)
        )
        # first[d, b, c] = 1/2 (d_b G_dc + d_c G_db - d_d G_bc)
        return np.einsum("...ad,...dbc->...abc", np.linalg.inv(G), first)

    # -- curvature -------------------------------------------------------

    def curvature_frame(self, X, Y, Z, W):
        """<R(X,Y)Z, W> for frame-component vectors (closed form)."""
        X, Y, Z, W = (np.asarray(a, dtype=float) for a in (X, Y, Z, W))

        def dot(a, b):
            return np.sum(a * b, axis=-1)

        r0 = dot(X, Z) * dot(Y, W) - dot(Y, Z) * dot(X, W)
        xv, yv, zv, wv = X[..., 2], Y[..., 2], Z[..., 2], W[..., 2]
        r1 = yv * zv * dot(X, W) + dot(Y, Z) * xv * wv - dot(X, Z) * yv * wv - xv * zv * dot(Y, W)
        return (self.kappa - 3.0 * self.tau**2) * r0 + self.aniso * r1


def frame_christoffels_koszul(m, p, h=1e-4):
    """Frame Christoffel symbols from finite-difference brackets (any tau)."""
    p = np.asarray(p, dtype=float)
    B = m.canonical_frame_at(p)
    DB = jacobian(m.canonical_frame_at, p, h)  # DB[..., a, col, c] = d_c B[a, col]
    dEj_along_Ei = np.einsum("...ci,...ajc->...aij", B, DB)
    bracket = dEj_along_Ei - np.swapaxes(dEj_along_Ei, -1, -2)
    C = np.einsum("...ka,...aij->...kij", m.frame_inverse(p), bracket)  # [E_i,E_j] = C[k,i,j] E_k
    return 0.5 * (C - np.einsum("...ijk->...kij", C) + np.einsum("...jki->...kij", C))


def frame_brackets(m, p, h=1e-4):
    """Structure constants C[k, i, j] with [E_i, E_j] = sum_k C[k, i, j] E_k."""
    p = np.asarray(p, dtype=float)
    B = m.canonical_frame_at(p)
    DB = jacobian(m.canonical_frame_at, p, h)
    d = np.einsum("...ci,...ajc->...aij", B, DB)
    return np.einsum("...ka,...aij->...kij", m.frame_inverse(p), d - np.swapaxes(d, -1, -2))


# free-function forms; each takes the model first
metric_at = ModelSpace.metric_at
canonical_frame_at = ModelSpace.canonical_frame_at
frame_christoffels = ModelSpace.frame_christoffels
coordinate_christoffels = ModelSpace.coordinate_christoffels


@dataclass(frozen=True)
class AmbientVector:
    """Tangent vector at ``point`` with components in a tagged basis."""

    point: tuple
    comps: tuple
    basis: str = "coordinate"

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")
        object.__setattr__(self, "point", tuple(float(c) for c in self.point))
        object.__setattr__(self, "comps", tuple(float(c) for c in self.comps))

    @property
    def array(self):
        return np.array(self.comps)

    def _check_same(self, other):
        if self.point != other.point:
            raise ValueError("vectors live at different points")
        if self.basis != other.basis:
            raise ValueError(f"cannot mix {self.basis} and {other.basis} components")

    def __add__(self, other):
        self._check_same(other)
        return AmbientVector(self.point, self.array + other.array, self.basis)

    def __sub__(self, other):
        self._check_same(other)
        return AmbientVector(self.point, self.array - other.array, self.basis)

    def __mul__(self, s):
        return AmbientVector(self.point, float(s) * self.array, self.basis)

    __rmul__ = __mul__

    def to_frame(self, m):
        if self.basis == "frame":
            return self
        return AmbientVector(self.point, m.frame_inverse(self.point) @ self.array, "frame")

    def to_coordinate(self, m):
        if self.basis == "coordinate":
            return self
        return AmbientVector(self.point, m.canonical_frame_at(self.point) @ self.array, "coordinate")

    def in_basis(self, m, basis):
        return self.to_frame(m) if basis == "frame" else self.to_coordinate(m)


def frame_vector(p, i):
    """E_{i+1} at p, tagged in the frame basis."""
    e = np.zeros(3)
    e[i] = 1.0
    return AmbientVector(p, e, "frame")


def inner(m, p, X, Y):
    if X.point != tuple(map(float, p)) or Y.point != X.point:
        raise ValueError("vectors must be attached at p")
    return float(np.dot(X.to_frame(m).array, Y.to_frame(m).array))


def cross(m, p, X, Y):
    """Vector product defined by <X x Y, Z> = det(X, Y, Z) in the canonical frame.

    The result carries the basis tag of X.
    """
    if X.point != tuple(map(float, p)) or Y.point != X.point:
        raise ValueError("vectors must be attached at p")
    c = AmbientVector(X.point, np.cross(X.to_frame(m).array, Y.to_frame(m).array), "frame")
    return c.in_basis(m, X.basis)


def curvature_tensor(m, X, Y, Z, W):
    """<R(X,Y)Z, W> for four vectors at one point sharing a basis tag."""
    vecs = (X, Y, Z, W)
    if len({v.basis for v in vecs}) != 1:
        raise ValueError("curvature_tensor needs all four vectors in the same basis")
    if len({v.point for v in vecs}) != 1:
        raise ValueError("curvature_tensor needs all four vectors at the same point")
    f = [v.to_frame(m).array for v in vecs]
    return float(m.curvature_frame(*f))
