"""Immersions from compatible quadruple data, by integrating moving frames.

The unknowns are A in SO(3), whose columns are (df(e1), df(e2), N) in
canonical-frame components, and the position f in the model chart.  Along
any parameter direction d they obey

    A^{-1} dA(d) = Omega(d) + L(A)(d),      df(d) = B(f) A (omega^1(d), omega^2(d), 0),

where Omega is the connection matrix of the quadruple and L(A) carries the
frame Christoffel symbols of the ambient space.  Each grid edge is covered
by RK4 with a few substeps and A is pushed back onto SO(3) afterwards.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .ambient import ChartDomainError
from .compatibility import rotation_form, verify
from .immersion import SurfacePatch
from .numerics import grid_d1, grid_d1_full4, interior

SUBSTEPS = 4
A0_TOL = 1e-9
ORTHO_TOL = 1e-6


class IncompatibleDataError(ValueError):
    pass


@dataclass
class ConnectionForms:
    """Omega(e_k) for k = 1, 2 at every gridpoint.

    ``Omega[..., k, :, :]`` is the antisymmetric matrix Omega(e_{k+1});
    ``coframe[..., k, a]`` is omega^{k+1}(d_a).
    """

    w: np.ndarray
    Omega: np.ndarray
    coframe: np.ndarray

    def along(self, axis):
        """Omega(d_u) (axis 0) or Omega(d_v) (axis 1)."""
        return np.einsum("...k,...kab->...ab", self.coframe[..., :, axis], self.Omega)


def connection_forms(q):
    """Connection matrix of the quadruple, with omega^2_1 from the Levi-Civita connection of g."""
    w = rotation_form(q, full=True)
    Om = np.zeros(q.S.shape[:-2] + (2, 3, 3))
    for k in range(2):
        Om[..., k, 1, 0] = w[..., k]
        Om[..., k, 0, 1] = -w[..., k]
        Om[..., k, 2, :2] = q.S[..., :, k]
        Om[..., k, :2, 2] = -q.S[..., :, k]
    return ConnectionForms(w, Om, q.coframe())


# -- the L term --------------------------------------------------------------


def _check_orthogonal(Z):
    d = np.max(np.abs(np.swapaxes(Z, -1, -2) @ Z - np.eye(3)))
    if d > ORTHO_TOL:
        raise ValueError(f"Z is not orthogonal (|Z^T Z - I| = {d:.3g})")


def L_general(m, Z, p=None, h_amb=1e-4):
    """L(Z)(e_k) for k = 1, 2 from the frame Christoffel symbols; shape (..., 2, 3, 3).

    L(Z)^a_b(e_k) = sum Z^e_a Z^g_k Z^d_b Gamma^d_{g e}, with the symbol
    convention of ``ModelSpace.frame_christoffels``.  For tau = 0 the point
    ``p`` is required.
    """
    Z = np.asarray(Z, dtype=float)
    _check_orthogonal(Z)
    gam = m.frame_christoffels(p, h_amb)
    return np.einsum("...ea,...gk,...db,...dge->...kab", Z, Z[..., :, :2], Z, gam)


def L_closed(m, Z):
    """Closed form (2 tau - sigma) T^k M(T) + P_k, with T the last row of Z (tau != 0)."""
    Z = np.asarray(Z, dtype=float)
    _check_orthogonal(Z)
    t = m.tau
    c = 2.0 * t - m.sigma
    T = Z[..., 2, :]
    M = np.zeros(T.shape[:-1] + (3, 3))
    M[..., 0, 1], M[..., 0, 2] = -T[..., 2], T[..., 1]
    M[..., 1, 0], M[..., 1, 2] = T[..., 2], -T[..., 0]
    M[..., 2, 0], M[..., 2, 1] = -T[..., 1], T[..., 0]
    P = np.zeros((2, 3, 3))
    P[0, 1, 2], P[0, 2, 1] = t, -t
    P[1, 0, 2], P[1, 2, 0] = -t, t
    return c * T[..., :2, None, None] * M[..., None, :, :] + P


def _L_along(m, A, vg, f, h_amb):
    """L(A)(d) for a tangent direction with frame components vg = A[:, :2] omega(d)."""
    gam = m.frame_christoffels(f, h_amb)
    return np.einsum("...ea,...g,...db,...dge->...ab", A, vg, A, gam)


# -- SO(3) helpers -----------------------------------------------------------


def project_so3(A):
    """Orthogonal polar factor A (A^T A)^{-1/2}."""
    w, V = np.linalg.eigh(np.swapaxes(A, -1, -2) @ A)
    inv_sqrt = (V / np.sqrt(w)[..., None, :]) @ np.swapaxes(V, -1, -2)
    return A @ inv_sqrt


def complete_A0(T1, T2, nu):
    """Rotation with last row (T1, T2, nu); the remaining freedom is fixed by a seed vector."""
    r = np.array([T1, T2, nu], dtype=float)
    norm = np.linalg.norm(r)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"(T1, T2, nu) must be a unit vector, got norm {norm:.9g}")
    r = r / norm
    seed = np.array([1.0, 0.0, 0.0])
    if abs(seed @ r) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    a = seed - (seed @ r) * r
    a /= np.linalg.norm(a)
    b = np.cross(r, a)
    return np.array([a, b, r])


def initial_frame(q, i=0, j=0):
    return complete_A0(q.T[i, j, 0], q.T[i, j, 1], q.nu[i, j])


def check_A0(q, A0, i=0, j=0):
    A0 = np.asarray(A0, dtype=float)
    if A0.shape != (3, 3):
        raise ValueError("A0 must be a 3x3 matrix")
    ortho = np.max(np.abs(A0.T @ A0 - np.eye(3)))
    if ortho > A0_TOL or np.linalg.det(A0) < 0:
        raise ValueError(f"A0 is not in SO(3) (|A^T A - I| = {ortho:.3g}, det = {np.linalg.det(A0):.6g})")
    target = np.array([q.T[i, j, 0], q.T[i, j, 1], q.nu[i, j]])
    off = np.max(np.abs(A0[2] - target))
    if off > A0_TOL:
        raise ValueError(f"last row of A0 must equal (T1, T2, nu) at the start point; off by {off:.3g}")


# -- line integrator ---------------------------------------------------------


@dataclass
class FrameState:
    A: np.ndarray
    f: np.ndarray


class _Lines:
    """Coefficient fields sampled along a batch of parallel grid lines.

    ``Om`` is Omega(d) and ``cof`` is (omega^1(d), omega^2(d)) with d the
    derivative along the lines; both are cubic-spline interpolated in s.
    """

    def __init__(self, s, Om, cof):
        self.s = s
        if len(s) >= 4:
            self.Om = CubicSpline(s, Om, axis=1)
            self.cof = CubicSpline(s, cof, axis=1)
        else:
            self.Om = _Linear(s, Om)
            self.cof = _Linear(s, cof)


class _Linear:
    def __init__(self, s, y):
        self.s, self.y = s, y

    def __call__(self, x):
        i = int(np.clip(np.searchsorted(self.s, x) - 1, 0, len(self.s) - 2))
        t = (x - self.s[i]) / (self.s[i + 1] - self.s[i])
        return (1 - t) * self.y[:, i] + t * self.y[:, i + 1]


def _rhs(m, lines, s, A, f, h_amb):
    Om = lines.Om(s)
    cof = lines.cof(s)
    vg = np.einsum("...ak,...k->...a", A[..., :, :2], cof)
    dA = A @ (Om + _L_along(m, A, vg, f, h_amb))
    df = np.einsum("...ab,...b->...a", m.canonical_frame_at(f), vg)
    return dA, df


def _integrate_lines(m, lines, start, stop, A, f, h_amb=1e-4, substeps=SUBSTEPS, where=None):
    """Integrate from index ``start`` to ``stop`` along every line at once.

    Returns arrays of A and f at each visited index (start included) and the
    largest orthogonality defect seen before re-projection.
    """
    step = 1 if stop >= start else -1
    idx = list(range(start, stop + step, step))
    As, fs = [A], [f]
    drift = 0.0
    for a, b in zip(idx[:-1], idx[1:]):
        s0, s1 = lines.s[a], lines.s[b]
        h = (s1 - s0) / substeps
        try:
            for n in range(substeps):
                s = s0 + n * h
                k1 = _rhs(m, lines, s, A, f, h_amb)
                k2 = _rhs(m, lines, s + h / 2, A + h / 2 * k1[0], f + h / 2 * k1[1], h_amb)
                k3 = _rhs(m, lines, s + h / 2, A + h / 2 * k2[0], f + h / 2 * k2[1], h_amb)
                k4 = _rhs(m, lines, s + h, A + h * k3[0], f + h * k3[1], h_amb)
                A = A + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
                f = f + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            m.check_domain(f)
        except ChartDomainError as exc:
            last = where(a) if where else a
            raise ChartDomainError(f"integration left the chart after gridpoint {last}: {exc}") from None
        drift = max(drift, float(np.max(np.abs(np.swapaxes(A, -1, -2) @ A - np.eye(3)))))
        A = project_so3(A)
        As.append(A)
        fs.append(f)
    return np.stack(As, axis=1), np.stack(fs, axis=1), drift


def _line_data(q, forms, axis):
    """Omega(d) and omega(d) for d = d_u (axis 0) or d_v (axis 1), lines first."""
    Om = forms.along(axis)
    cof = forms.coframe[..., :, axis]
    if axis == 0:
        # lines of constant v: [j, i, ...]
        return np.swapaxes(Om, 0, 1), np.swapaxes(cof, 0, 1), q.grid.u
    return Om, cof, q.grid.v


@dataclass
class FrameField:
    A: np.ndarray
    f: np.ndarray
    drift: float
    start: tuple

    def last_row_defect(self, q):
        target = np.concatenate([q.T, q.nu[..., None]], axis=-1)
        return float(np.max(np.abs(self.A[..., 2, :] - target)))

    def orthogonality(self):
        return float(np.max(np.abs(np.swapaxes(self.A, -1, -2) @ self.A - np.eye(3))))


def _prepare(q, m, A0, x0, start, check, tol):
    m = m or q.model
    i0, j0 = start
    if not (0 <= i0 < q.grid.nu and 0 <= j0 < q.grid.nv):
        raise IndexError(f"start gridpoint {start} outside the {q.grid.nu}x{q.grid.nv} grid")
    if check:
        report = verify(q, m, tol)
        if not report.passed:
            raise IncompatibleDataError(
                f"quadruple fails the compatibility equations for {m.label()} "
                f"(max residual {report.max_residual:.3g} >= tol {report.tol:.3g})"
            )
    A0 = initial_frame(q, i0, j0) if A0 is None else np.asarray(A0, dtype=float)
    check_A0(q, A0, i0, j0)
    x0 = np.zeros(3) if x0 is None else np.asarray(x0, dtype=float)
    m.check_domain(x0)
    return m, A0, x0


def integrate_grid(q, m=None, A0=None, x0=None, start=(0, 0), check=True, tol=None, h_amb=1e-4):
    """Frames and positions on the whole grid.

    Sweep: along u on the starting row (both ways), then along v on every
    column at once.
    """
    m, A0, x0 = _prepare(q, m, A0, x0, start, check, tol)
    i0, j0 = start
    nu_, nv_ = q.grid.nu, q.grid.nv
    forms = connection_forms(q)
    A = np.empty((nu_, nv_, 3, 3))
    f = np.empty((nu_, nv_, 3))
    A[i0, j0], f[i0, j0] = A0, x0
    drift = 0.0

    Om, cof, s = _line_data(q, forms, 0)
    row = _Lines(s, Om[j0:j0 + 1], cof[j0:j0 + 1])
    for stop in (nu_ - 1, 0):
        As, fs, d = _integrate_lines(m, row, i0, stop, A0[None], x0[None], h_amb, where=lambda i: (i, j0))
        sl = slice(i0, stop + 1) if stop >= i0 else slice(i0, None if stop == 0 else stop - 1, -1)
        A[sl, j0], f[sl, j0] = As[0], fs[0]
        drift = max(drift, d)

    Om, cof, s = _line_data(q, forms, 1)
    cols = _Lines(s, Om, cof)
    for stop in (nv_ - 1, 0):
        As, fs, d = _integrate_lines(m, cols, j0, stop, A[:, j0], f[:, j0], h_amb, where=lambda j: ("*", j))
        sl = slice(j0, stop + 1) if stop >= j0 else slice(j0, None if stop == 0 else stop - 1, -1)
        A[:, sl], f[:, sl] = As, fs
        drift = max(drift, d)
    return FrameField(A, f, drift, start)


def integrate_frame(q, m=None, A0=None, x0=None, path=((0, 0),), check=True, tol=None, h_amb=1e-4):
    """FrameState at each gridpoint of ``path``, a list of 4-neighbour steps."""
    path = [tuple(int(c) for c in p) for p in path]
    if not path:
        raise ValueError("empty path")
    m, A, f = _prepare(q, m, A0, x0, path[0], check, tol)
    forms = connection_forms(q)
    states = [FrameState(A, f)]
    k = 0
    while k < len(path) - 1:
        (i, j), (i2, j2) = path[k], path[k + 1]
        if abs(i2 - i) + abs(j2 - j) != 1:
            raise ValueError(f"path step {path[k]} -> {path[k + 1]} is not between neighbouring gridpoints")
        axis = 0 if i2 != i else 1
        # extend over the straight run
        end = k + 1
        while end + 1 < len(path):
            a, b = path[end], path[end + 1]
            step = (b[0] - a[0], b[1] - a[1])
            if step != (i2 - i, j2 - j):
                break
            end += 1
        Om, cof, s = _line_data(q, forms, axis)
        line = j if axis == 0 else i
        lines = _Lines(s, Om[line:line + 1], cof[line:line + 1])
        a_idx, b_idx = (i, path[end][0]) if axis == 0 else (j, path[end][1])
        where = (lambda t: (t, j)) if axis == 0 else (lambda t: (i, t))
        As, fs, _ = _integrate_lines(m, lines, a_idx, b_idx, A[None], f[None], h_amb, where=where)
        for n in range(1, As.shape[1]):
            states.append(FrameState(As[0, n], fs[0, n]))
        A, f = As[0, -1], fs[0, -1]
        k = end
    return states


def holonomy(q, m=None, A0=None, x0=None, check=True, tol=None):
    """Frobenius distance between the frames reached at the far corner along the two boundary paths."""
    nu_, nv_ = q.grid.nu, q.grid.nv
    p1 = [(i, 0) for i in range(nu_)] + [(nu_ - 1, j) for j in range(1, nv_)]
    p2 = [(0, j) for j in range(nv_)] + [(i, nv_ - 1) for i in range(1, nu_)]
    a = integrate_frame(q, m, A0, x0, p1, check, tol)[-1]
    b = integrate_frame(q, m, A0, x0, p2, check=False)[-1]
    return float(np.linalg.norm(a.A - b.A)), float(np.linalg.norm(a.f - b.f))


def reconstruct(q, m=None, A0=None, x0=None, start=(0, 0), check=True, tol=None, return_frames=False):
    """Sampled patch realizing q in m (default: the quadruple's own model)."""
    m = m or q.model
    frames = integrate_grid(q, m, A0, x0, start, check, tol)
    patch = SurfacePatch.from_samples(m, q.grid, frames.f, name=f"reconstruct({q.label})")
    return (patch, frames) if return_frames else patch


def structure_curvature(q, forms=None):
    """(dOmega + Omega ^ Omega)(d_u, d_v) on the grid, via fourth-order differences."""
    forms = forms or connection_forms(q)
    Ou, Ov = forms.along(0), forms.along(1)
    return grid_d1_full4(Ov, q.grid.hu, 0) - grid_d1_full4(Ou, q.grid.hv, 1) + Ou @ Ov - Ov @ Ou


def structure_rhs(q, m=None):
    """Right-hand side of the structure equation for Omega, evaluated on (d_u, d_v)."""
    m = m or q.model
    T1, T2, T3 = q.T[..., 0], q.T[..., 1], q.nu
    vol = np.linalg.det(q.coframe())
    R = np.zeros(q.nu.shape + (3, 3))
    R[..., 0, 1] = m.tau**2
    R[..., 1, 0] = -m.tau**2
    M = np.zeros_like(R)
    M[..., 0, 1], M[..., 0, 2] = T3, -T2
    M[..., 1, 0], M[..., 1, 2] = -T3, T1
    M[..., 2, 0], M[..., 2, 1] = T2, -T1
    return (R + m.aniso * T3[..., None, None] * M) * vol[..., None, None]


def first_structure_residual(q):
    """(d omega^i + omega^i_p ^ omega^p)(d_u, d_v) for i = 1, 2 on the interior."""
    forms = connection_forms(q)
    co = forms.coframe  # [..., k, a] = omega^k(d_a)
    W = np.stack([forms.along(0)[..., :2, :2], forms.along(1)[..., :2, :2]], axis=-1)  # [..., i, p, a]
    d = grid_d1(co[..., 1], q.grid.hu, 0) - grid_d1(co[..., 0], q.grid.hv, 1)
    co, W = interior(co), interior(W)
    wedge = np.einsum("...ip,...p->...i", W[..., 0], co[..., 1]) - np.einsum("...ip,...p->...i", W[..., 1], co[..., 0])
    return d + wedge


def d_eta_residual(q, m=None):
    """d eta(d_u, d_v) + 2 tau nu (omega^1 ^ omega^2)(d_u, d_v) on the interior, eta = <T, .>."""
    m = m or q.model
    co = q.coframe()
    eta = np.einsum("...k,...ka->...a", q.T, co)
    d = grid_d1(eta[..., 1], q.grid.hu, 0) - grid_d1(eta[..., 0], q.grid.hv, 1)
    return d + 2 * m.tau * interior(q.nu * np.linalg.det(co))
