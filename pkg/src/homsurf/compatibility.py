"""Residuals of the four compatibility equations for a quadruple field.

All derivatives are second-order central differences on the grid, so every
residual lives on the interior (the outermost ring of gridpoints is dropped).
"""

from dataclasses import dataclass, field

import numpy as np

from .immersion import J2
from .numerics import grid_d1, grid_d1_full4, grid_d2, grid_d12, interior

EQUATIONS = ("gauss", "codazzi", "killing_T", "killing_nu", "unit_norm")

REFERENCE_TOL = 1e-4
REFERENCE_INTERVALS = 80


def _check_grid(q):
    if q.grid.nu < 3 or q.grid.nv < 3:
        raise ValueError("compatibility residuals need at least a 3x3 grid")


def _derivs(F, q, full=False):
    """(d_u F, d_v F): second order on the interior, or fourth order on the full grid."""
    if full:
        return grid_d1_full4(F, q.grid.hu, 0), grid_d1_full4(F, q.grid.hv, 1)
    return grid_d1(F, q.grid.hu, 0), grid_d1(F, q.grid.hv, 1)


def _crop(F, full):
    return F if full else interior(F)


def gauss_curvature(q):
    """Gauss curvature of g on the interior, Brioschi formula."""
    _check_grid(q)
    hu, hv = q.grid.hu, q.grid.hv
    E, F, G = q.g[..., 0, 0], q.g[..., 0, 1], q.g[..., 1, 1]
    Eu, Ev = _derivs(E, q)
    Fu, Fv = _derivs(F, q)
    Gu, Gv = _derivs(G, q)
    Evv = grid_d2(E, hv, 1)
    Guu = grid_d2(G, hu, 0)
    Fuv = grid_d12(F, hu, hv)
    E, F, G = interior(E), interior(F), interior(G)
    a = -0.5 * Evv + Fuv - 0.5 * Guu
    M1 = np.stack(
        [
            np.stack([a, 0.5 * Eu, Fu - 0.5 * Ev], -1),
            np.stack([Fv - 0.5 * Gu, E, F], -1),
            np.stack([0.5 * Gv, F, G], -1),
        ],
        -2,
    )
    z = np.zeros_like(E)
    M2 = np.stack(
        [
            np.stack([z, 0.5 * Ev, 0.5 * Gu], -1),
            np.stack([0.5 * Ev, E, F], -1),
            np.stack([0.5 * Gu, F, G], -1),
        ],
        -2,
    )
    return (np.linalg.det(M1) - np.linalg.det(M2)) / (E * G - F**2) ** 2


def metric_christoffels(q, full=False):
    """Christoffel symbols of g, Gam[..., c, a, b] = Gamma^c_ab.

    Interior only unless ``full``, which switches to fourth-order stencils.
    """
    dg = np.stack(_derivs(q.g, q, full), axis=-1)  # dg[..., a, b, c] = d_c g_ab
    first = 0.5 * (
        np.einsum("...dac->...dac", dg)
        + np.einsum("...dca->...dac", dg)
        - np.einsum("...acd->...dac", dg)
    )
    return np.einsum("...cd,...dab->...cab", np.linalg.inv(_crop(q.g, full)), first)


def rotation_form(q, full=False):
    """w_k = omega^2_1(e_k) = g(nabla_{e_k} e_1, e_2), shape (..., 2).

    Evaluated as the antisymmetric part 1/2 (<nabla e1, e2> - <nabla e2, e1>),
    which makes the discrete value exactly invariant under a constant rotation
    of the frame.  Interior only unless ``full``.
    """
    E = _crop(q.frame, full)
    g = _crop(q.g, full)
    dE = np.stack(_derivs(q.frame, q, full), axis=-1)  # dE[..., c, i, a] = d_a E[c, i]
    Gam = metric_christoffels(q, full)
    # nabla_{e_k} e_i in parameter components: cov[..., c, i, k]
    cov = np.einsum("...cia,...ak->...cik", dE, E) + np.einsum("...cab,...ak,...bi->...cik", Gam, E, E)
    a = np.einsum("...ck,...cd,...d->...k", cov[..., :, 0, :], g, E[..., :, 1])
    b = np.einsum("...ck,...cd,...d->...k", cov[..., :, 1, :], g, E[..., :, 0])
    return 0.5 * (a - b)


def _along_frame(F, q):
    """e_k(F) on the interior, derivative index appended last."""
    Fu, Fv = _derivs(F, q)
    E = interior(q.frame)
    extra = F.ndim - 2
    shape = E.shape[:2] + (1,) * extra
    return np.stack(
        [E[..., 0, k].reshape(shape) * Fu + E[..., 1, k].reshape(shape) * Fv for k in range(2)], axis=-1
    )


def _W(w):
    W = np.zeros(w.shape + (2, 2))
    W[..., 0, 1] = -w
    W[..., 1, 0] = w
    return W


def gauss_residual(q, m=None):
    m = m or q.model
    S = interior(q.S)
    nu = interior(q.nu)
    K = gauss_curvature(q)
    return K - np.linalg.det(S) - m.tau**2 - m.aniso * nu**2


def covariant_S(q):
    """(nabla_{e_k} S) in frame components, shape (..., 2, 2, k)."""
    w = rotation_form(q)
    dS = _along_frame(q.S, q)
    S = interior(q.S)
    out = np.empty(dS.shape)
    for k in range(2):
        W = _W(w[..., k])
        out[..., k] = dS[..., k] + W @ S - S @ W
    return out


def codazzi_residual(q, m=None):
    """(nabla_{e1} S) e2 - (nabla_{e2} S) e1 - aniso nu (T2, -T1), shape (..., 2)."""
    m = m or q.model
    DS = covariant_S(q)
    T = interior(q.T)
    nu = interior(q.nu)
    lhs = DS[..., :, 1, 0] - DS[..., :, 0, 1]
    rhs = m.aniso * nu[..., None] * np.stack([T[..., 1], -T[..., 0]], -1)
    return lhs - rhs


def killing_residuals(q, m=None):
    """Residuals of nabla_X T = nu (S X - tau J X) and dnu(X) + <S X - tau J X, T> = 0.

    Returns (RT, Rnu) with RT[..., :, k] for X = e_k and Rnu[..., k].
    """
    m = m or q.model
    w = rotation_form(q)
    dT = _along_frame(q.T, q)  # [..., j, k]
    dnu = _along_frame(q.nu, q)  # [..., k]
    T = interior(q.T)
    nu = interior(q.nu)
    SJ = interior(q.S) - m.tau * J2
    RT = np.empty(dT.shape)
    for k in range(2):
        covT = dT[..., k] + np.einsum("...ij,...j->...i", _W(w[..., k]), T)
        RT[..., k] = covT - nu[..., None] * SJ[..., :, k]
    Rnu = dnu + np.einsum("...jk,...j->...k", SJ, T)
    return RT, Rnu


def unit_norm_residual(q):
    return interior(q.unit_norm_defect())


def residual_fields(q, m=None):
    """Pointwise residual magnitudes on the interior, keyed by equation name."""
    m = m or q.model
    _check_grid(q)
    RT, Rnu = killing_residuals(q, m)
    return {
        "gauss": np.abs(gauss_residual(q, m)),
        "codazzi": np.linalg.norm(codazzi_residual(q, m), axis=-1),
        "killing_T": np.sqrt(np.sum(RT**2, axis=(-1, -2))),
        "killing_nu": np.linalg.norm(Rnu, axis=-1),
        "unit_norm": np.abs(unit_norm_residual(q)),
    }


def default_tol(grid):
    """1e-4 at 81x81, scaled with h^2 for other resolutions."""
    n = min(grid.nu, grid.nv) - 1
    return REFERENCE_TOL * (REFERENCE_INTERVALS / n) ** 2


@dataclass
class CompatReport:
    kappa: float
    tau: float
    hu: float
    hv: float
    tol: float
    fields: dict = field(default_factory=dict)

    def max(self, name):
        return float(np.max(self.fields[name])) if self.fields[name].size else 0.0

    def rms(self, name):
        f = self.fields[name]
        return float(np.sqrt(np.mean(f**2))) if f.size else 0.0

    @property
    def max_residual(self):
        return max(self.max(n) for n in EQUATIONS)

    @property
    def passed(self):
        return all(np.all(np.isfinite(self.fields[n])) for n in EQUATIONS) and self.max_residual < self.tol

    def summary(self):
        return {n: (self.max(n), self.rms(n)) for n in EQUATIONS}

    def to_text(self):
        lines = [f"# compatibility kappa={self.kappa:.17g} tau={self.tau:.17g} hu={self.hu:.17g} hv={self.hv:.17g}"]
        for n in EQUATIONS:
            lines.append(f"{n} {self.max(n):.17g} {self.rms(n):.17g}")
        lines.append(f"{'PASS' if self.passed else 'FAIL'} tol={self.tol:.17g}")
        return "\n".join(lines) + "\n"


def verify(q, m=None, tol=None):
    m = m or q.model
    tol = default_tol(q.grid) if tol is None else tol
    return CompatReport(m.kappa, m.tau, q.grid.hu, q.grid.hv, tol, residual_fields(q, m))
