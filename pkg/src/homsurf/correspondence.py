"""Sister and twin correspondences on quadruple data, and the sign flip.

A sister pair lives in two model spaces with the same anisotropy
kappa - 4 tau^2.  The data transform by a rotation e^{theta J} of the tangent
plane, where theta is the phase taking tau1 + i H1 to tau2 + i H2.
"""

from dataclasses import dataclass

import numpy as np

from .immersion import J2, rotation2

NORM_TOL = 1e-9
ANISO_TOL = 1e-9
CONSTANT_H_TOL = 1e-6


@dataclass(frozen=True)
class Phase:
    theta: float
    tau1: float
    H1: float
    tau2: float
    H2: float

    def rotation(self):
        return rotation2(self.theta)

    @property
    def source(self):
        return complex(self.tau1, self.H1)

    @property
    def target(self):
        return complex(self.tau2, self.H2)

    def defect(self):
        """|target - e^{i theta} source|, zero for a consistent phase."""
        return abs(self.target - np.exp(1j * self.theta) * self.source)


def phase_angle(tau1, H1, tau2, H2):
    z1, z2 = complex(tau1, H1), complex(tau2, H2)
    if abs(z1) == 0.0:
        raise ValueError("the source pair (tau1, H1) is (0, 0); the phase is undefined")
    if abs(abs(z1) ** 2 - abs(z2) ** 2) > NORM_TOL:
        raise ValueError(
            f"tau1^2 + H1^2 = {abs(z1) ** 2:.12g} differs from tau2^2 + H2^2 = {abs(z2) ** 2:.12g}"
        )
    theta = float(np.angle(z2 / z1))
    if theta <= -np.pi:
        theta = np.pi
    return Phase(theta, float(tau1), float(H1), float(tau2), float(H2))


def constant_mean_curvature(q, tol=CONSTANT_H_TOL):
    """Grid mean of H, after checking that H is constant (stddev below tol)."""
    H = q.mean_curvature()
    spread = float(np.std(H))
    if spread >= tol:
        raise ValueError(f"mean curvature is not constant (stddev {spread:.3g} >= {tol:g})")
    return float(np.mean(H))


def sister(q, m1, m2, H2_sign=1, h_tol=CONSTANT_H_TOL):
    """Sister quadruple of q (in m1) inside m2.

    Returns (q2, phase).  g and nu are kept, T turns by the phase, and S keeps
    its traceless part up to the same rotation with the mean curvature reset to H2.
    """
    if H2_sign not in (1, -1):
        raise ValueError("H2_sign must be +1 or -1")
    if abs(m1.aniso - m2.aniso) > ANISO_TOL:
        raise ValueError(
            f"anisotropy mismatch: kappa1 - 4 tau1^2 = {m1.aniso:g} but kappa2 - 4 tau2^2 = {m2.aniso:g}"
        )
    H1 = constant_mean_curvature(q, h_tol)
    r = m1.tau**2 + H1**2 - m2.tau**2
    if r < -NORM_TOL:
        raise ValueError(f"no real H2: tau1^2 + H1^2 - tau2^2 = {r:.6g} < 0")
    H2 = H2_sign * np.sqrt(max(r, 0.0))
    phase = phase_angle(m1.tau, H1, m2.tau, H2)
    R = phase.rotation()
    I = np.eye(2)
    Hx = q.mean_curvature()[..., None, None]
    S2 = R @ (q.S - Hx * I) + H2 * I
    S2 = 0.5 * (S2 + np.swapaxes(S2, -1, -2))
    T2 = q.T @ R.T
    q2 = q.replace(model=m2, S=S2, T=T2, label=f"sister({q.label})")
    return q2, phase


def twin(q, m=None, H=None):
    """Twin quadruple in the same space: mean curvature H becomes -H.

    H defaults to the (checked constant) mean curvature of q.
    """
    m = m or q.model
    if m.tau == 0.0:
        raise ValueError("twin immersions need tau != 0")
    if H is None:
        H = constant_mean_curvature(q)
    if H == 0.0:
        raise ValueError("twin immersions need H != 0")
    theta = -2.0 * np.arctan(H / m.tau)
    phase = Phase(float(theta), m.tau, float(H), m.tau, -float(H))
    R = phase.rotation()
    I = np.eye(2)
    S2 = R @ (q.S - H * I) - H * I
    S2 = 0.5 * (S2 + np.swapaxes(S2, -1, -2))
    T2 = q.T @ R.T
    return q.replace(model=m, S=S2, T=T2, label=f"twin({q.label})"), phase


def twin_shape_alternative(S, tau, H):
    """The second printed form e^{theta J}(S - tau J) + tau J of the twin shape operator."""
    R = rotation2(-2.0 * np.arctan(H / tau))
    return R @ (S - tau * J2) + tau * J2


def sign_flip(q):
    """(g, S, T, nu) -> (g, S, -T, -nu)."""
    return q.replace(T=-q.T, nu=-q.nu, label=f"flip({q.label})")
