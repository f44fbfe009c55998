"""Finite-difference helpers shared by the geometry modules.

Two families live here.  ``partial`` and ``partial4`` differentiate a callable
at arbitrary points (used on analytic data, where we may evaluate off-grid).
The ``grid_*`` functions differentiate arrays sampled on a uniform grid.
"""

import numpy as np


def partial(func, x, axis, h):
    """Second-order central derivative of ``func`` along coordinate ``axis``.

    ``x`` has shape (..., d); ``func`` maps such arrays to arrays whose
    leading dimensions match ``x[..., 0]``.
    """
    x = np.asarray(x, dtype=float)
    step = np.zeros(x.shape[-1])
    step[axis] = h
    return (func(x + step) - func(x - step)) / (2.0 * h)


def partial4(func, x, axis, h):
    """Fourth-order central derivative, same calling convention as ``partial``."""
    x = np.asarray(x, dtype=float)
    step = np.zeros(x.shape[-1])
    step[axis] = h
    return (
        -func(x + 2 * step) + 8 * func(x + step) - 8 * func(x - step) + func(x - 2 * step)
    ) / (12.0 * h)


def jacobian(func, x, h, order=2):
    """Stack partial derivatives along a new trailing axis.

    Returns ``J[..., i] = d func / d x_i``; extra output dimensions of
    ``func`` sit between the batch and the derivative axis.
    """
    d = np.asarray(x).shape[-1]
    diff = partial4 if order == 4 else partial
    return np.stack([diff(func, x, i, h) for i in range(d)], axis=-1)


# Grid stencils.  Arrays are indexed [i, j, ...] with i along u, j along v.

def _shift(F, axis, k):
    """View of F offset by k along axis, trimmed to the interior ring."""
    n = F.shape[axis]
    sl = [slice(1, -1), slice(1, -1)]
    sl[axis] = slice(1 + k, n - 1 + k)
    return F[tuple(sl)]


def grid_d1(F, h, axis):
    """Central first derivative on the interior (shape loses one ring)."""
    return (_shift(F, axis, 1) - _shift(F, axis, -1)) / (2.0 * h)


def grid_d2(F, h, axis):
    return (_shift(F, axis, 1) - 2.0 * _shift(F, axis, 0) + _shift(F, axis, -1)) / h**2


def grid_d12(F, hu, hv):
    """Mixed second derivative d^2F/du dv on the interior."""
    pp = F[2:, 2:]
    pm = F[2:, :-2]
    mp = F[:-2, 2:]
    mm = F[:-2, :-2]
    return (pp - pm - mp + mm) / (4.0 * hu * hv)


def interior(F):
    return F[1:-1, 1:-1]


def grid_d1_full4(F, h, axis):
    """Fourth-order first derivative on the whole grid.

    Central five-point stencil inside, one-sided five-point stencils on the
    two outermost rows.  Needs at least 5 samples along ``axis``.
    """
    F = np.moveaxis(np.asarray(F, dtype=float), axis, 0)
    n = F.shape[0]
    if n < 5:
        if n < 2:
            return np.moveaxis(np.zeros_like(F), 0, axis)
        return np.moveaxis(np.gradient(F, h, axis=0, edge_order=1 if n < 3 else 2), 0, axis)
    D = np.empty_like(F)
    D[2:-2] = (-F[4:] + 8 * F[3:-1] - 8 * F[1:-3] + F[:-4]) / (12.0 * h)
    D[0] = (-25 * F[0] + 48 * F[1] - 36 * F[2] + 16 * F[3] - 3 * F[4]) / (12.0 * h)
    D[1] = (-3 * F[0] - 10 * F[1] + 18 * F[2] - 6 * F[3] + F[4]) / (12.0 * h)
    D[-1] = (25 * F[-1] - 48 * F[-2] + 36 * F[-3] - 16 * F[-4] + 3 * F[-5]) / (12.0 * h)
    D[-2] = (3 * F[-1] + 10 * F[-2] - 18 * F[-3] + 6 * F[-4] - F[-5]) / (12.0 * h)
    return np.moveaxis(D, 0, axis)
