"""Line-oriented text files: quadruple grids, sampled patches, reports, meshes.

Gridpoints are written with u varying fastest (one run of n_u rows per value
of v).  Numbers use 17 significant digits, which round-trips doubles.
"""

import numpy as np

from .ambient import ModelSpace
from .immersion import Grid, quadruple_from_gst

HEADER_KEYS = ("kappa", "tau", "nu", "nv", "u0", "u1", "v0", "v1")
QUAD_COLUMNS = ("u", "v", "g11", "g12", "g22", "S11", "S12", "S22", "T1", "T2", "nu")


def fmt(x):
    s = format(float(x), ".17g")
    return "0" if s == "-0" else s


def _header(tag, model, grid):
    vals = dict(kappa=model.kappa, tau=model.tau, nu=grid.nu, nv=grid.nv, u0=grid.u0, u1=grid.u1, v0=grid.v0, v1=grid.v1)
    parts = [f"{k}={v}" if k in ("nu", "nv") else f"{k}={fmt(v)}" for k, v in vals.items()]
    return f"#{tag} " + " ".join(parts)


def _rows(q):
    """Per-gridpoint quadruple columns, ordered with u fastest."""
    uv = q.grid.points()
    cols = [
        uv[..., 0], uv[..., 1],
        q.g[..., 0, 0], q.g[..., 0, 1], q.g[..., 1, 1],
        q.S[..., 0, 0], q.S[..., 0, 1], q.S[..., 1, 1],
        q.T[..., 0], q.T[..., 1], q.nu,
    ]
    data = np.stack(cols, -1)  # [i, j, c]
    return np.swapaxes(data, 0, 1).reshape(-1, len(cols))


def quadruple_text(q, tag="quadruple", extra=None):
    data = _rows(q)
    if extra is not None:
        data = np.concatenate([data, np.swapaxes(extra, 0, 1).reshape(len(data), -1)], axis=1)
    lines = [_header(tag, q.model, q.grid)]
    lines += [" ".join(fmt(x) for x in row) for row in data]
    return "\n".join(lines) + "\n"


def write_quadruple(path, q):
    with open(path, "w") as fh:
        fh.write(quadruple_text(q))


def write_patch(path, q, positions):
    """Quadruple rows followed by the chart coordinates x y z of each gridpoint."""
    with open(path, "w") as fh:
        fh.write(quadruple_text(q, "patch", np.asarray(positions)))


def _parse(text, tag):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(f"#{tag}"):
        raise ValueError(f"missing '#{tag}' header")
    fields = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
    missing = [k for k in HEADER_KEYS if k not in fields]
    if missing:
        raise ValueError(f"header lacks {', '.join(missing)}")
    model = ModelSpace(float(fields["kappa"]), float(fields["tau"]))
    grid = Grid(
        float(fields["u0"]), float(fields["u1"]), float(fields["v0"]), float(fields["v1"]),
        int(fields["nu"]), int(fields["nv"]),
    )
    data = np.array([[float(x) for x in ln.split()] for ln in lines[1:] if not ln.startswith("#")])
    if data.shape[0] != grid.nu * grid.nv:
        raise ValueError(f"expected {grid.nu * grid.nv} rows, found {data.shape[0]}")
    data = np.swapaxes(data.reshape(grid.nv, grid.nu, -1), 0, 1)
    return model, grid, data


def _quadruple_from_data(model, grid, data, label):
    g = np.empty(data.shape[:2] + (2, 2))
    g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1] = data[..., 2], data[..., 3], data[..., 3], data[..., 4]
    S = np.empty_like(g)
    S[..., 0, 0], S[..., 0, 1], S[..., 1, 0], S[..., 1, 1] = data[..., 5], data[..., 6], data[..., 6], data[..., 7]
    return quadruple_from_gst(model, grid, g, S, data[..., 8:10], data[..., 10], label=label)


def read_quadruple(path):
    with open(path) as fh:
        model, grid, data = _parse(fh.read(), "quadruple")
    if data.shape[-1] != len(QUAD_COLUMNS):
        raise ValueError(f"quadruple rows need {len(QUAD_COLUMNS)} columns, found {data.shape[-1]}")
    return _quadruple_from_data(model, grid, data, str(path))


def read_patch(path):
    """Returns (QuadrupleField, positions of shape (nu, nv, 3))."""
    with open(path) as fh:
        model, grid, data = _parse(fh.read(), "patch")
    if data.shape[-1] != len(QUAD_COLUMNS) + 3:
        raise ValueError(f"patch rows need {len(QUAD_COLUMNS) + 3} columns, found {data.shape[-1]}")
    return _quadruple_from_data(model, grid, data, str(path)), data[..., 11:14]


def write_report(path, report):
    with open(path, "w") as fh:
        fh.write(report.to_text())


def mesh_text(positions):
    """Wavefront-style mesh of a (nu, nv, 3) position grid, two triangles per cell."""
    P = np.asarray(positions, dtype=float)
    nu, nv = P.shape[:2]
    lines = ["v " + " ".join(fmt(c) for c in P[i, j]) for j in range(nv) for i in range(nu)]
    for j in range(nv - 1):
        for i in range(nu - 1):
            a = j * nu + i + 1
            b, c, d = a + 1, a + nu, a + nu + 1
            lines.append(f"f {a} {b} {c}")
            lines.append(f"f {b} {d} {c}")
    return "\n".join(lines) + "\n"


def write_mesh(path, positions):
    with open(path, "w") as fh:
        fh.write(mesh_text(positions))
