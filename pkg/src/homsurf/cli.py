"""Command-line front end.

    homsurf catalog list
    homsurf verify      --catalog tube --H 1 --grid 81x81
    homsurf sister      --catalog vertical-plane --target-kappa -1 --target-tau 0 --out s.quad
    homsurf twin        --catalog tube --H 1 --out t.quad --reconstruct --mesh t.obj
    homsurf reconstruct --quadruple s.quad --out s.patch --mesh s.obj
    homsurf export      --patch s.patch --out s.obj

A surface comes either from the catalog (its quadruple is extracted in the
catalog's own model space) or from a quadruple file.  --kappa/--tau name the
model the quadruple is interpreted in; they default to the source's model.
"""

import argparse
import sys

import numpy as np

from . import formats
from .ambient import ModelSpace
from .compatibility import verify
from .correspondence import sister, twin
from .immersion import CATALOG, Grid, catalog, fundamental_data
from .reconstruction import reconstruct

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_grid(text):
    try:
        a, b = text.lower().split("x")
        nu, nv = int(a), int(b)
    except ValueError:
        raise UsageError(f"grid must look like NxM, got {text!r}") from None
    if nu < 2 or nv < 2:
        raise UsageError("grid needs at least 2 points per direction")
    return nu, nv


def parse_point(text):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        vals = []
    if len(vals) != 3:
        raise UsageError(f"point must be x,y,z, got {text!r}")
    return np.array(vals)


def read_config(path):
    """``key = value`` lines; '#' starts a comment; keys may use - or _."""
    cfg = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k.replace("-", "_")] = v
    return cfg


def _add_source(p):
    p.add_argument("--catalog", help="catalog surface name")
    p.add_argument("--H", type=float, help="mean-curvature parameter of tube/sphere")
    p.add_argument("--quadruple", help="quadruple grid file")
    p.add_argument("--kappa", type=float, help="model kappa the data is interpreted in")
    p.add_argument("--tau", type=float, help="model tau the data is interpreted in")
    p.add_argument("--grid", default="41x41", help="NxM gridpoints in u and v (catalog sources)")
    for k in ("u0", "u1", "v0", "v1"):
        p.add_argument(f"--{k}", type=float, help="parameter rectangle (catalog sources)")
    p.add_argument("--h-amb", type=float, default=1e-4, help="ambient finite-difference step")
    p.add_argument("--tol", type=float, help="compatibility tolerance (default scales with the grid)")
    p.add_argument("--out", help="output path")
    p.add_argument("--config", help="key = value file; flags override it")


def build_parser():
    parser = _Parser(prog="homsurf", description="Surfaces in homogeneous 3-manifolds E(kappa, tau).")
    sub = parser.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="catalog utilities")
    cat.add_argument("action", choices=["list"])

    p = sub.add_parser("verify", help="check the compatibility equations")
    _add_source(p)

    for name, helptext in (("sister", "sister surface in another E(kappa, tau)"), ("twin", "twin surface in the same space")):
        p = sub.add_parser(name, help=helptext)
        _add_source(p)
        if name == "sister":
            p.add_argument("--target-kappa", type=float, help="kappa of the target space")
            p.add_argument("--target-tau", type=float, help="tau of the target space")
            p.add_argument("--h2-sign", type=int, default=1, choices=[1, -1], help="sign of H2")
        p.add_argument("--reconstruct", action="store_true", help="also integrate and write a mesh")
        p.add_argument("--mesh", help="mesh path for --reconstruct (default <out>.obj)")
        p.add_argument("--x0", default="0,0,0", help="starting point x,y,z")

    p = sub.add_parser("reconstruct", help="integrate a quadruple into a sampled patch")
    _add_source(p)
    p.add_argument("--mesh", help="also write a mesh here")
    p.add_argument("--x0", default="0,0,0", help="starting point x,y,z")

    p = sub.add_parser("export", help="write a mesh")
    _add_source(p)
    p.add_argument("--patch", help="sampled patch file")
    p.add_argument("--x0", default="0,0,0", help="starting point x,y,z (quadruple sources)")
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        flags = []
        for k, v in cfg.items():
            action = next(a for a in sub._actions if a.dest == k)
            if action.nargs == 0:
                if v.lower() in ("1", "true", "yes", "on"):
                    flags.append(action.option_strings[0])
            else:
                flags += [action.option_strings[0], v]
        # file first, command line second, so flags win
        args = parser.parse_args([args.command] + flags + list(argv[1:]))
    return args


# -- helpers -----------------------------------------------------------------


def load_source(args):
    """(patch or None, quadruple, model) for the chosen surface source."""
    if bool(args.catalog) == bool(args.quadruple):
        raise UsageError("give exactly one of --catalog or --quadruple")
    if args.catalog:
        params = {} if args.H is None else {"H": args.H}
        patch = catalog(args.catalog, **params)
        nu, nv = parse_grid(args.grid)
        rect = [getattr(args, k) for k in ("u0", "u1", "v0", "v1")]
        rect = [d if r is None else r for r, d in zip(rect, patch.rect)]
        q = fundamental_data(patch, Grid(*rect, nu, nv), h_amb=args.h_amb)
    else:
        patch = None
        q = formats.read_quadruple(args.quadruple)
    kappa = q.model.kappa if args.kappa is None else args.kappa
    tau = q.model.tau if args.tau is None else args.tau
    m = ModelSpace(kappa, tau)
    return patch, q.replace(model=m), m


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _mesh_and_patch(q, m, args, mesh_path, patch_path=None):
    patch, frames = reconstruct(q, m, x0=parse_point(args.x0), tol=args.tol, return_frames=True)
    if patch_path:
        formats.write_patch(patch_path, q, frames.f)
    if mesh_path:
        formats.write_mesh(mesh_path, frames.f)
    return frames


# -- subcommands -------------------------------------------------------------


def cmd_catalog(args):
    for name, (_, desc) in CATALOG.items():
        p = catalog(name)
        m = p.model
        print(f"{name:20s} kappa={m.kappa:g} tau={m.tau:g} rect={list(p.rect)}  {desc}")
    return EXIT_OK


def cmd_verify(args):
    _, q, m = load_source(args)
    report = verify(q, m, args.tol)
    text = report.to_text()
    if args.out:
        formats.write_report(args.out, report)
    sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def _finish_transform(q2, phase, args):
    print(f"phase theta={formats.fmt(phase.theta)} tau1={formats.fmt(phase.tau1)} H1={formats.fmt(phase.H1)} "
          f"tau2={formats.fmt(phase.tau2)} H2={formats.fmt(phase.H2)}")
    if args.out:
        formats.write_quadruple(args.out, q2)
    if args.reconstruct:
        mesh = args.mesh or ((args.out or "reconstructed") + ".obj")
        _mesh_and_patch(q2, q2.model, args, mesh)
    return EXIT_OK


def cmd_sister(args):
    _, q, m1 = load_source(args)
    if args.target_kappa is None or args.target_tau is None:
        raise UsageError("sister needs --target-kappa and --target-tau")
    m2 = ModelSpace(args.target_kappa, args.target_tau)
    q2, phase = sister(q, m1, m2, args.h2_sign)
    return _finish_transform(q2, phase, args)


def cmd_twin(args):
    _, q, m = load_source(args)
    q2, phase = twin(q, m)
    return _finish_transform(q2, phase, args)


def cmd_reconstruct(args):
    _, q, m = load_source(args)
    if not args.out and not args.mesh:
        raise UsageError("reconstruct needs --out (patch file) and/or --mesh")
    _mesh_and_patch(q, m, args, args.mesh, args.out)
    return EXIT_OK


def cmd_export(args):
    if args.patch:
        if args.catalog or args.quadruple:
            raise UsageError("give only one of --patch, --catalog, --quadruple")
        _, positions = formats.read_patch(args.patch)
    else:
        patch, q, m = load_source(args)
        if patch is not None:
            positions = patch.point(q.grid.points())
        else:
            positions = reconstruct(q, m, x0=parse_point(args.x0), tol=args.tol, return_frames=True)[1].f
    _emit(formats.mesh_text(positions), args.out)
    return EXIT_OK


COMMANDS = {
    "catalog": cmd_catalog,
    "verify": cmd_verify,
    "sister": cmd_sister,
    "twin": cmd_twin,
    "reconstruct": cmd_reconstruct,
    "export": cmd_export,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
    except (ValueError, KeyError, OSError, IndexError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
