"""Command-line interface.

All reports are JSON on stdout; informational logs go to stderr and are
suppressed by --quiet.  Exit codes: 0 success, 2 validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import fixtures as fixtures_mod
from .core import (
    FrameworkError,
    NumericalError,
    framework_to_dict,
    parse_framework,
    serialize_framework,
)
from .deform import continue_path
from .lifting import classify_folds, export_terrain, lifting_from_stress
from .pseudotri import certify_ppt, find_rigidifying_edges, insert_edge_orbit
from .relax import Sublattice, relax, ultrarigidity_probe
from .rigidity import (
    count_identity_check,
    invariant_equilibrium_stress_space,
    periodic_stress_space,
)
from .topology import check_noncrossing, render_svg, trace_faces

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _load(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_framework(fh.read())
    except OSError as exc:
        raise FrameworkError("cannot read %s: %s" % (path, exc)) from None


def _save_framework(fw, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_framework(fw))
        fh.write("\n")


def _emit(report):
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _log(args, message):
    if not args.quiet:
        print(message, file=sys.stderr)


def _tiles(text):
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise FrameworkError("tile range must look like RxC, got %r" % text) from None


# -- subcommands -----------------------------------------------------------


def cmd_analyze(args):
    fw = _load(args.file)
    rep = count_identity_check(fw)
    noncrossing = check_noncrossing(fw)
    n_star = None
    euler = None
    if noncrossing.ok:
        fc = trace_faces(fw)
        n_star = fc.n_faces
        euler = fw.n - fw.m + n_star == 0
    _emit({
        "n": rep.n,
        "m": rep.m,
        "n_star": n_star,
        "sigma": rep.sigma,
        "delta": rep.delta,
        "phi": rep.phi,
        "noncrossing": noncrossing.ok,
        "euler_ok": euler,
        "stress_flex_identity": rep.stress_flex_identity,
        "stress_phi_identity": rep.stress_phi_identity,
    })
    return 0


def cmd_ppt(args):
    fw = _load(args.file)
    cert = certify_ppt(fw)
    _emit({
        "valid": cert.valid,
        "counts": {"n": cert.counts[0], "m": cert.counts[1], "n_star": cert.counts[2]},
        "pointed": cert.pointed,
        "pseudo_triangular": cert.pseudo_triangular,
        "stress_free": cert.stress_free,
        "flex_dim": cert.flex_dim,
        "failures": cert.failures,
    })
    return 0


def cmd_stress(args):
    fw = _load(args.file)
    periodic = periodic_stress_space(fw)
    invariant = invariant_equilibrium_stress_space(fw)
    _emit({
        "sigma": len(periodic),
        "invariant_equilibrium_dim": len(invariant),
        "periodic_basis": [[float(x) for x in s.values] for s in periodic],
        "invariant_basis": [
            {"values": [float(x) for x in s.values], "is_periodic": s.is_periodic}
            for s in invariant
        ],
    })
    return 0


def cmd_lift(args):
    fw = _load(args.file)
    fc = trace_faces(fw)
    basis = periodic_stress_space(fw)
    if not basis:
        raise FrameworkError("framework has no periodic stress (sigma = 0)")
    if not 0 <= args.stress_index < len(basis):
        raise FrameworkError(
            "stress index %d out of range [0, %d)" % (args.stress_index, len(basis)))
    s = basis[args.stress_index].values
    lift = lifting_from_stress(fw, fc, s, c0=args.c0)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(export_terrain(fw, fc, lift, _tiles(args.tiles)))
        _log(args, "wrote %s" % args.out)
    folds = classify_folds(fw, s)
    _emit({
        "stress_index": args.stress_index,
        "c0": args.c0,
        "normals": [[float(v) for v in row] for row in lift.normals],
        "offsets": [float(v) for v in lift.offsets],
        "stress": [float(v) for v in s],
        "folds": [f.fold for f in folds],
        "terrain": args.out,
    })
    return 0


def cmd_svg(args):
    fw = _load(args.file)
    fc = trace_faces(fw)
    svg = render_svg(fw, fc, _tiles(args.tiles))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    _log(args, "wrote %s" % args.out)
    _emit({"faces": fc.n_faces, "tiles": args.tiles, "out": args.out})
    return 0


def cmd_relax(args):
    fw = _load(args.file)
    try:
        entries = [int(x) for x in args.matrix.split(",")]
        if len(entries) != 4:
            raise ValueError
    except ValueError:
        raise FrameworkError(
            "--matrix expects four integers a,b,0,d (row-listed columns)") from None
    sub = Sublattice.from_matrix([[entries[0], entries[2]], [entries[1], entries[3]]])
    unfolded = relax(fw, sub)
    _save_framework(unfolded, args.out)
    _log(args, "wrote %s" % args.out)
    _emit({
        "sublattice": {"a": sub.a, "b": sub.b, "d": sub.d, "index": sub.index},
        "n": unfolded.n,
        "m": unfolded.m,
        "out": args.out,
    })
    return 0


def cmd_ultra(args):
    fw = _load(args.file)
    rep = ultrarigidity_probe(fw, args.max_index)
    _emit({
        "max_index": rep.max_index,
        "ultrarigid_up_to_bound": rep.ultrarigid,
        "note": "bounded falsifier: indices above max_index are not probed",
        "entries": [
            {"a": e.sublattice.a, "b": e.sublattice.b, "d": e.sublattice.d,
             "index": e.sublattice.index, "phi": e.phi, "sigma": e.sigma}
            for e in rep.entries
        ],
        "first_failure": None if rep.first_failure is None else {
            "a": rep.first_failure.sublattice.a,
            "b": rep.first_failure.sublattice.b,
            "d": rep.first_failure.sublattice.d,
            "phi": rep.first_failure.phi,
        },
    })
    return 0


def cmd_rigidify(args):
    fw = _load(args.file)
    cands = find_rigidifying_edges(fw, cutoff=args.cutoff)
    top = cands[0]
    new_fw = insert_edge_orbit(fw, top)
    if args.out:
        _save_framework(new_fw, args.out)
        _log(args, "wrote %s" % args.out)
    _emit({
        "inserted": {"tail": top.tail, "head": top.head, "shift": list(top.shift),
                     "derivative": top.derivative},
        "candidates": [
            {"tail": c.tail, "head": c.head, "shift": list(c.shift),
             "derivative": c.derivative}
            for c in cands[:10]
        ],
        "out": args.out,
    })
    return 0


def cmd_deform(args):
    fw = _load(args.file)
    checks = [c.strip() for c in args.check.split(",") if c.strip()]
    unknown = set(checks) - {"expansive", "auxetic"}
    if unknown:
        raise FrameworkError("unknown checks: %s" % ", ".join(sorted(unknown)))
    path = continue_path(fw, steps=args.steps, ds=args.ds, cutoff=args.cutoff)
    samples = []
    for s in path.samples:
        rec = {
            "tau": s.tau,
            "lattice": [[float(v) for v in row] for row in s.configuration.lattice],
            "gram": [[float(v) for v in row] for row in s.gram],
            "gram_rate": None if s.gram_rate is None else
                [[float(v) for v in row] for row in s.gram_rate],
        }
        if "expansive" in checks:
            rec["expansive"] = s.expansive
        if "auxetic" in checks:
            rec["auxetic"] = s.auxetic
        samples.append(rec)
    report = {"termination": path.termination, "samples": samples}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
        _log(args, "wrote %s" % args.out)
    _emit({"termination": path.termination, "samples": len(samples), "out": args.out})
    return 0


def cmd_fixture(args):
    params = {}
    if args.theta is not None:
        params["theta"] = args.theta
    if args.alpha is not None:
        params["alpha"] = args.alpha
    if args.beta is not None:
        params["beta"] = args.beta
    fw = fixtures_mod.fixture(args.name, **params)
    if args.out:
        _save_framework(fw, args.out)
        _log(args, "wrote %s" % args.out)
        _emit({"name": args.name, "n": fw.n, "m": fw.m, "out": args.out})
    else:
        _emit(framework_to_dict(fw))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="perimax",
        description="Planar periodic framework analysis: rigidity, stresses, "
                    "liftings, pseudo-triangulations, relaxations and "
                    "deformation paths.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true",
                        help="suppress non-JSON logs on stderr")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=lambda **kw: argparse.ArgumentParser(
                                    parents=[common], **kw))

    p = sub.add_parser("analyze", help="counts, spectral dimensions and identities")
    p.add_argument("file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("ppt", help="pseudo-triangulation certificate")
    p.add_argument("file")
    p.set_defaults(func=cmd_ppt)

    p = sub.add_parser("stress", help="periodic and invariant equilibrium stress bases")
    p.add_argument("file")
    p.set_defaults(func=cmd_stress)

    p = sub.add_parser("lift", help="build a lifting from a periodic stress")
    p.add_argument("file")
    p.add_argument("--stress-index", type=int, default=0)
    p.add_argument("--c0", type=float, default=0.0)
    p.add_argument("--tiles", default="1x1")
    p.add_argument("--out", default=None, help="OBJ terrain output path")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("svg", help="render a patch with per-orbit face colors")
    p.add_argument("file")
    p.add_argument("--tiles", default="3x3")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_svg)

    p = sub.add_parser("relax", help="unfold to a finite-index sublattice")
    p.add_argument("file")
    p.add_argument("--matrix", required=True, help="a,b,0,d column entries")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("ultra", help="probe rigidity under all relaxations up to an index")
    p.add_argument("file")
    p.add_argument("--max-index", type=int, default=4)
    p.set_defaults(func=cmd_ultra)

    p = sub.add_parser("rigidify", help="insert the top rigidifying edge orbit")
    p.add_argument("file")
    p.add_argument("--cutoff", type=int, default=2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rigidify)

    p = sub.add_parser("deform", help="trace the one-parameter deformation path")
    p.add_argument("file")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--ds", type=float, default=1e-2)
    p.add_argument("--cutoff", type=int, default=2)
    p.add_argument("--check", default="expansive,auxetic")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("fixture", help="generate an example framework")
    p.add_argument("name", choices=sorted(fixtures_mod.FIXTURES))
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fixture)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FrameworkError as exc:
        _emit({"error": str(exc), "kind": "validation"})
        return EXIT_VALIDATION
    except NumericalError as exc:
        _emit({"error": str(exc), "kind": "numerical"})
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
