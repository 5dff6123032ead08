"""Command line front end.

Every subcommand reads a triangulation file and prints one JSON document on
standard output. Exit status: 0 success, 1 invalid input, 2 a consistency
check failed (a bug), 3 a numerical precondition failed, 64 bad usage.
"""
import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import angles, haken, linalg, nzform, thurston, volopt, z2taut
from .errors import InconsistencySentinel, Spine3Error, ValidationError
from .triangulation import load

EXIT_OK, EXIT_INVALID, EXIT_SENTINEL, EXIT_PRECONDITION, EXIT_USAGE = 0, 1, 2, 3, 64


def _encode(x):
    """JSON text with floats at 17 significant digits and rationals as "p/q"."""
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return json.dumps(linalg.fraction_str(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return "%.17g" % x
    if isinstance(x, (complex, np.complexfloating)):
        return _encode([float(x.real), float(x.imag)])
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in x.items()) + "}"
    if isinstance(x, np.ndarray):
        return _encode(x.tolist())
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in x) + "]"
    raise TypeError(f"cannot encode {type(x).__name__}")


def dumps(obj):
    return _encode(obj)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _frac_list(v):
    return [Fraction(x) for x in v]


def cmd_validate(tri, args):
    return tri.counts()


def cmd_report(tri, args):
    return {
        "counts": tri.counts(),
        "orientation": list(tri.orientation),
        "vertex_link_euler": list(tri.link_euler),
        "edge_degrees": [tri.edge_degree(e) for e in range(tri.num_edges)],
        "edge_endpoints": [list(p) for p in tri.edge_endpoints],
        "incidence": [list(r) for r in tri.incidence],
        "opposite_edge_pairs": [tri.opposite_edge_pairs(t) for t in range(tri.num_tets)],
        "normal_disk_types": {"triangles": tri.num_triangles, "quads": tri.num_quads},
    }


def cmd_tas(tri, args):
    tb = angles.tas_basis(tri)
    dc = angles.dimension_check(tri)
    return {
        "basis": [_frac_list(v) for v in tb.basis],
        "dim_tas": tb.dim,
        "chi": tri.euler_characteristic,
        "expected": dc["expected"],
        "match": dc["match"],
    }


def cmd_sas_init(tri, args):
    theta = angles.sas_init(tri)
    return {
        "theta": theta,
        "theta_over_pi": _frac_list(angles.sas_init_exact(tri)),
        "dim_tas": angles.tas_basis(tri).dim,
        "chi": tri.euler_characteristic,
        "residual": angles.sas_residual(tri, theta),
        "components": angles.num_components(tri),
    }


def _config(args):
    return volopt.MaximizeConfig(restarts=args.restarts, seed=args.seed, tol=args.tol, max_iter=args.max_iter)


def cmd_maximize(tri, args):
    rep = volopt.maximize(tri, config=_config(args))
    out = rep.to_dict()
    if args.emit_path:
        doc = {"trace": rep.trace}
        if rep.classification == "nonsmooth-critical" and rep.partially_flat_tets:
            doc["flattening"] = volopt.fg_flatten(tri, rep).to_dict()
        with open(args.emit_path, "w") as fh:
            fh.write(dumps(doc) + "\n")
    return out


def _solutions(tri, sols):
    return [haken.solution_to_dict(tri, s) for s in sols]


def cmd_extract(tri, args):
    if args.point:
        with open(args.point) as fh:
            theta = np.array(json.load(fh)["theta"], dtype=float)
        if not angles.is_sas(tri, theta):
            raise ValidationError("point is not an S^1-angle structure")
        rep = volopt.evaluate(tri, theta)
    else:
        rep = volopt.maximize(tri, config=_config(args))
    out = {"report": rep.to_dict()}
    if rep.classification == "non-critical":
        out["extraction"] = None
        return out
    ex = volopt.classify_and_extract(tri, rep)
    if ex["kind"] == "shapes":
        out["extraction"] = {
            "kind": "shapes",
            "z": list(ex["z"]),
            "strict": ex["strict"].to_dict(),
            "generalized": ex["generalized"].to_dict(),
            "extraction_mismatch": ex["extraction_mismatch"],
        }
    else:
        out["extraction"] = {
            "kind": "two_quad",
            "solutions": {str(q): _solutions(tri, s) for q, s in ex["solutions"].items()},
            "clusters": [
                {"tet": c["tet"], "distinct": c["distinct"], "solutions": _solutions(tri, c["solutions"])}
                for c in ex["clusters"]
            ],
        }
        if rep.partially_flat_tets:
            out["flattening"] = volopt.fg_flatten(tri, rep).to_dict()
    return out


def cmd_thurston_check(tri, args):
    with open(args.shapes) as fh:
        data = json.load(fh)
    try:
        z = np.array([complex(a, b) for a, b in data["z"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad shape file: {exc}") from None
    if len(z) != tri.num_quads:
        raise ValidationError(f"expected {tri.num_quads} shapes, got {len(z)}")
    out = {}
    if args.refine:
        res = thurston.newton_refine(tri, z, mode=args.mode)
        out["newton"] = {"iterations": res.iterations, "converged": res.converged, "flags": res.flags}
        z = res.z
        out["z"] = list(z)
    out.update(thurston.residuals(tri, z, args.mode).to_dict())
    sv = thurston.shape_volume(tri, z)
    out["volume"] = sv.volume
    out["in_W"] = sv.in_W
    return out


def _parse_two_quad(tri, text):
    try:
        t, k = (int(x) for x in text.split(":"))
    except ValueError:
        raise ValidationError(f"--two-quad expects <tet>:<type>, got {text!r}") from None
    if not (0 <= t < tri.num_tets and 0 <= k < 3):
        raise ValidationError(f"no quad {text!r}")
    return 3 * t + k


def cmd_haken(tri, args):
    out = {}
    if args.basis:
        b = haken.solution_bases(tri)
        out["Sns_basis"] = [_frac_list(v) for v in b.sns_basis]
        out["TAS_perp_basis"] = [_frac_list(v) for v in b.tas_perp_basis]
        out["duality_report"] = b.duality_report
    if args.two_quad:
        q = _parse_two_quad(tri, args.two_quad)
        out["two_quad"] = {"quad": q, "solutions": _solutions(tri, haken.two_quad_search(tri, q))}
    if args.clusters:
        out["clusters"] = [
            {"tet": c["tet"], "distinct": c["distinct"], "solutions": _solutions(tri, c["solutions"])}
            for c in haken.cluster_search(tri)
        ]
    if not out:
        out["duality_report"] = haken.solution_bases(tri).duality_report
    return out


def cmd_z2taut(tri, args):
    count_exact = True if args.count_exact else None
    return z2taut.enumerate_taut(tri, limit=args.limit, count_exact=count_exact).to_dict()


def cmd_nz_selftest(tri, args):
    rep = nzform.selftest(tri)
    if not rep.ok:
        print(dumps(rep.to_dict()))
        rep.raise_on_violation()
    return rep.to_dict()


COMMANDS = {
    "validate": (cmd_validate, "check a triangulation file and print V, E, F, T, chi"),
    "report": (cmd_report, "combinatorial summary: classes, degrees, incidence"),
    "tas": (cmd_tas, "exact basis of the tangential angle structures"),
    "sas-init": (cmd_sas_init, "an initial S^1-angle structure"),
    "maximize": (cmd_maximize, "maximise the volume over S^1-angle structures"),
    "extract": (cmd_extract, "shapes or 2-quad-type solutions at a critical point"),
    "thurston-check": (cmd_thurston_check, "residuals of Thurston's equations for given shapes"),
    "haken": (cmd_haken, "normal surface solution spaces and 2-quad-type solutions"),
    "z2taut": (cmd_z2taut, "enumerate Z/2-taut structures"),
    "nz-selftest": (cmd_nz_selftest, "check the Neumann-Zagier identities exactly"),
}


def _add_opt_flags(p):
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=5000)


def build_parser():
    parser = _Parser(prog="spine3", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("input", help="triangulation JSON file")
        p.add_argument("--seed", type=int, default=0)
        if name == "maximize":
            _add_opt_flags(p)
            p.add_argument("--emit-path", metavar="FILE", help="write the ascent trace and flattening path here")
        elif name == "extract":
            _add_opt_flags(p)
            p.add_argument("--point", metavar="FILE", help='JSON {"theta": [...]} to use instead of maximising')
        elif name == "thurston-check":
            p.add_argument("shapes", help='JSON {"z": [[re, im], ...]}')
            p.add_argument("--mode", choices=("strict", "generalized"), default="strict")
            p.add_argument("--refine", action="store_true")
        elif name == "haken":
            p.add_argument("--basis", action="store_true")
            p.add_argument("--two-quad", metavar="TET:TYPE")
            p.add_argument("--clusters", action="store_true")
        elif name == "z2taut":
            p.add_argument("--limit", type=int, default=None)
            p.add_argument("--count-exact", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        tri = load(args.input)
        out = func(tri, args)
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InconsistencySentinel as exc:
        print(f"consistency check failed: {exc}", file=sys.stderr)
        if exc.witnesses:
            print(f"witnesses: {exc.witnesses!r}", file=sys.stderr)
        return EXIT_SENTINEL
    except Spine3Error as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(dumps(out))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
