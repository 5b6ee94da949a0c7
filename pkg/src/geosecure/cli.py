"""Command-line front end.

Exit codes: 0 success, 1 usage or input errors, 2 when an inequality that
must hold for the enumerated data comes back violated.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from fractions import Fraction

import numpy as np

from .analysis import (berger_bott_check, check_curve, fit_growth, mane_estimate)
from .blocking import BudgetExceededError, search_min_blocking, uniform_grid, verify_blocking_finite
from .core import Configuration, UnsupportedSpaceError, count_curve
from .flat_torus import LatticeTorus, as_fraction
from .hyperbolic import CapExceededError, DedupAmbiguityError, FuchsianSurface, non_blocking_certificate
from .report import read_curve_csv, write_manifest, write_report
from .spaces import SpaceFormatError, format_point, space_from_json, space_hash

log = logging.getLogger("geosecure")

EXIT_OK, EXIT_USAGE, EXIT_VIOLATED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(tmin, tmax, step) -> list[Fraction]:
    tmax, step = as_fraction(tmax), as_fraction(step)
    tmin = as_fraction(tmin) if tmin is not None else step
    if step <= 0 or tmin <= 0 or tmax < tmin:
        raise UsageError("need 0 < tmin <= tmax and step > 0")
    out, t = [], tmin
    while t <= tmax:
        out.append(t)
        t += step
    return out


def _num(space, T: Fraction):
    return T if getattr(space, "exact", False) else float(T)


def _load_points(space, arg) -> list:
    """Point list from a JSON file or literal: a list, {"points": [...]} or a grid description."""
    if arg is None:
        return []
    text = arg
    if not arg.lstrip().startswith(("[", "{")):
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    data = json.loads(text)
    if isinstance(data, dict) and data.get("grid") == "uniform":
        if not isinstance(space, LatticeTorus):
            raise UsageError("uniform candidate grids are defined on tori only")
        return uniform_grid(space, int(data["denominator"]))
    if isinstance(data, dict):
        data = data.get("points", data.get("blockers"))
    if not isinstance(data, list):
        raise UsageError("point files hold a list or {'points': [...]} ")
    return [space.point(p if isinstance(p, str) else tuple(p)) for p in data]


def _context(space, cfg=None) -> dict:
    ctx = {"space": space.describe(), "space_hash": space_hash(space)}
    if cfg is not None:
        ctx["configuration"] = {"x": format_point(cfg.x), "y": format_point(cfg.y)}
    return ctx


def _config(space, args) -> Configuration:
    if args.x is None or args.y is None:
        raise UsageError("--x and --y are required")
    return Configuration(space.point(args.x), space.point(args.y))


def _space(args):
    if args.space is None:
        raise UsageError("--space is required")
    space = space_from_json(args.space)
    if isinstance(space, FuchsianSurface) and args.tolerance is not None:
        space = FuchsianSurface(tol=args.tolerance)
    return space


# -- subcommands ----------------------------------------------------------------
def cmd_count(args):
    space = _space(args)
    cfg = _config(space, args)
    grid = _grid(args.tmin, args.tmax, args.step)
    curve = count_curve(space, cfg, [_num(space, t) for t in grid])
    curve.grid = grid  # report the exact grid values
    return curve, _context(space, cfg), space, EXIT_OK


def cmd_block_verify(args):
    space = _space(args)
    cfg = _config(space, args)
    B = _load_points(space, args.blockers)
    rep = verify_blocking_finite(space, cfg, B, _num(space, as_fraction(args.tmax)))
    return rep, _context(space, cfg), space, EXIT_OK


def cmd_block_search(args):
    space = _space(args)
    cfg = _config(space, args)
    C = _load_points(space, args.candidates)
    grid_desc = args.candidates if args.candidates and args.candidates.lstrip().startswith("{") else "explicit"
    x, y = cfg.x, cfg.y
    C = [c for c in C if not (space.same_point(c, x) or space.same_point(c, y))]
    bound = search_min_blocking(space, cfg, _num(space, as_fraction(args.tmax)), C, args.max_size,
                                grid=grid_desc)
    return bound, _context(space, cfg), space, EXIT_OK


def cmd_block_certify(args):
    space = _space(args)
    if not isinstance(space, LatticeTorus):
        raise UsageError("all-length certificates are available on flat tori only")
    cfg = _config(space, args)
    B = _load_points(space, args.blockers) if args.blockers else space.midpoint_blocking_set(cfg)
    cert = space.certify_blocking_all(cfg, B)
    return cert, _context(space, cfg), space, EXIT_OK


def cmd_insecure(args):
    space = _space(args)
    if not isinstance(space, FuchsianSurface):
        raise UsageError("counting certificates are implemented for the genus-2 surface")
    cfg = _config(space, args)
    Z = _load_points(space, args.blockers)
    grid = [float(t) for t in _grid(args.tmin, args.tmax, args.step)]
    tried, cert = [], None
    for T in grid:
        cert = non_blocking_certificate(space, cfg, Z, T)
        tried.append({"T": T, "lhs": cert.lhs, "rhs": cert.rhs, "verdict": cert.verdict})
        if cert.verdict == "violated":
            break
    out = cert.to_dict()
    out["scan"] = tried
    return out, _context(space, cfg), space, EXIT_OK


def cmd_fit(args):
    curve = read_curve_csv(args.curve)
    window = None
    if args.tmin is not None or args.tmax is not None:
        window = (float(as_fraction(args.tmin)) if args.tmin is not None else float(min(curve.grid)),
                  float(as_fraction(args.tmax)) if args.tmax is not None else float(max(curve.grid)))
    curve.grid = [float(t) for t in curve.grid]
    fit = fit_growth(curve, args.model, window)
    return fit, {"curve": str(args.curve)}, None, EXIT_OK


def cmd_entropy_mane(args):
    space = _space(args)
    grid = [float(t) for t in _grid(args.tmin, args.tmax, args.step)]
    fit = mane_estimate(space, args.samples, grid, args.seed)
    return fit, _context(space), space, EXIT_OK


def cmd_entropy_bb(args):
    space = _space(args)
    if args.x is not None:
        x = space.point(args.x)
    else:
        x = space.sample_point(np.random.default_rng(args.seed))
    chk = berger_bott_check(space, x, float(as_fraction(args.tmax)), args.samples, args.seed)
    ctx = _context(space)
    ctx["x"] = format_point(x)
    return chk, ctx, space, EXIT_OK if chk.satisfied else EXIT_VIOLATED


def cmd_check(args):
    curve = read_curve_csv(args.curve)
    params = {}
    if args.name == "mn":
        if args.space is not None:
            space = _space(args)
            if isinstance(space, LatticeTorus):
                params["delta_sq"] = space.injectivity_radius()
            else:
                params["delta"] = space.injectivity_radius_value()
        elif args.delta is not None:
            params["delta"] = float(as_fraction(args.delta))
        else:
            raise UsageError("mn check needs --space or --delta")
    elif args.name == "uniform-security":
        if args.delta is None or args.s is None:
            raise UsageError("uniform-security check needs --delta and --s")
        params.update(delta=float(as_fraction(args.delta)), s=args.s)
    elif args.name == "entropy-window":
        if args.h1 is None or args.h2 is None:
            raise UsageError("entropy-window check needs --h1 and --h2")
        params.update(h1=args.h1, h2=args.h2, T_min=args.window_min or 0.0)
    checks = check_curve(curve, args.name, **params)
    ok = all(c.satisfied for c in checks)
    out = {"check": args.name, "satisfied": ok, "results": [c.to_dict() for c in checks]}
    return out, {"curve": str(args.curve)}, None, EXIT_OK if ok else EXIT_VIOLATED


# -- parser ---------------------------------------------------------------------
def _common(p, space=True, config=False, t=False):
    if space:
        p.add_argument("--space", help="space JSON file, inline JSON, or 'genus2' / 'torus:n' / 'circle'")
    if config:
        p.add_argument("--x", help="first point (torus 'a,b', product 'left|right', genus2 anchor)")
        p.add_argument("--y", help="second point")
    if t:
        p.add_argument("--tmax", required=True, help="largest length")
        p.add_argument("--tmin", default=None, help="smallest length (default: step)")
        p.add_argument("--step", default="1", help="grid step")
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker cap (computation is single threaded)")
    p.add_argument("--tolerance", type=float, default=None, help="hyperbolic identification tolerance")
    p.add_argument("--z", help="extra point (unused by most commands)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="geosecure", description="Geodesic counting, blocking and entropy checks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("count", help="emit a T,n_T,m_T curve")
    _common(p, config=True, t=True)
    p.set_defaults(func=cmd_count)

    pb = sub.add_parser("block", help="blocking checks")
    bsub = pb.add_subparsers(dest="block_command", required=True, parser_class=_Parser)
    p = bsub.add_parser("verify", help="check a blocker set against all segments up to T")
    _common(p, config=True)
    p.add_argument("--blockers", required=True)
    p.add_argument("--tmax", required=True)
    p.set_defaults(func=cmd_block_verify)
    p = bsub.add_parser("search", help="exhaustive minimal blocking subset of a candidate grid")
    _common(p, config=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--max-size", type=int, default=4)
    p.add_argument("--tmax", required=True)
    p.set_defaults(func=cmd_block_search)
    p = bsub.add_parser("certify", help="all-length certificate on a flat torus")
    _common(p, config=True)
    p.add_argument("--blockers", default=None, help="defaults to the midpoint set")
    p.set_defaults(func=cmd_block_certify)

    p = sub.add_parser("insecure", help="counting refutation of candidate blockers")
    _common(p, config=True, t=True)
    p.add_argument("--blockers", default="[]")
    p.set_defaults(func=cmd_insecure)

    p = sub.add_parser("fit", help="growth fit of a curve CSV")
    _common(p, space=False)
    p.add_argument("--curve", required=True)
    p.add_argument("--model", choices=("polynomial", "exponential"), default="polynomial")
    p.add_argument("--tmin", default=None)
    p.add_argument("--tmax", default=None)
    p.set_defaults(func=cmd_fit)

    pe = sub.add_parser("entropy", help="entropy estimators")
    esub = pe.add_subparsers(dest="entropy_command", required=True, parser_class=_Parser)
    p = esub.add_parser("mane", help="growth of the averaged count")
    _common(p, t=True)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_entropy_mane)
    p = esub.add_parser("berger-bott", help="averaged count against the ball volume")
    _common(p, config=False)
    p.add_argument("--x", default=None)
    p.add_argument("--tmax", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_entropy_bb)

    p = sub.add_parser("check", help="run a named inequality over a curve CSV")
    _common(p)
    p.add_argument("--curve", required=True)
    p.add_argument("--name", required=True, choices=("mn", "uniform-security", "entropy-window"))
    p.add_argument("--delta", default=None)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--h1", type=float, default=None)
    p.add_argument("--h2", type=float, default=None)
    p.add_argument("--window-min", type=float, default=None)
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:          # --help and usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        result, ctx, space, code = args.func(args)
    except (UsageError, SpaceFormatError, UnsupportedSpaceError, CapExceededError,
            BudgetExceededError, DedupAmbiguityError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"geosecure: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        write_report(result, args.out, ctx if not hasattr(result, "rows") else None)
        tol = {"hyperbolic": space.tol} if isinstance(space, FuchsianSurface) else {}
        write_manifest(args.out, ["geosecure", *argv], None if space is None else space.describe(),
                       args.seed, tol, time.perf_counter() - t0)
    else:
        from .report import curve_to_csv, to_json
        sys.stdout.write(curve_to_csv(result) if hasattr(result, "rows") else to_json(result, ctx))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
