"""Command-line front end: ``treetribes <group> <command> [flags]``.

Exit codes: 0 success, 1 a verification failed, 2 bad usage.
Relative ``--out`` paths resolve against $TREETRIBES_OUTPUT_DIR when set.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import acceptance, bounds, polyrec, spectral
from .boolfn import fourier_transform
from .dtree import (apply_restriction, clip_report, dumps, loads, restricted_dt_depth,
                    to_truth_table, validate)
from .errors import ResourceError, TreeTribesError
from .restrict import (DEFAULT_SEED, OVERCAP_MODES, Restriction, RestrictionLaw,
                       depth_histogram, reports_to_csv)
from .tribes import build_xor_tribe, verify_tribe

OUTPUT_DIR_ENV = "TREETRIBES_OUTPUT_DIR"
_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


class _UsageFailure(Exception):
    pass


def rational(text: str) -> Fraction:
    """Parse ``num/den`` or an integer; decimals are refused."""
    if not _RATIONAL.match(text):
        raise argparse.ArgumentTypeError(f"expected num/den, got {text!r}")
    try:
        return Fraction(text.replace(" ", ""))
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError("zero denominator") from None


EXACT_BITS = 1024


def _fstr(x, up: bool = False) -> str:
    """Exact num/den, or a 30-digit decimal once the fraction gets huge.

    The decimal is truncated toward zero, or rounded away from zero with
    ``up`` so certified upper bounds stay upper bounds.
    """
    x = Fraction(x)
    if x.denominator.bit_length() <= EXACT_BITS and abs(x.numerator).bit_length() <= EXACT_BITS:
        return f"{x.numerator}/{x.denominator}"
    sign, a = ("-" if x < 0 else ""), abs(x)
    if a == 0:
        return "0/1"
    e = int((a.numerator.bit_length() - a.denominator.bit_length()) * 0.30103) - 30
    scaled = a / Fraction(10) ** e
    digits = -(-scaled.numerator // scaled.denominator) if up and sign == "" else (
        scaled.numerator // scaled.denominator)
    text = str(digits)
    exp = e + len(text) - 1
    return f"{sign}{text[0]}.{text[1:]}e{exp:+d}"


def _emit(args, text: str) -> None:
    out = getattr(args, "out", None)
    if not out:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    path = Path(out)
    if not path.is_absolute() and os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV]) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n")


def _json(args, obj) -> None:
    _emit(args, json.dumps(obj, indent=2, sort_keys=False))


def _read_tree(args):
    if args.tree is not None:
        return loads(args.tree)
    if args.file is not None:
        return loads(Path(args.file).read_text())
    raise _UsageFailure("give --tree or --file")


# ---- handlers -----------------------------------------------------------------

def cmd_tribe_build(args) -> int:
    tribe = build_xor_tribe(args.t, args.r)
    _json(args, {"t": args.t, "r": args.r, "n": tribe.n,
                 "levels": _level_counts(tribe), "level_of": list(tribe.level),
                 "tree": dumps(tribe.tree)})
    return 0


def _level_counts(tribe) -> list[int]:
    counts = [0] * tribe.spec.r
    for lv in tribe.level:
        counts[lv - 1] += 1
    return counts


def cmd_tribe_info(args) -> int:
    tribe = build_xor_tribe(args.t, args.r)
    rep = clip_report(tribe.tree)
    info = {"t": args.t, "r": args.r, "n": tribe.n, "levels": _level_counts(tribe),
            "t_clip": rep.t_clip, "t0_clip": rep.t0_clip,
            "valid": verify_tribe(tribe) is None}
    if args.r >= 1:
        info["bias"] = _fstr(spectral.bias_closed(args.t, args.r))
    _json(args, info)
    return 0


def cmd_tree_validate(args) -> int:
    tree = _read_tree(args)
    problem = validate(tree)
    _json(args, {"ok": problem is None, "violation": problem})
    return 0 if problem is None else 1


def cmd_tree_clip(args) -> int:
    tree = _read_tree(args)
    rep = clip_report(tree, args.t)
    _json(args, {"is_clipped": rep.is_clipped, "t_clip": rep.t_clip, "t0_clip": rep.t0_clip})
    return 0


def cmd_tree_restrict(args) -> int:
    tree = _read_tree(args)
    rho = Restriction.parse(args.rho)
    out = apply_restriction(tree, rho)
    _json(args, {"tree": dumps(out), "depth": restricted_dt_depth(tree, rho, args.live_cap)})
    return 0


def _poly_json(P) -> list[str]:
    return P.to_strings()


def cmd_poly_p0p1(args) -> int:
    p0, p1 = polyrec.p0_p1(args.t, args.r, args.max_degree)
    _json(args, {"t": args.t, "r": args.r, "P0": _poly_json(p0), "P1": _poly_json(p1)})
    return 0


def cmd_poly_coeffs(args) -> int:
    cp = polyrec.coeff_pair(args.t, args.r)
    _json(args, {"t": args.t, "r": args.r, "const_P0": _fstr(cp.c0_P0), "const_P1": _fstr(cp.c0_P1),
                 "p_P0": _fstr(cp.c1_P0), "p_P1": _fstr(cp.c1_P1),
                 "g": _fstr(cp.c1_P0 + cp.c1_P1)})
    return 0


def cmd_poly_pstar(args) -> int:
    if args.p is not None:
        _json(args, {"t": args.t, "r": args.r, "p": _fstr(args.p),
                     "Pstar": _fstr(polyrec.p_star_value(args.t, args.r, args.p))})
    else:
        _json(args, {"t": args.t, "r": args.r,
                     "Pstar": _poly_json(polyrec.p_star(args.t, args.r, args.max_degree))})
    return 0


def cmd_poly_identities(args) -> int:
    results = polyrec.identity_suite()
    _json(args, [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results])
    return 0 if all(r.passed for r in results) else 1


def _parse_set(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise _UsageFailure(f"bad set {text!r}; use comma-separated integers") from None


def cmd_fourier_closed(args) -> int:
    S = _parse_set(args.set)
    if args.t == 1:
        val = spectral.fourier_t1_closed(args.r, [v + 1 for v in S])
        _json(args, {"set": S, "value": _fstr(val)})
    else:
        claim = spectral.fourier_general_closed(build_xor_tribe(args.t, args.r), S)
        _json(args, {"set": S, "zero": claim.zero, "magnitude": _fstr(claim.magnitude),
                     "sign": None if claim.zero else "undetermined"})
    return 0


def cmd_fourier_bruteforce(args) -> int:
    S = _parse_set(args.set)
    tribe = build_xor_tribe(args.t, args.r)
    spec = fourier_transform(to_truth_table(tribe.tree, order=range(tribe.n)))
    mask = sum(1 << v for v in S)
    if mask >= len(spec):
        raise _UsageFailure("set mentions unknown variables")
    _json(args, {"set": S, "value": _fstr(spec[mask])})
    return 0


def cmd_fourier_compare(args) -> int:
    if args.t == 1 and args.r % 2 == 1:
        rows = spectral.compare_t1(args.r)
        if args.max_set_size is not None:
            rows = [x for x in rows if bin(x.mask).count("1") <= args.max_set_size]
    else:
        rows = spectral.compare_general(args.t, args.r, args.max_set_size)
    lines = ["set,closed,bruteforce,match"]
    for x in rows:
        lines.append(f"\"{x.set_label()}\",{x.closed},{_fstr(x.bruteforce)},{str(x.match).lower()}")
    _emit(args, "\n".join(lines))
    return 0 if all(x.match for x in rows) else 1


def cmd_mc_estimate(args) -> int:
    tribe = build_xor_tribe(args.t, args.r)
    hist = depth_histogram(tribe.tree, RestrictionLaw(args.p), args.samples, args.seed,
                           args.live_cap, args.workers)
    rows = [hist.report(d, args.p, args.seed, args.mode).as_row(args.t, args.r) for d in args.d]
    if args.format == "csv":
        _emit(args, reports_to_csv(rows).rstrip("\n"))
    else:
        _json(args, rows)
    return 0


def cmd_bounds_check(args) -> int:
    tribe = build_xor_tribe(args.t, args.r)
    res = bounds.empirical_bound_check(tribe, args.p, args.d, args.samples, args.seed,
                                       workers=args.workers)
    lb = bounds.lower_bound_value(args.p, args.t, args.d, r=args.r)
    ok = res.upper_ok and res.lower_ok is not False
    _json(args, {"t": args.t, "r": args.r, "p": _fstr(args.p), "d": args.d,
                 "samples": res.samples, "skipped": res.skipped, "phat": _fstr(res.phat),
                 "stderr": res.stderr, "upper_bound": _fstr(res.upper), "upper_ok": res.upper_ok,
                 "lower_table": None if res.lower is None else _fstr(res.lower),
                 "lower_ok": res.lower_ok, "lower_formula": _fstr(lb.value),
                 "lower_formula_in_domain": lb.in_domain, "verdict": "pass" if ok else "fail"})
    return 0 if ok else 1


def cmd_bounds_upper(args) -> int:
    _json(args, {"value": _fstr(bounds.upper_bound_value(args.p, args.t, args.d))})
    return 0


def cmd_bounds_lower(args) -> int:
    lb = bounds.lower_bound_value(args.p, args.t, args.d, r=args.r)
    _json(args, {"value": _fstr(lb.value), "in_domain": lb.in_domain, "reasons": list(lb.reasons)})
    return 0


def cmd_bounds_u_kernel(args) -> int:
    u = bounds.u_kernel(args.p, args.t, args.kappa)
    lhs, rhs = bounds.diagonal_identity(args.p, args.t, args.kappa)
    ok = u <= 1 and lhs == rhs
    _json(args, {"U": _fstr(u), "at_most_one": u <= 1, "diagonal_identity": lhs == rhs})
    return 0 if ok else 1


def cmd_bounds_g2(args) -> int:
    res = bounds.g2_check(args.t, args.r, grid_size=args.grid)
    _json(args, {"t": args.t, "r": args.r, "gmax": _fstr(res.value, up=True), "gmax_float": float(res.value),
                 "threshold": res.threshold, "passed": res.passed})
    return 0 if res.passed else 1


def cmd_bounds_d1(args) -> int:
    res = bounds.d1_check(args.t, args.r, args.p)
    _json(args, {"t": args.t, "r": args.r, "p": _fstr(args.p), "Pstar": _fstr(res.pstar),
                 "lower": _fstr(res.lower), "upper": _fstr(res.upper), "in_domain": res.in_domain,
                 "lower_ok": res.lower_ok, "upper_ok": res.upper_ok})
    return 0 if res.passed else 1


def cmd_bounds_gamma_table(args) -> int:
    table = bounds.gamma_lower_table(args.t, args.p, args.d_max, args.r_max)
    lines = ["d,r,lower"]
    for d in range(table.d_max + 1):
        for r in range(table.r_max + 1):
            lines.append(f"{d},{r},{float(table.value(d, r))!r}")
    _emit(args, "\n".join(lines))
    return 0


def cmd_verify_all(args) -> int:
    results = acceptance.run_all(quick=args.quick, workers=args.workers, echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return 0 if not failed else 1


# ---- parser -----------------------------------------------------------------------

def _tr(p, r_default=None):
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--r", type=int, required=r_default is None, default=r_default)


def _out(p):
    p.add_argument("--out", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treetribes",
                                 description="Random restrictions of clipped decision trees.")
    groups = ap.add_subparsers(dest="group", required=True)

    def sub(group, name, fn, help_=None):
        p = group.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        _out(p)
        return p

    g = groups.add_parser("tribe", help="build xor tribes").add_subparsers(dest="cmd", required=True)
    _tr(sub(g, "build", cmd_tribe_build))
    _tr(sub(g, "info", cmd_tribe_info))

    g = groups.add_parser("tree", help="decision-tree utilities").add_subparsers(dest="cmd", required=True)
    for name, fn in (("validate", cmd_tree_validate), ("clip", cmd_tree_clip),
                     ("restrict", cmd_tree_restrict)):
        p = sub(g, name, fn)
        p.add_argument("--tree", help="tree text, e.g. '(x0 L0 (x1 L1 L0))'")
        p.add_argument("--file")
        if name == "clip":
            p.add_argument("--t", type=int)
        if name == "restrict":
            p.add_argument("--rho", required=True, help="string over 0, 1, *")
            p.add_argument("--live-cap", type=int, default=14)

    g = groups.add_parser("poly", help="constancy polynomials").add_subparsers(dest="cmd", required=True)
    p = sub(g, "p0p1", cmd_poly_p0p1)
    _tr(p)
    p.add_argument("--max-degree", type=int)
    _tr(sub(g, "coeffs", cmd_poly_coeffs))
    p = sub(g, "pstar", cmd_poly_pstar)
    _tr(p)
    p.add_argument("--p", type=rational)
    p.add_argument("--max-degree", type=int)
    sub(g, "identities", cmd_poly_identities)

    g = groups.add_parser("fourier", help="Fourier coefficients").add_subparsers(dest="cmd", required=True)
    for name, fn in (("closed", cmd_fourier_closed), ("bruteforce", cmd_fourier_bruteforce)):
        p = sub(g, name, fn)
        _tr(p)
        p.add_argument("--set", required=True, help="comma-separated 0-based variable ids")
    p = sub(g, "compare", cmd_fourier_compare)
    _tr(p)
    p.add_argument("--max-set-size", type=int)

    g = groups.add_parser("mc", help="Monte Carlo").add_subparsers(dest="cmd", required=True)
    p = sub(g, "estimate", cmd_mc_estimate)
    _tr(p)
    p.add_argument("--p", type=rational, required=True)
    p.add_argument("--d", type=int, nargs="+", required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--live-cap", type=int, default=14)
    p.add_argument("--mode", choices=OVERCAP_MODES, default="reported")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    g = groups.add_parser("bounds", help="bound evaluation and checks").add_subparsers(dest="cmd", required=True)
    p = sub(g, "check", cmd_bounds_check)
    _tr(p)
    p.add_argument("--p", type=rational, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    for name, fn in (("upper", cmd_bounds_upper), ("lower", cmd_bounds_lower)):
        p = sub(g, name, fn)
        p.add_argument("--t", type=int, required=True)
        p.add_argument("--p", type=rational, required=True)
        p.add_argument("--d", type=int, required=True)
        if name == "lower":
            p.add_argument("--r", type=int)
    p = sub(g, "u-kernel", cmd_bounds_u_kernel)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--p", type=rational, required=True)
    p.add_argument("--kappa", type=rational, default=Fraction(4))
    p = sub(g, "g2", cmd_bounds_g2)
    _tr(p)
    p.add_argument("--grid", type=int, default=64)
    p = sub(g, "d1", cmd_bounds_d1)
    _tr(p)
    p.add_argument("--p", type=rational, required=True)
    p = sub(g, "gamma-table", cmd_bounds_gamma_table)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--p", type=rational, required=True)
    p.add_argument("--d-max", type=int, default=2)
    p.add_argument("--r-max", type=int, default=64)

    g = groups.add_parser("verify", help="acceptance suite").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("all")
    p.set_defaults(fn=cmd_verify_all)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (_UsageFailure, ResourceError, TreeTribesError, ValueError) as exc:
        print(f"treetribes: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
