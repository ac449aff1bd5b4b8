"""Command-line surface.

Subcommands: lt-construct, endo, log, family-check, lambda-stats, profile,
recover-group, mu-search.  Reports are emitted as text or JSON; JSON bodies
are canonical (sorted keys, no timestamps) so identical invocations produce
byte-identical output, and every report echoes its invocation.

Exit codes: 0 = pass, 1 = mathematical failure (with witness),
2 = precision or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .padic import PadicError, PrecisionError, RingSpec, ring_from_descriptor
from .series import Series1
from .lubin_tate import LTSeries, endo_check, is_lt_series, lt_endo, lt_group_law
from .dynamics import (
    MuSearchError,
    check_commuting,
    check_full,
    default_samples,
    default_unit_samples,
    family_from_descriptor,
    fixedpoint_profile,
    lambda_stats,
    lubin_log,
    mu_search,
    recover_group,
)

EXIT_PASS = 0
EXIT_MATH_FAIL = 1
EXIT_PRECISION_OR_USAGE = 2


def _load_maybe_file(text: str) -> str:
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            return fh.read()
    if os.path.exists(text) and (text.endswith(".json") or os.path.sep in text):
        with open(text, "r", encoding="utf-8") as fh:
            return fh.read()
    return text


def _ring_from_arg(arg: str, precision: int | None) -> RingSpec:
    desc = json.loads(_load_maybe_file(arg))
    if precision is not None:
        desc["N"] = precision
    return ring_from_descriptor(desc)


def _series_from_arg(ring: RingSpec, arg: str, D: int) -> Series1:
    return Series1.parse(ring, _load_maybe_file(arg)).truncate(D)


def _family_from_arg(ring: RingSpec, arg: str, D: int):
    desc = json.loads(_load_maybe_file(arg))
    return family_from_descriptor(ring, desc, D)


def _samples_from_arg(ring: RingSpec, arg: str | None, want_units: bool):
    if arg is None:
        return default_unit_samples(ring) if want_units else default_samples(ring)
    return [ring.parse_element(p.strip()) for p in arg.split(",") if p.strip()]


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
        return
    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}{k}.", obj[k])
        elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
            for i, v in enumerate(obj):
                walk(f"{prefix}{i}.", v)
        else:
            sys.stdout.write(f"{prefix[:-1]}: {obj}\n")
    walk("", report)


def _base_report(args, command: str, ring: RingSpec) -> dict:
    return {
        "command": command,
        "invocation": list(args.raw_argv),
        "ring": ring.descriptor(),
        "degree": args.degree,
    }


# ----------------------------------------------------------------------
# subcommand bodies (each returns (report, exit_code))
# ----------------------------------------------------------------------

def _cmd_lt_construct(args, ring):
    f = _series_from_arg(ring, args.f, args.degree)
    diag = is_lt_series(f)
    rep = _base_report(args, "lt-construct", ring)
    if not diag:
        rep["status"] = "fail"
        rep["reason"] = diag.reason
        rep["witness_index"] = diag.index
        return rep, EXIT_MATH_FAIL
    law = lt_group_law(LTSeries(f))
    axioms = law.check_axioms()
    rep["group_law"] = law.G.literal()
    rep["axioms"] = {k: (v is True) for k, v in axioms.items()}
    rep["status"] = "pass" if all(v is True for v in axioms.values()) else "fail"
    return rep, EXIT_PASS if rep["status"] == "pass" else EXIT_MATH_FAIL


def _cmd_endo(args, ring):
    f = LTSeries(_series_from_arg(ring, args.f, args.degree))
    g = LTSeries(_series_from_arg(ring, args.g, args.degree)) if args.g else f
    a = ring.parse_element(args.alpha)
    phi = lt_endo(a, f, g)
    rep = _base_report(args, "endo", ring)
    rep["alpha"] = ring.element_literal(a)
    rep["endomorphism"] = phi.literal()
    rep["status"] = "pass"
    return rep, EXIT_PASS


def _cmd_log(args, ring):
    fam = _family_from_arg(ring, args.family, args.degree)
    samples = _samples_from_arg(ring, args.samples, want_units=True)
    log = lubin_log(fam, check_samples=samples)
    rep = _base_report(args, "log", ring)
    rep["logarithm"] = log.L.literal()
    rep["divisions"] = list(log.divisions)
    rep["status"] = "pass"
    return rep, EXIT_PASS


def _cmd_family_check(args, ring):
    fam = _family_from_arg(ring, args.family, args.degree)
    units = _samples_from_arg(ring, args.samples, want_units=True)
    commuting = check_commuting(fam, [ring.pi()] + units)
    rep = _base_report(args, "family-check", ring)
    rep["commuting"] = commuting.to_dict()
    if commuting.passed:
        full = check_full(fam, units)
        rep["full"] = full.to_dict()
        ok = full.passed
    else:
        rep["full"] = None
        ok = False
    rep["status"] = "pass" if ok else "fail"
    return rep, EXIT_PASS if ok else EXIT_MATH_FAIL


def _cmd_lambda_stats(args, ring):
    fam = _family_from_arg(ring, args.family, args.degree)
    stats = lambda_stats(fam, args.n)
    rep = _base_report(args, "lambda-stats", ring)
    rep["result"] = stats.to_dict()
    rep["status"] = "pass"
    return rep, EXIT_PASS


def _cmd_profile(args, ring):
    fam = _family_from_arg(ring, args.family, args.degree)
    prof = fixedpoint_profile(fam, ring.parse_element(args.alpha))
    rep = _base_report(args, "profile", ring)
    rep["result"] = prof.to_dict()
    rep["status"] = "pass"
    return rep, EXIT_PASS


def _cmd_recover_group(args, ring):
    fam = _family_from_arg(ring, args.family, args.degree)
    units = _samples_from_arg(ring, args.samples, want_units=True)
    law, rec = recover_group(fam, units)
    rep = _base_report(args, "recover-group", ring)
    rep["report"] = rec.to_dict()
    if law is not None:
        rep["group_law"] = law.G.literal()
    rep["status"] = "pass" if rec.ok else "fail"
    return rep, EXIT_PASS if rec.ok else EXIT_MATH_FAIL


def _cmd_mu_search(args, ring):
    fam = _family_from_arg(ring, args.family, args.degree)
    try:
        cert = mu_search(fam, args.max_digits)
    except MuSearchError as exc:
        rep = _base_report(args, "mu-search", ring)
        rep["status"] = "fail"
        rep["reason"] = str(exc)
        rep["best_partial_degree"] = exc.best_degree
        rep["candidates_tried"] = exc.tried
        return rep, EXIT_MATH_FAIL
    rep = _base_report(args, "mu-search", ring)
    rep["certificate"] = cert.to_dict()
    ok = cert.wideg_ok and cert.val_ok
    rep["status"] = "pass" if ok else "fail"
    return rep, EXIT_PASS if ok else EXIT_MATH_FAIL


_COMMANDS = {
    "lt-construct": _cmd_lt_construct,
    "endo": _cmd_endo,
    "log": _cmd_log,
    "family-check": _cmd_family_check,
    "lambda-stats": _cmd_lambda_stats,
    "profile": _cmd_profile,
    "recover-group": _cmd_recover_group,
    "mu-search": _cmd_mu_search,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="padicdyn",
        description="Verify commuting p-adic power-series families and their "
                    "background formal groups.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, family=False, series_f=False):
        p.add_argument("--ring", required=True,
                       help="ring descriptor: inline JSON or a file path/@file")
        p.add_argument("--degree", type=int, default=64, help="truncation degree D")
        p.add_argument("--precision", type=int, default=None,
                       help="override the descriptor's precision N (default 24 via descriptor)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        if family:
            p.add_argument("--family", required=True,
                           help="family descriptor: inline JSON or a file path/@file")
            p.add_argument("--samples", default=None,
                           help="comma-separated element literals (default: built-in sample set)")
        if series_f:
            p.add_argument("--f", required=True, help="series literal or @file")

    p = sub.add_parser("lt-construct", help="build the group law of a Lubin-Tate series")
    common(p, series_f=True)
    p = sub.add_parser("endo", help="build an endomorphism [alpha]")
    common(p, series_f=True)
    p.add_argument("--g", default=None, help="target series literal (default: --f)")
    p.add_argument("--alpha", required=True)
    p = sub.add_parser("log", help="family logarithm")
    common(p, family=True)
    p = sub.add_parser("family-check", help="commutation + fullness checks")
    common(p, family=True)
    p = sub.add_parser("lambda-stats", help="new-root counts of iterates")
    common(p, family=True)
    p.add_argument("--n", type=int, required=True)
    p = sub.add_parser("profile", help="fixed-point profile of F_alpha")
    common(p, family=True)
    p.add_argument("--alpha", required=True)
    p = sub.add_parser("recover-group", help="recover the background formal group")
    common(p, family=True)
    p = sub.add_parser("mu-search", help="digit search for mu with F_mu = T^q mod pi")
    common(p, family=True)
    p.add_argument("--max-digits", type=int, default=4)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PRECISION_OR_USAGE if exc.code else EXIT_PASS
    args.raw_argv = argv
    try:
        ring = _ring_from_arg(args.ring, args.precision)
        report, code = _COMMANDS[args.command](args, ring)
    except PrecisionError as exc:
        _emit({"command": args.command, "invocation": argv,
               "status": "precision-error", "reason": str(exc)}, args.format)
        return EXIT_PRECISION_OR_USAGE
    except MuSearchError as exc:
        _emit({"command": args.command, "invocation": argv,
               "status": "fail", "reason": str(exc)}, args.format)
        return EXIT_MATH_FAIL
    except PadicError as exc:
        _emit({"command": args.command, "invocation": argv,
               "status": "fail", "reason": str(exc)}, args.format)
        return EXIT_MATH_FAIL
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        _emit({"command": args.command, "invocation": argv,
               "status": "usage-error", "reason": str(exc)}, args.format)
        return EXIT_PRECISION_OR_USAGE
    _emit(report, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
