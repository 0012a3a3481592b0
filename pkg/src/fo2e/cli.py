"""Command-line entry point.

Every subcommand prints one JSON document on stdout.  Exit codes: 0 when
the semantic check passes, 1 when it fails, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bisim import BisimilarError, Refinement, distinguishing_formula, pointed_bisimilar
from .intended import SolutionSpec, TruncationParams, build_intended_A, build_intended_B, verify_intended
from .modelcheck import EvaluationError, evaluate, satisfying_assignments
from .reduction import PcpError, build_bundle, validate_pcp
from .structures import StructureError, dump_structure, load_structure
from .syntax import (
    FO2,
    GF2,
    FormulaError,
    Signature,
    check_guarded,
    free_vars,
    mode_of,
    parse_formula,
    print_formula,
    quantifier_depth,
    signature_of,
)
from .witness import (
    CertificateError,
    SearchBounds,
    check_nonexistence_witness,
    countermodel_search,
    interpolant_search,
    load_certificate,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_formula(path: str, mode: str | None = None):
    text = Path(path).read_text()
    if mode is not None:
        return parse_formula(text, mode)
    try:
        return parse_formula(text, FO2)
    except FormulaError:
        return parse_formula(text, GF2)


def _structure(args, path: str):
    return load_structure(path, close_equivalences=args.close_equivalences)


def _rho(spec: str) -> Signature:
    p = Path(spec)
    doc = json.loads(p.read_text()) if p.exists() else json.loads(spec)
    return Signature.from_json(doc)


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _points(values: list[str]) -> tuple[str, ...]:
    return tuple(v for part in values for v in part.split(",") if v)


def cmd_parse(args) -> int:
    f = _read_formula(args.formula, args.mode)
    g = check_guarded(f)
    _emit(
        {
            "formula": print_formula(f),
            "mode": mode_of(f),
            "free_vars": sorted(free_vars(f)),
            "quantifier_depth": quantifier_depth(f),
            "signature": signature_of(f).to_json(),
            "guarded": bool(g),
            "offending": None if g.offending is None else print_formula(g.offending),
        }
    )
    return EXIT_PASS


def cmd_mc(args) -> int:
    S = _structure(args, args.structure)
    f = _read_formula(args.formula)
    asg = {}
    for item in args.assign:
        var, _, elem = item.partition("=")
        if not elem:
            raise UsageError(f"--assign expects var=element, got {item!r}")
        asg[var] = elem
    if args.all:
        sats = satisfying_assignments(S, f)
        _emit({"formula": print_formula(f), "satisfying": sats})
        return EXIT_PASS if sats else EXIT_FAIL
    value = evaluate(S, f, asg)
    _emit({"formula": print_formula(f), "assignment": asg, "value": value})
    return EXIT_PASS if value else EXIT_FAIL


def _pair_args(args):
    A, B = _structure(args, args.A), _structure(args, args.B)
    rho = _rho(args.rho)
    return A, B, rho, Refinement(A, B, rho, args.logic)


def cmd_bisim(args) -> int:
    A, B, rho, ref = _pair_args(args)
    rel = ref.greatest()
    doc = {"exists": rel is not None, "relation": None if rel is None else rel.to_json()}
    ok = rel is not None
    if args.pointsA or args.pointsB:
        ta, tb = _points(args.pointsA), _points(args.pointsB)
        ok = pointed_bisimilar(A, ta, B, tb, rho, args.logic, ref)
        doc["points"] = {"A": list(ta), "B": list(tb), "bisimilar": ok}
    _emit(doc)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_distinguish(args) -> int:
    A, B, rho, ref = _pair_args(args)
    try:
        chi = distinguishing_formula(A, args.a, B, args.b, rho, args.logic, ref)
    except BisimilarError as e:
        _emit({"distinguishable": False, "detail": str(e)})
        return EXIT_FAIL
    _emit({"distinguishable": True, "formula": print_formula(chi), "quantifier_depth": quantifier_depth(chi)})
    return EXIT_PASS


def cmd_reduce(args) -> int:
    P = validate_pcp(args.pcp)
    b = build_bundle(P)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "phi.fo2": b.phi,
        "neg_psi.fo2": b.neg_psi,
        "psi.fo2": b.psi,
        "phi_guarded.fo2": b.phi_guarded,
    }
    for name, f in files.items():
        (out / name).write_text(print_formula(f) + "\n")
    (out / "rho.json").write_text(json.dumps(b.rho.to_json(), indent=2, sort_keys=True) + "\n")
    _emit(
        {
            "out": str(out),
            "files": sorted(files) + ["rho.json"],
            "rho": b.rho.to_json(),
            "groups": {g: len(getattr(b.groups, g)) for g in b.groups.GROUPS},
        }
    )
    return EXIT_PASS


def cmd_witness(args) -> int:
    v = check_nonexistence_witness(load_certificate(args.cert))
    _emit(v.to_json())
    return EXIT_PASS if v.accepted else EXIT_FAIL


def _bounds(args) -> SearchBounds:
    return SearchBounds(args.max_depth, args.max_size, args.max_domain)


def cmd_interp(args) -> int:
    res = interpolant_search(_read_formula(args.phi), _read_formula(args.psi), _bounds(args))
    _emit(res.to_json())
    return EXIT_PASS if res.found is not None else EXIT_FAIL


def cmd_countermodel(args) -> int:
    premise, conclusion = _read_formula(args.premise), _read_formula(args.conclusion)
    hit = countermodel_search(premise, conclusion, args.bound)
    if hit is None:
        _emit({"status": "none", "bound": args.bound})
        return EXIT_PASS
    S, e = hit
    _emit({"status": "found", "bound": args.bound, "structure": S.to_json(), "point": e})
    return EXIT_FAIL


def cmd_intended(args) -> int:
    P = validate_pcp(args.pcp)
    sol = SolutionSpec.from_json(args.solution)
    params = TruncationParams(args.s_depth, args.r_window, args.interior)
    report = verify_intended(P, sol, params, args.rounds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_structure(build_intended_A(P, sol, params).structure, out / "A.json")
    dump_structure(build_intended_B(P, sol, params).structure, out / "B.json")
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit(
        {
            "pass": report["pass"],
            "phi": report["phi"]["pass"],
            "neg_psi": report["neg_psi"]["pass"],
            "failed_groups": report["neg_psi"]["failed_groups"],
            "games": report["games"]["pass"],
            "out": str(out),
        }
    )
    return EXIT_PASS if report["pass"] else EXIT_FAIL


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fo2e", description="Two-variable logic with equivalences: tools.")
    p.add_argument("--close-equivalences", action="store_true",
                   help="close E1/E2 to equivalences when loading structures")
    sub = p.add_subparsers(dest="command", metavar="{parse,mc,bisim,distinguish,reduce,witness,interp-search,countermodel,intended}")

    s = sub.add_parser("parse", help="parse a formula and report its shape")
    s.add_argument("formula")
    s.add_argument("--mode", choices=[FO2, GF2])
    s.set_defaults(run=cmd_parse)

    s = sub.add_parser("mc", help="evaluate a formula in a structure")
    s.add_argument("--structure", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--assign", action="append", default=[], metavar="VAR=ELEM")
    s.add_argument("--all", action="store_true", help="list all satisfying assignments")
    s.set_defaults(run=cmd_mc)

    for name, fn, helptext in (
        ("bisim", cmd_bisim, "greatest bisimulation between two structures"),
        ("distinguish", cmd_distinguish, "formula separating two points"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--A", required=True)
        s.add_argument("--B", required=True)
        s.add_argument("--rho", required=True, help="signature JSON file or inline JSON")
        s.add_argument("--logic", choices=[FO2, GF2], default=FO2)
        if name == "bisim":
            s.add_argument("--pointsA", action="append", default=[])
            s.add_argument("--pointsB", action="append", default=[])
        else:
            s.add_argument("--a", required=True)
            s.add_argument("--b", required=True)
        s.set_defaults(run=fn)

    s = sub.add_parser("reduce", help="compile a PCP instance into formulas")
    s.add_argument("--pcp", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(run=cmd_reduce)

    s = sub.add_parser("witness", help="check an interpolant non-existence certificate")
    s.add_argument("--cert", required=True)
    s.set_defaults(run=cmd_witness)

    s = sub.add_parser("interp-search", help="bounded interpolant search")
    s.add_argument("--phi", required=True)
    s.add_argument("--psi", required=True)
    s.add_argument("--max-depth", type=int, default=1)
    s.add_argument("--max-size", type=int, default=3)
    s.add_argument("--max-domain", type=int, default=3)
    s.set_defaults(run=cmd_interp)

    s = sub.add_parser("countermodel", help="bounded countermodel search for premise |= conclusion")
    s.add_argument("--premise", required=True)
    s.add_argument("--conclusion", required=True)
    s.add_argument("--bound", type=int, default=3)
    s.set_defaults(run=cmd_countermodel)

    s = sub.add_parser("intended", help="build and check truncated intended models")
    s.add_argument("--pcp", required=True)
    s.add_argument("--solution", required=True)
    s.add_argument("--s-depth", type=int, default=12)
    s.add_argument("--r-window", type=int, default=2)
    s.add_argument("--interior", type=int, default=4)
    s.add_argument("--rounds", type=int, default=4)
    s.add_argument("--out", default=".")
    s.set_defaults(run=cmd_intended)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "run", None) is None:
            raise UsageError("a subcommand is required")
        return args.run(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"fo2e: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, FormulaError, StructureError, PcpError,
            CertificateError, EvaluationError, ValueError) as e:
        print(f"fo2e: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
