"""Command-line driver: ``symred {check|reduce|verify|paper-suite}``.

Exit codes: 0 all checks pass, 1 any failure, 2 inconclusive,
3 usage or parse errors.  Every result line carries the seed and the
tolerances it was computed with; machine output is JSON-lines with a
stable schema {case, kind, verdict, residual_max, seed, tolerances,
provenance}.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .checks import check_classical, check_conditional, check_lie_backlund
from .expr import ExprError
from .jets import CanonicalOperator
from .parser import ParseError, print_equation
from .problems import ProblemBundle, load_problem
from .reduce import (
    ReductionFailure, check_overdetermined, derive_reduction,
    systems_equivalent, verify_backlund, verify_reduction,
)
from .numeric import residual_explicit, residual_implicit

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

DEFAULT_EXPLICIT_TOL = 1e-9
DEFAULT_IMPLICIT_TOL = 1e-4


class UsageFault(Exception):
    pass


def _record(case: str, kind: str, verdict: str, residual_max: float,
            seed: int, tol_abs: float, tol_rel: float, provenance: str,
            expect: str = "", detail: str = "") -> dict:
    rec = {
        "case": case,
        "kind": kind,
        "verdict": verdict,
        "residual_max": residual_max,
        "seed": seed,
        "tolerances": {"abs": tol_abs, "rel": tol_rel},
        "provenance": provenance,
    }
    if expect:
        rec["expect"] = expect
        rec["ok"] = (verdict == expect)
    if detail:
        rec["detail"] = detail
    return rec


def _from_check_report(case: str, rep, expect: str = "") -> dict:
    d = rep.to_dict()
    return _record(case, rep.kind, rep.verdict, abs(d["residual_max"]),
                   rep.seed, rep.tol_abs, rep.tol_rel, rep.provenance,
                   expect=expect)


def _run_operator(bundle: ProblemBundle, entry, seed: int,
                  tol: float | None, mode: str = "", expect: str = "") -> dict:
    sys_ = bundle.equations[entry.on]
    kw = {}
    if tol is not None:
        kw = {"tol_abs": tol, "tol_rel": tol}
    mode = mode or entry.mode
    if isinstance(entry.operator, CanonicalOperator) or mode == "lb":
        rep = check_lie_backlund(entry.operator, sys_, seed=seed, **kw)
    elif mode == "conditional":
        rep = check_conditional(entry.operator, sys_, seed=seed, **kw)
    else:
        rep = check_classical(entry.operator, sys_, seed=seed, **kw)
    return _from_check_report(f"{bundle.name}:{entry.name}", rep, expect)


def _run_reduce(bundle: ProblemBundle, entry, candidate: str, seed: int,
                tol: float | None, expect: str = "",
                stream=None) -> list[dict]:
    if not entry.original:
        raise UsageFault(f"ansatz {entry.name!r} names no original equation")
    original = bundle.equations[entry.original]
    kw = {}
    if tol is not None:
        kw = {"tol_abs": tol, "tol_rel": tol}
    records = []
    if candidate:
        if candidate not in bundle.reduced:
            raise UsageFault(f"unknown reduced system {candidate!r}")
        rep = verify_reduction(entry.ansatz, original,
                               bundle.reduced[candidate], seed=seed, **kw)
        records.append(_from_check_report(
            f"{bundle.name}:{entry.name}->{candidate}", rep, expect))
    else:
        out = derive_reduction(entry.ansatz, original, seed=seed)
        case = f"{bundle.name}:{entry.name}:derive"
        if isinstance(out, ReductionFailure):
            records.append(_record(case, "derivation", "fail", 0.0, seed,
                                   tol or 1e-9, tol or 1e-9, "symbolic",
                                   expect=expect, detail=out.reason))
        else:
            records.append(_record(case, "derivation", "pass", 0.0, seed,
                                   tol or 1e-9, tol or 1e-9, "symbolic",
                                   expect=expect))
            if stream is not None:
                for lhs, rhs in out.equations:
                    print(print_equation(lhs, rhs), file=stream)
    return records


def _run_derive_cross(bundle: ProblemBundle, entry, seed: int,
                      expect: str = "") -> dict:
    """Derive the reduced system and test two-way equivalence against the
    bundled candidate."""
    original = bundle.equations[entry.original]
    case = f"{bundle.name}:{entry.name}:derive"
    out = derive_reduction(entry.ansatz, original, seed=seed)
    if isinstance(out, ReductionFailure):
        return _record(case, "derivation", "fail", 0.0, seed, 1e-9, 1e-9,
                       "symbolic", expect=expect, detail=out.reason)
    rep = systems_equivalent(out, bundle.reduced[entry.candidate], seed=seed,
                             constraints=bundle.param_constraints)
    return _from_check_report(case, rep, expect)


def _run_solution(bundle: ProblemBundle, spec, seed: int, tol: float | None,
                  fd: bool = False, expect: str = "") -> dict:
    sys_ = bundle.system(spec.of)
    binding = spec.make_binding()
    form = spec.make_form(sys_.js.dependents)
    plan = spec.make_plan(seed=seed if seed != spec.seed else None)
    implicit = fd or spec.kind == "implicit"
    if implicit:
        rep = residual_implicit(form, sys_, plan, binding)
        default_tol = DEFAULT_IMPLICIT_TOL
    else:
        rep = residual_explicit(form, sys_, plan, binding)
        default_tol = DEFAULT_EXPLICIT_TOL
    use_tol = tol if tol is not None else \
        (spec.tol if spec.tol is not None and not (fd and spec.kind != "implicit")
         else default_tol)
    if rep.inconclusive:
        verdict = "inconclusive"
    else:
        verdict = "pass" if rep.max_residual < use_tol else "fail"
    prov = "finite-difference" if implicit else "numeric"
    detail = f"skipped {rep.skipped}/{rep.total} sample points"
    return _record(f"{bundle.name}:{spec.name}", "solution", verdict,
                   rep.max_residual, plan.seed, use_tol, 0.0, prov,
                   expect=expect, detail=detail)


def _run_backlund(bundle: ProblemBundle, entry, seed: int,
                  tol: float | None, expect: str = "") -> dict:
    kw = {}
    if tol is not None:
        kw = {"tol_abs": tol, "tol_rel": tol}
    rep = verify_backlund(entry.relation, seed=seed, **kw)
    return _from_check_report(f"{bundle.name}:{entry.name}", rep, expect)


def _run_overdetermined(bundle: ProblemBundle, spec, seed: int,
                        tol: float | None, expect: str = "") -> dict:
    kw = {}
    if tol is not None:
        kw = {"tol_abs": tol, "tol_rel": tol}
    rep = check_overdetermined(spec.assignments, bundle.space, seed=seed,
                               constraints=spec.constraints, box=spec.box,
                               n=spec.n, **kw)
    return _from_check_report(f"{bundle.name}:{spec.name}", rep, expect)


# -- output -----------------------------------------------------------------

def _emit(records, fmt: str, stream) -> None:
    if fmt == "json-lines":
        for rec in records:
            print(json.dumps(rec, sort_keys=True), file=stream)
        return
    for rec in records:
        tols = rec["tolerances"]
        line = (f"{rec['verdict']:12s} {rec['case']:40s} kind={rec['kind']} "
                f"residual_max={rec['residual_max']:.3g} seed={rec['seed']} "
                f"tol_abs={tols['abs']:g} tol_rel={tols['rel']:g} "
                f"provenance={rec['provenance']}")
        if "expect" in rec:
            line += f" expect={rec['expect']} {'ok' if rec['ok'] else 'MISMATCH'}"
        if rec.get("detail"):
            line += f" ({rec['detail']})"
        print(line, file=stream)


def _exit_code(records, honor_expect: bool = False) -> int:
    verdicts = []
    for rec in records:
        if honor_expect and "expect" in rec:
            if rec["verdict"] == "inconclusive":
                verdicts.append("inconclusive")
            else:
                verdicts.append("pass" if rec["ok"] else "fail")
        else:
            verdicts.append(rec["verdict"])
    if any(v == "fail" for v in verdicts):
        return EXIT_FAIL
    if any(v == "inconclusive" for v in verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def _parse_seeds(text: str):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _header(seeds, tol, fmt: str, stream) -> None:
    if fmt != "text":
        return
    tol_note = f"tol-override={tol:g}" if tol is not None else "tol=defaults"
    print(f"# seeds={','.join(str(s) for s in seeds)} {tol_note}", file=stream)


def _load(path: str) -> ProblemBundle:
    p = Path(path)
    if not p.exists():
        raise UsageFault(f"no such bundle: {path}")
    return load_problem(p)


def bundled_problems() -> list[ProblemBundle]:
    """The case-study bundles shipped inside the package, in deterministic
    name order."""
    root = resources.files("symred") / "data"
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".prob"):
            from .problems import parse_problem
            out.append(parse_problem(entry.read_text(encoding="utf-8"),
                                     name=entry.name[:-5]))
    return out


def run_suite(bundle: ProblemBundle, seed: int, tol: float | None = None,
              fd: bool = False) -> list[dict]:
    """Run every entry of a bundle against its declared expectation."""
    records = []
    for entry in bundle.operators.values():
        records.append(_run_operator(bundle, entry, seed, tol,
                                     expect=entry.expect))
    for entry in bundle.ansatzes.values():
        if not entry.original:
            continue
        if entry.candidate:
            records.extend(_run_reduce(bundle, entry, entry.candidate, seed,
                                       tol, expect=entry.expect))
            if entry.derive:
                records.append(_run_derive_cross(bundle, entry, seed,
                                                 expect=entry.expect))
        else:
            records.extend(_run_reduce(bundle, entry, "", seed, tol,
                                       expect=entry.expect))
    for spec in bundle.solutions.values():
        records.append(_run_solution(bundle, spec, seed, tol, fd=fd,
                                     expect=spec.expect))
    for entry in bundle.backlunds.values():
        records.append(_run_backlund(bundle, entry, seed, tol,
                                     expect=entry.expect))
    for spec in bundle.overdetermined.values():
        records.append(_run_overdetermined(bundle, spec, seed, tol,
                                           expect=spec.expect))
    return records


# -- subcommands --------------------------------------------------------------

def cmd_check(args) -> int:
    bundle = _load(args.bundle)
    names = args.operator or list(bundle.operators)
    for n in names:
        if n not in bundle.operators:
            raise UsageFault(f"unknown operator {n!r}")
    seeds = _parse_seeds(args.seed)
    _header(seeds, args.tol, args.format, sys.stdout)
    records = []
    for seed in seeds:
        for n in names:
            records.append(_run_operator(bundle, bundle.operators[n], seed,
                                         args.tol, mode=args.mode))
    _emit(records, args.format, sys.stdout)
    return _exit_code(records)


def cmd_reduce(args) -> int:
    bundle = _load(args.bundle)
    if not args.ansatz:
        raise UsageFault("reduce needs --ansatz")
    if args.ansatz not in bundle.ansatzes:
        raise UsageFault(f"unknown ansatz {args.ansatz!r}")
    seeds = _parse_seeds(args.seed)
    _header(seeds, args.tol, args.format, sys.stdout)
    records = []
    for seed in seeds:
        records.extend(_run_reduce(bundle, bundle.ansatzes[args.ansatz],
                                   args.candidate, seed, args.tol,
                                   stream=sys.stdout))
    _emit(records, args.format, sys.stdout)
    return _exit_code(records)


def cmd_verify(args) -> int:
    bundle = _load(args.bundle)
    seeds = _parse_seeds(args.seed)
    _header(seeds, args.tol, args.format, sys.stdout)
    records = []
    targeted = bool(args.solution or args.backlund)
    if args.solution and args.solution not in bundle.solutions:
        raise UsageFault(f"unknown solution {args.solution!r}")
    if args.backlund and args.backlund not in bundle.backlunds:
        raise UsageFault(f"unknown transformation {args.backlund!r}")
    if not targeted:
        raise UsageFault("verify needs --solution or --backlund")
    for seed in seeds:
        if args.solution:
            records.append(_run_solution(bundle, bundle.solutions[args.solution],
                                         seed, args.tol, fd=args.fd))
        if args.backlund:
            records.append(_run_backlund(bundle, bundle.backlunds[args.backlund],
                                         seed, args.tol))
    _emit(records, args.format, sys.stdout)
    return _exit_code(records)


def cmd_paper_suite(args) -> int:
    seeds = _parse_seeds(args.seed)
    _header(seeds, args.tol, args.format, sys.stdout)
    records = []
    for seed in seeds:
        for bundle in bundled_problems():
            records.extend(run_suite(bundle, seed, args.tol, fd=args.fd))
    _emit(records, args.format, sys.stdout)
    return _exit_code(records, honor_expect=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="symred",
        description="Symmetry checks, reductions, and solution validation "
                    "for problem bundles in the .prob format.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_bundle=True):
        if with_bundle:
            p.add_argument("bundle", help="path to a .prob bundle")
        p.add_argument("--seed", default=os.environ.get("SYMRED_SEED", "0"),
                       help="RNG seed, or an inclusive range 'a..b'")
        p.add_argument("--tol", type=float, default=None,
                       help="override the tolerance for every check")
        p.add_argument("--format", choices=("text", "json-lines"),
                       default="text")

    p = sub.add_parser("check", help="invariance checks for named operators")
    common(p)
    p.add_argument("--operator", action="append",
                   help="operator name (repeatable; default: all)")
    p.add_argument("--mode", choices=("classical", "conditional", "lb"),
                   default="", help="override the check mode")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("reduce", help="verify or derive a reduced system")
    common(p)
    p.add_argument("--ansatz", required=False, default="")
    p.add_argument("--candidate", default="",
                   help="reduced system to verify against; omit to derive")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("verify",
                       help="validate a solution or a transformation pair")
    common(p)
    p.add_argument("--solution", default="")
    p.add_argument("--backlund", default="")
    p.add_argument("--fd", action="store_true",
                   help="force the finite-difference residual path")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("paper-suite",
                       help="run every bundled case study against its "
                            "expected verdict")
    common(p, with_bundle=False)
    p.add_argument("--fd", action="store_true")
    p.set_defaults(fn=cmd_paper_suite)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except UsageFault as e:
        print(f"symred: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"symred: parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ExprError as e:
        print(f"symred: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"symred: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
