"""Command-line front end.

    kgsym collineations   classify every catalog vector of a family
    kgsym verify-tables   constraint, Lie and Noether checks for table rows
    kgsym commutators     bracket tables expanded in the catalog basis
    kgsym reduce          run a reduction case and verify the lifted solution
    kgsym residual        check one generator / potential pair on a family
    kgsym catalog         export table rows and catalog vectors as JSON

Global flags (accepted before or after the command): --seed (default 42),
--tol (zero-test tolerance, default 1e-9), --json.  Pinned tolerances that
--tol does not touch: Lie and Noether residuals 1e-7, closed-form
substitution 1e-10, lifted finite-difference residual 1e-4 at h = 1e-3.

Family flags: --family general|lrs|proper-ckv|lambert|conformally-flat-trig|
conformally-flat-hyp with --A --B --C (scale factors as expressions in t),
--alpha --beta --gamma (rationals such as 1/2), --U and --U-primitive
(expressions in t) and --c1.

Reduction parameters form a flat key-value record: --case picks the case,
--set 1|2 picks a built-in parameter set, and --mu1 .. --mu7, --mu a,b,c,
--alpha, --beta, --A, --B, --C, --V override single entries.  --V is an
expression in one free variable, read as the case's reduced argument.
--closed-form replaces V by the potential that makes the B-case ODE
solvable in closed form.

Exit status is 0 when no check record fails, 1 otherwise, and 2 for
rejected input (bad family, a forbidden reduction branch, parse errors).
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from fractions import Fraction

from . import __version__
from .catalog import (
    DEFAULT_COEFFS, DEFAULT_INSTANCES, BracketExpansion, TABLE_IDS, FamilyError, catalog_vectors, class_a_lrs, commutator_basis,
    commutator_table, compare_with_expected, conformally_flat_hyp, conformally_flat_trig, default_family,
    general_diagonal, instance_by_name, lambert_family, proper_ckv, table4_family, table_entries,
)
from .catalog.families import PROPER_CKV, TRIG
from .geometry import VectorField, classify_collineation, conformal_factor, laplacian
from .reduction import (
    A1, CLI_NAMES, DERIVED, PRINTED, ReductionCase, ReductionError, closed_form_for, closed_form_potential,
    default_cases, reduce_case, solve, stage_residuals, variable_range, verify_invariant_solution,
)
from .report import FAIL, PASS, Report, dumps, reading_status
from .symexpr import Const, Symbol, add, mul, sample_max_abs, substitute, sx
from .symmetry import (
    constraint_residual, generic_symmetry, lie_condition_residual, noether_condition_residual, wave_mode_check,
)

LIE_TOL = 1e-7
NOETHER_TOL = 1e-7
CLOSED_FORM_TOL = 1e-10
FD_TOL = 1e-4
FD_STEP = 1e-3
NUMERIC_TABLES = (3, 6)    # constraint checked at sampled points with the looser tolerance
NUMERIC_TOL = 1e-8
SAMPLES = 20

FAMILIES = ("general", "lrs", "proper-ckv", "lambert", "conformally-flat-trig", "conformally-flat-hyp")


class UsageError(Exception):
    pass


def _fraction(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def _expr(text):
    try:
        return sx(str(text))
    except Exception as exc:
        raise UsageError(f"cannot parse expression {text!r}: {exc}") from exc


# --- families ------------------------------------------------------------

def build_family(args):
    name = args.family
    try:
        if name == "general":
            return general_diagonal(_expr(args.A or "t"), _expr(args.B or "t^2"), _expr(args.C or "t^3"))
        if name == "lrs":
            return class_a_lrs(_expr(args.A or "t"), _expr(args.B or "t^2"))
        if name == "proper-ckv":
            U = _expr(args.U or "1/t")
            prim = _expr(args.U_primitive) if args.U_primitive else None
            return proper_ckv(_fraction(args.alpha or "1/2"), _fraction(args.beta or "1/3"),
                              _fraction(args.gamma or "1/3"), U, prim)
        if name == "lambert":
            return lambert_family(_fraction(args.alpha or "1"), _fraction(args.beta or "1"),
                                  _fraction(args.gamma or "1"), _fraction(args.c1 or "0"))
        if name == "conformally-flat-trig":
            return conformally_flat_trig()
        if name == "conformally-flat-hyp":
            return conformally_flat_hyp()
    except FamilyError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")


# --- commands -------------------------------------------------------------

def cmd_collineations(args, report: Report):
    fam = build_family(args)
    dom = fam.metric.sample_domain()
    for v in catalog_vectors(fam):
        cls = classify_collineation(fam.metric, v.field, tol=report.tol, seed=report.seed, n=SAMPLES)
        psi_gap = 0.0
        if cls.psi is not None:
            psi_gap = sample_max_abs(add(cls.psi, mul(Const(-1), v.psi)), dom, SAMPLES, report.seed)
        ok = cls.tag == v.tag and psi_gap < report.tol
        report.add(f"{args.family}/{v.label}", f"declared {v.tag}, classified {cls.tag}, psi = {cls.psi}",
                   f"collineations/{fam.variant}", PASS if ok else FAIL, max(cls.residual, psi_gap))


def _coefficients(args, seed):
    if not args.random_coeffs:
        return dict(DEFAULT_COEFFS)
    rng = random.Random(seed)
    return {k: Fraction(rng.randint(1, 9), rng.randint(1, 4)) * rng.choice((1, -1)) for k in sorted(DEFAULT_COEFFS)}


def _check_reading(entry, fam, reading, instances, coeffs, seed, ctol):
    g = entry.generator(fam, coeffs, reading)
    dom = fam.metric.sample_domain()
    worst = {"constraint": 0.0, "lie": 0.0, "noether": 0.0}
    for inst in instances:
        V = entry.potential(fam, inst, coeffs, reading)
        worst["constraint"] = max(worst["constraint"], sample_max_abs(
            constraint_residual(fam.metric, g.xi, g.psi, V), dom, SAMPLES, seed))
        worst["lie"] = max(worst["lie"], lie_condition_residual(fam.metric, V, g, n=SAMPLES, seed=seed).max_residual)
        if entry.noether:
            worst["noether"] = max(worst["noether"],
                                   noether_condition_residual(fam.metric, V, g, n=SAMPLES, seed=seed))
    ok = worst["constraint"] < ctol and worst["lie"] < LIE_TOL and worst["noether"] < NOETHER_TOL
    return ok, max(worst.values()), worst, g


def cmd_verify_tables(args, report: Report):
    tables = [int(t) for t in args.tables.split(",")] if args.tables else list(TABLE_IDS)
    instances = [instance_by_name(n) for n in args.instances.split(",")] if args.instances else list(DEFAULT_INSTANCES)
    coeffs = _coefficients(args, report.seed)
    for tid in tables:
        if tid not in TABLE_IDS:
            raise UsageError(f"unknown table {tid}; expected one of {TABLE_IDS}")
        fam = default_family(tid)
        ctol = max(report.tol, NUMERIC_TOL) if tid in NUMERIC_TABLES else report.tol
        for entry in table_entries(tid):
            if args.row and entry.row != args.row:
                continue
            results = [(r, *_check_reading(entry, fam, r, instances, coeffs, report.seed, ctol))
                       for r in entry.readings]
            primary_ok = results[0][1]
            passing = [res for res in results if res[1]]
            chosen = passing[0] if passing else results[0]
            g = chosen[4]
            wave = wave_mode_check(fam.metric, g.xi, g.psi)
            wave_ok = wave == (tid != 6)
            status = reading_status(primary_ok, bool(passing)) if wave_ok else FAIL
            per_reading = ", ".join(f"{r.name} {res:.2e}" for r, _, res, _, _ in results)
            noether = "noether" if entry.noether else "lie only"
            wave_text = "wave-admissible" if wave else "not wave-admissible"
            report.add(entry.row_id, f"{entry.symmetry_text(chosen[0])}; {per_reading}; {noether}; {wave_text}",
                       f"table-{tid}/row-{entry.row}", status, chosen[2])


def _commutator_families(args):
    if args.family:
        return [(args.family, build_family(args))]
    return [("proper-ckv", table4_family()), ("conformally-flat-trig", conformally_flat_trig())]


def _render_table(name, fam, table):
    labels = [label for label, _ in commutator_basis(fam)]
    width = max(8, max(len(e.text()) for e in table.values()) + 2)
    lines = [f"[{name}]", " " * 8 + "".join(f"{lab:<{width}}" for lab in labels)]
    for i, li in enumerate(labels):
        cells = []
        for j, lj in enumerate(labels):
            if j < i:
                cells.append(f"{'':<{width}}")
            else:
                cells.append(f"{table[(li, lj)].text():<{width}}")
        lines.append(f"{li:<8}" + "".join(cells))
    return lines


def cmd_commutators(args, report: Report):
    for name, fam in _commutator_families(args):
        table = commutator_table(fam, report.seed)
        report.notes.extend(_render_table(name, fam, table))
        tabulated = fam.variant in (PROPER_CKV, TRIG)
        if tabulated:
            try:
                rows = compare_with_expected(fam, report.seed)
            except FamilyError:
                tabulated = False
        if not tabulated:
            rows = [(pair, e, None, e.expanded) for pair, e in table.items() if pair[0] != pair[1]]
        for pair, got, want, match in rows:
            expected = "" if want is None else "; expected " + BracketExpansion(*pair, want, True, 0.0).text()
            report.add(f"{name}/[{pair[0]},{pair[1]}]", f"{got.text()}{expected}", f"commutators/{fam.variant}",
                       PASS if match else FAIL, got.residual)


def reduction_params(args) -> ReductionCase:
    cid = CLI_NAMES.get(args.case)
    if cid is None:
        raise UsageError(f"unknown case {args.case!r}; expected one of {', '.join(CLI_NAMES)}")
    base = default_cases()[cid][args.set - 1]
    params = dict(base.params)
    potential = base.potential
    if cid == A1:
        mu = list(params.get("mu", (0, 0, 0)))
        if args.mu:
            mu = [_fraction(v) for v in args.mu.split(",")]
            if len(mu) != 3:
                raise UsageError("--mu takes three comma-separated values")
        for k in range(3):
            v = getattr(args, f"mu{k + 1}")
            if v is not None:
                mu[k] = _fraction(v)
        params["mu"] = tuple(mu)
        for key in ("A", "B", "C"):
            if getattr(args, key) is not None:
                params[key] = getattr(args, key)
    else:
        for k in range(1, 8):
            v = getattr(args, f"mu{k}")
            if v is not None:
                params[f"mu{k}"] = _fraction(v)
        for key in ("alpha", "beta"):
            if getattr(args, key) is not None:
                params[key] = _fraction(getattr(args, key))
    if args.V is not None:
        potential = _expr(args.V)
        free = sorted(potential.free_symbols)
        if len(free) > 1:
            raise UsageError(f"--V must depend on a single variable, got {free}")
        if free:
            potential = substitute(potential, {free[0]: Symbol("s")})
    if args.closed_form:
        try:
            potential = closed_form_potential(cid, params)
        except ReductionError as exc:
            raise UsageError(str(exc)) from exc
    return ReductionCase(cid, params, potential, args.reading)


def _export_samples(path, red, sol):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(red.grid.names) + ["u"])
        for p in red.grid.points():
            w.writerow([format(v, ".17g") for v in p] + [format(sol(*p), ".17g")])


def cmd_reduce(args, report: Report):
    case = reduction_params(args)
    other = PRINTED if case.reading == DERIVED else DERIVED
    try:
        red = reduce_case(case)
        alt = reduce_case(ReductionCase(case.case_id, case.params, case.potential, other))
    except ReductionError as exc:
        raise UsageError(f"rejected: {exc}") from exc
    cid = case.case_id
    report.notes.append(f"case {cid}: ansatz {red.solution.ansatz_text}")
    report.notes.append(f"reduced ODE in s = {red.ode.name}: ({red.ode.c2}) sigma'' + ({red.ode.c1}) sigma' + ({red.ode.c0}) sigma = 0")
    by_reading = {case.reading: stage_residuals(red, SAMPLES, report.seed),
                  other: stage_residuals(alt, SAMPLES, report.seed)}
    for k, (name, _) in enumerate(by_reading[DERIVED]):
        pr, dr = by_reading[PRINTED][k][1], by_reading[DERIVED][k][1]
        status = reading_status(pr < report.tol, dr < report.tol)
        report.add(f"{cid}.stage.{name}", f"printed {pr:.2e}, derived {dr:.2e}",
                   f"reduction/{cid}/{name}", status, pr if pr < report.tol else dr)
    sigma = closed_form_for(case)
    if sigma is not None:
        lo, hi = variable_range(red, FD_STEP)
        res = sample_max_abs(red.ode.residual_expr(sigma), {"s": (lo, hi)}, SAMPLES, report.seed)
        report.add(f"{cid}.closed-form", f"sigma = {sigma}", f"reduction/{cid}/closed-form",
                   PASS if res < CLOSED_FORM_TOL else FAIL, res)
    try:
        sol = solve(red, FD_STEP)
    except ReductionError as exc:
        raise UsageError(f"rejected: {exc}") from exc
    v = verify_invariant_solution(red.metric, red.V, sol, red.grid, FD_STEP)
    ok = v.residual < FD_TOL and v.richardson
    how = "closed form" if sigma is not None else "RK4"
    report.add(f"{cid}.lifted-residual",
               f"{case.reading} ODE, {how}; h {v.residual:.2e}, h/2 {v.residual_half:.2e}, ratio {v.ratio:.2f}",
               f"reduction/{cid}/lifted", PASS if ok else FAIL, v.residual)
    if args.export_samples:
        _export_samples(args.export_samples, red, sol)


def _generator_from_args(args, fam):
    if args.vector:
        v = next((c for c in catalog_vectors(fam) if c.label == args.vector), None)
        if v is None:
            raise UsageError(f"{args.vector} is not a catalog vector of {args.family}")
        field, psi = v.field, v.psi
    elif args.xi:
        parts = args.xi.split(",")
        if len(parts) != 4:
            raise UsageError("--xi takes four comma-separated components")
        field = VectorField(tuple(_expr(p) for p in parts))
        psi = _expr(args.psi) if args.psi else conformal_factor(fam.metric, field)
    else:
        raise UsageError("residual needs --vector or --xi")
    return generic_symmetry(field, psi, _expr(args.a0 or "0"), _expr(args.b or "0"))


def cmd_residual(args, report: Report):
    fam = build_family(args)
    m = fam.metric
    V = _expr(args.V or "0")
    g = _generator_from_args(args, fam)
    dom = m.sample_domain()
    anchor = f"residual/{fam.variant}"
    cr = sample_max_abs(constraint_residual(m, g.xi, g.psi, V), dom, SAMPLES, report.seed)
    report.add("constraint", f"generator {args.vector or args.xi}, V = {V}", anchor,
               PASS if cr < report.tol else FAIL, cr)
    lie = lie_condition_residual(m, V, g, n=SAMPLES, seed=report.seed).max_residual
    report.add("lie", "on-shell second prolongation", anchor, PASS if lie < LIE_TOL else FAIL, lie)
    no = noether_condition_residual(m, V, g, n=SAMPLES, seed=report.seed)
    report.add("noether", "default gauge from psi and b", anchor, PASS if no < NOETHER_TOL else FAIL, no)
    if args.u:
        u = _expr(args.u)
        kg = sample_max_abs(add(laplacian(m, u), mul(V, u)), dom, SAMPLES, report.seed)
        report.add("kg", f"box u + V u for u = {u}", anchor, PASS if kg < report.tol else FAIL, kg)


def catalog_document(tables=TABLE_IDS) -> dict:
    rows = [e.record() for tid in tables for e in table_entries(tid)]
    vectors = []
    for name, fam in (("general", general_diagonal(sx("t"), sx("t^2"), sx("t^3"))),
                      ("lrs", class_a_lrs(sx("t"), sx("t^2"))), ("proper-ckv", table4_family()),
                      ("conformally-flat-trig", conformally_flat_trig())):
        for v in catalog_vectors(fam):
            vectors.append({"family": name, "label": v.label, "components": [str(c) for c in v.field],
                            "conformal-factor": str(v.psi), "class": v.tag})
    return {"version": __version__, "rows": rows, "vectors": vectors}


# --- argument parsing -------------------------------------------------------

def _global_flags(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d if suppress else 42, help="sampling seed (default 42)")
    parser.add_argument("--tol", type=float, default=d if suppress else 1e-9, help="zero-test tolerance")
    parser.add_argument("--json", action="store_true", default=d if suppress else False,
                        help="print a single JSON report")


def _family_flags(parser, default=None):
    parser.add_argument("--family", default=default, choices=FAMILIES)
    for name in ("A", "B", "C", "U"):
        parser.add_argument(f"--{name}")
    parser.add_argument("--U-primitive", dest="U_primitive")
    for name in ("alpha", "beta", "gamma", "c1"):
        parser.add_argument(f"--{name}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgsym", description="Klein-Gordon point symmetries on Bianchi I metrics")
    parser.add_argument("--version", action="version", version=f"kgsym {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collineations", parents=[common], help="classify catalog vectors")
    _family_flags(p, "general")

    p = sub.add_parser("verify-tables", parents=[common], help="check potential table rows")
    p.add_argument("--tables", help="comma-separated table ids (default all)")
    p.add_argument("--row", type=int, help="restrict to one row number")
    p.add_argument("--instances", help="comma-separated free-function instances (default gaussian,chain)")
    p.add_argument("--random-coeffs", action="store_true", help="draw a, b, c, d from the seed")

    p = sub.add_parser("commutators", parents=[common], help="bracket tables")
    _family_flags(p)

    p = sub.add_parser("reduce", parents=[common], help="run a reduction case")
    p.add_argument("--case", required=True, choices=sorted(CLI_NAMES))
    p.add_argument("--set", type=int, default=1, choices=(1, 2), help="built-in parameter set")
    for k in range(1, 8):
        p.add_argument(f"--mu{k}")
    p.add_argument("--mu", help="A1 translation weights as a,b,c")
    for name in ("alpha", "beta", "A", "B", "C", "V"):
        p.add_argument(f"--{name}")
    p.add_argument("--closed-form", action="store_true")
    p.add_argument("--reading", choices=(DERIVED, PRINTED), default=DERIVED,
                   help="reduced equation used for the lifted solution")
    p.add_argument("--export-samples", metavar="CSV", help="write u on the verification grid")

    p = sub.add_parser("residual", parents=[common], help="check one generator against a potential")
    _family_flags(p, "general")
    p.add_argument("--V", help="potential in t, x, y, z (default 0)")
    p.add_argument("--vector", help="catalog vector label")
    p.add_argument("--xi", help="four comma-separated components")
    p.add_argument("--psi", help="conformal factor (default: computed)")
    p.add_argument("--a0", help="constant part of the u du coefficient")
    p.add_argument("--b", help="inhomogeneous part b(x) du")
    p.add_argument("--u", help="field to test against the Klein-Gordon equation")

    p = sub.add_parser("catalog", parents=[common], help="export the catalog as JSON")
    p.add_argument("--tables", help="comma-separated table ids (default all)")
    p.add_argument("--output", help="write to a file instead of standard output")
    return parser


COMMANDS = {"collineations": cmd_collineations, "verify-tables": cmd_verify_tables,
            "commutators": cmd_commutators, "reduce": cmd_reduce, "residual": cmd_residual}


def run(argv=None) -> tuple:
    """Parse ``argv`` and run the command; returns (exit code, stdout text)."""
    args = build_parser().parse_args(argv)
    if args.command == "catalog":
        tables = tuple(int(t) for t in args.tables.split(",")) if args.tables else TABLE_IDS
        text = dumps(catalog_document(tables))
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text + "\n")
            return 0, ""
        return 0, text
    report = Report(seed=args.seed, tol=args.tol)
    COMMANDS[args.command](args, report)
    return report.exit_code, report.to_json() if args.json else report.to_text()


def main(argv=None) -> int:
    try:
        code, text = run(argv)
    except UsageError as exc:
        print(f"kgsym: {exc}", file=sys.stderr)
        return 2
    if text:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
