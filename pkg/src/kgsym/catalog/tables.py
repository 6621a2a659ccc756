"""Potential classification tables.

Each row pairs a potential template with the symmetry generator it admits.
Templates are kept as text over the parameters a, b, c, d, the exponents
alpha, beta, gamma, the barred scale factors Abar, Bbar, Cbar and U, and are
instantiated against a family, coefficient values and a free-function
instance.  A template is

    V = base + scale * F(arg_1, ..., arg_k)

Rows whose printed form does not check out carry a second, corrected
reading.  Both are kept so the verifier can report which one passes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from ..symexpr import Expr, ZERO, add, as_expr, mul, simplify, substitute, sx
from ..symmetry import SymmetryGenerator, generic_symmetry
from .families import PROPER_CKV, BianchiFamily, table1_family, table2_family, table3_family, conformally_flat_trig
from .free_functions import FreeFunctionInstance
from .vectors import vector_by_label

PRINTED, CORRECTED = "printed", "corrected"
DEFAULT_COEFFS = {"a": Fraction(1), "b": Fraction(2), "c": Fraction(3), "d": Fraction(5)}
TABLE_IDS = (1, 2, 3, 5, 6)


@dataclass(frozen=True)
class Reading:
    """One way of reading a row: template pieces plus the u-part of the generator."""

    name: str
    args: tuple
    base: str = "0"
    scale: str = "1"
    a0: str = "0"
    b: str = "0"

    def template_text(self) -> str:
        core = f"F({', '.join(self.args)})"
        if self.scale != "1":
            core = f"({self.scale})*{core}"
        return core if self.base == "0" else f"{self.base} + {core}"


@dataclass(frozen=True)
class PotentialTableEntry:
    table: int
    row: int
    combination: tuple
    noether: bool
    readings: tuple
    note: str = ""

    @property
    def row_id(self) -> str:
        return f"T{self.table}.R{self.row}"

    @property
    def suspect(self) -> bool:
        return len(self.readings) > 1

    @property
    def labels(self) -> tuple:
        return tuple(label for _, label in self.combination)

    def reading(self, name: str = PRINTED) -> Reading:
        for r in self.readings:
            if r.name == name:
                return r
        raise KeyError(f"{self.row_id} has no {name} reading")

    @property
    def preferred(self) -> Reading:
        return self.readings[-1]

    def symmetry_text(self, reading: Reading | None = None) -> str:
        reading = reading or self.preferred
        parts = [label if coef == "1" else f"{coef}*{label}" for coef, label in self.combination]
        if self.table in (3, 6):
            coef = self.combination[-1][0]
            parts.append(f"-{'' if coef == '1' else coef + '*'}psi*u*du")
        if reading.a0 != "0":
            parts.append("u*du" if reading.a0 == "1" else f"{reading.a0}*u*du")
        if reading.b != "0":
            parts.append("du" if reading.b == "1" else f"{reading.b}*du")
        return " + ".join(parts).replace("+ -", "- ")

    # --- instantiation ---------------------------------------------------

    def bindings(self, family: BianchiFamily, coeffs: Mapping | None = None) -> dict:
        values = {k: as_expr(v) for k, v in (coeffs or DEFAULT_COEFFS).items()}
        if family.variant == PROPER_CKV:
            alpha, beta, gamma = family.exponents()
            values.update(alpha=as_expr(alpha), beta=as_expr(beta), gamma=as_expr(gamma),
                          Abar=family.bar_scale("alpha"), Bbar=family.bar_scale("beta"),
                          Cbar=family.bar_scale("gamma"), U=family.U)
        return values

    def _instantiate(self, text: str, values: Mapping) -> Expr:
        e = sx(text)
        return simplify(substitute(e, {k: v for k, v in values.items() if k in e.free_symbols}))

    def arguments(self, family: BianchiFamily, coeffs=None, reading: Reading | None = None) -> tuple:
        reading = reading or self.preferred
        values = self.bindings(family, coeffs)
        return tuple(self._instantiate(a, values) for a in reading.args)

    def potential(self, family: BianchiFamily, instance: FreeFunctionInstance, coeffs=None,
                  reading: Reading | None = None) -> Expr:
        reading = reading or self.preferred
        values = self.bindings(family, coeffs)
        args = [self._instantiate(a, values) for a in reading.args]
        base = self._instantiate(reading.base, values)
        scale = self._instantiate(reading.scale, values)
        return simplify(add(base, mul(scale, instance(args))))

    def generator(self, family: BianchiFamily, coeffs=None, reading: Reading | None = None) -> SymmetryGenerator:
        reading = reading or self.preferred
        values = self.bindings(family, coeffs)
        g = generic_symmetry((ZERO,) * 4, ZERO, self._instantiate(reading.a0, values),
                             self._instantiate(reading.b, values), self.symmetry_text(reading))
        for coef, label in self.combination:
            v = vector_by_label(family, label)
            g = g + generic_symmetry(v.field, v.psi).scale(self._instantiate(coef, values))
        return SymmetryGenerator(g.xi, simplify(g.psi), simplify(g.a0), simplify(g.b), 4,
                                 self.symmetry_text(reading))

    def record(self) -> dict:
        return {
            "table": self.table,
            "row": self.row,
            "template-text": self.preferred.template_text(),
            "printed-template-text": self.readings[0].template_text(),
            "symmetry": self.symmetry_text(),
            "symmetry-labels": list(self.labels),
            "coefficients": [coef for coef, _ in self.combination],
            "noether": self.noether,
        }


def _row(table, row, combo, args, *, noether=True, corrected=None, base="0", scale="1", note="", **extra):
    combo = tuple((c, l) for c, l in combo)
    readings = [Reading(PRINTED, tuple(args), base, scale, **extra.get("printed_u", {}))]
    if corrected is not None:
        cargs = corrected.get("args", args)
        readings.append(Reading(CORRECTED, tuple(cargs), corrected.get("base", base),
                                corrected.get("scale", scale), corrected.get("a0", "0"), corrected.get("b", "0")))
    return PotentialTableEntry(table, row, combo, noether, tuple(readings), note)


R2 = "(y^2+z^2)"
HALF_R2 = "(1/2)*(y^2+z^2)"

TABLE_1 = (
    _row(1, 1, (), ("t", "x", "y", "z"), noether=False, printed_u={"b": "1"}, corrected={"a0": "1"},
         note="trivial symmetry printed as du; u*du is the generator admitted for every V"),
    _row(1, 2, [("1", "Y1")], ("t", "y", "z")),
    _row(1, 3, [("1", "Y2")], ("t", "x", "z")),
    _row(1, 4, [("1", "Y3")], ("t", "x", "y")),
    _row(1, 5, [("a", "Y1"), ("b", "Y2")], ("t", "y-(b/a)*x", "z")),
    _row(1, 6, [("a", "Y1"), ("b", "Y3")], ("t", "z-(b/a)*x", "y")),
    _row(1, 7, [("a", "Y2"), ("b", "Y3")], ("t", "x", "z-(b/a)*y")),
    _row(1, 8, [("a", "Y1"), ("b", "Y2"), ("c", "Y3")], ("t", "y-(b/a)*x", "z-(c/a)*x")),
)

TABLE_2 = (
    _row(2, 1, [("1", "Y4")], ("t", "x", R2)),
    _row(2, 2, [("a", "Y1"), ("b", "Y4")], ("t", "x-(a/b)*arctan(y/z)", R2)),
    _row(2, 3, [("a", "Y2"), ("b", "Y4")], ("t", "x", f"{HALF_R2}+(a/b)*z")),
    _row(2, 4, [("a", "Y3"), ("b", "Y4")], ("t", "x", f"{HALF_R2}+(a/b)*y"),
         corrected={"args": ("t", "x", f"{HALF_R2}-(a/b)*y")}),
    _row(2, 5, [("a", "Y1"), ("b", "Y2"), ("c", "Y4")], ("t", "x-(a/c)*arctan(c*y/(b+c*z))", f"{HALF_R2}+(b/c)*z")),
    _row(2, 6, [("a", "Y1"), ("b", "Y3"), ("c", "Y4")], ("t", "x-(a/c)*arctan((c*y-b)/(c*z))", f"{HALF_R2}+(b/c)*y"),
         corrected={"args": ("t", "x-(a/c)*arctan((c*y-b)/(c*z))", f"{HALF_R2}-(b/c)*y")}),
    _row(2, 7, [("a", "Y2"), ("b", "Y3"), ("c", "Y4")], ("t", "x", f"(c/2)*{R2}-(b*y-a*z)")),
    _row(2, 8, [("a", "Y1"), ("b", "Y2"), ("c", "Y3"), ("d", "Y4")],
         ("t", "x-(a/d)*arctan((d*y-c)/(d*z+c))", f"(d/2)*{R2}-(c*y-b*z)"),
         corrected={"args": ("t", "x-(a/d)*arctan((d*y-c)/(d*z+b))", f"(d/2)*{R2}-(c*y-b*z)")}),
)

_XA, _YB, _ZC = "x*Abar", "y*Bbar", "z*Cbar"
TABLE_3 = tuple(
    _row(3, i, combo, args, scale="U^2", corrected=({"args": fix} if fix else None))
    for i, combo, args, fix in (
        (1, [("1", "Y5")], (_XA, _YB, _ZC), None),
        (2, [("a", "Y1"), ("b", "Y5")], ("(x+(1/alpha)*(a/b))*Abar", _YB, _ZC), None),
        (3, [("a", "Y2"), ("b", "Y5")], (_XA, "(y+(1/beta)*(a/b))*y*Bbar", _ZC),
         (_XA, "(y+(1/beta)*(a/b))*Bbar", _ZC)),
        (4, [("a", "Y3"), ("b", "Y5")], (_XA, _YB, "(z+(1/gamma)*(a/b))*Cbar"), None),
        (5, [("a", "Y1"), ("b", "Y2"), ("c", "Y5")],
         ("(x+(1/alpha)*(a/c))*Abar", "(y+(1/beta)*(b/c))*Bbar", _ZC), None),
        (6, [("a", "Y1"), ("b", "Y3"), ("c", "Y5")],
         ("(x+(1/alpha)*(a/c))*Abar", _YB, "(z+(1/gamma)*(b/c))*Cbar"), None),
        (7, [("a", "Y2"), ("b", "Y3"), ("c", "Y5")],
         (_XA, "(y+(1/b)*(a/c))*Bbar", "(z+(1/gamma)*(b/c))*Cbar"),
         (_XA, "(y+(1/beta)*(a/c))*Bbar", "(z+(1/gamma)*(b/c))*Cbar")),
        (8, [("a", "Y1"), ("b", "Y2"), ("c", "Y3"), ("d", "Y5")],
         ("(x+(1/alpha)*(a/d))*Abar", "(y+(1/beta)*(b/d))*Bbar", "(z+(1/gamma)*(c/d))*Cbar"), None),
    )
)

TABLE_5 = (
    _row(5, 1, [("1", "Y4bar")], ("x+ln(sin(t))", "y+ln(cos(t))", "z")),
    _row(5, 2, [("1", "Y5bar")], ("x+ln(sin(t))", "y-ln(cos(t))", "z")),
    _row(5, 3, [("1", "Y6bar")], ("x-ln(sin(t))", "y+ln(cos(t))", "z")),
    _row(5, 4, [("1", "Y7bar")], ("x-ln(sin(t))", "y-ln(cos(t))", "z")),
)

_RT = "((1-cos(2*t))/sin(2*t))"


def _table6():
    rows = []
    i = 0
    for k, third in (("1", "cos(t)/sin(z)"), ("2", "cos(t)/cos(z)")):
        for s, tag in (("+", "p"), ("-", "m")):
            i += 1
            rows.append(_row(6, i, [("1", f"C{k}{tag}x")], (f"x{s}ln{_RT}", "y", third),
                             base="1-1/(2*cos(t)^2)", scale="1/cos(t)^2"))
    for k, third in (("1", "sin(t)/cos(z)"), ("2", "sin(t)/sin(z)")):
        for s, tag in (("-", "p"), ("+", "m")):
            i += 1
            rows.append(_row(6, i, [("1", f"C{k}{tag}y")], ("x", f"y{s}{_RT}", third),
                             base="1-1/(2*sin(t)^2)", scale="1/sin(t)^2",
                             corrected={"args": ("x", f"y{s}ln{_RT}", third)}))
    return tuple(rows)


TABLE_6 = _table6()

TABLES = {1: TABLE_1, 2: TABLE_2, 3: TABLE_3, 5: TABLE_5, 6: TABLE_6}


def default_family(table_id: int) -> BianchiFamily:
    return {1: table1_family, 2: table2_family, 3: table3_family,
            5: conformally_flat_trig, 6: conformally_flat_trig}[table_id]()


def table_entries(table_id: int):
    try:
        return TABLES[table_id]
    except KeyError:
        raise ValueError(f"no potential table {table_id}; choose from {TABLE_IDS}") from None


def all_entries():
    return [e for t in TABLE_IDS for e in TABLES[t]]


__all__ = ["Reading", "PotentialTableEntry", "table_entries", "all_entries", "default_family",
           "TABLES", "TABLE_IDS", "DEFAULT_COEFFS", "PRINTED", "CORRECTED"]
