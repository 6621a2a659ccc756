"""Commutator tables of catalog generators, expanded in the catalog basis."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..symexpr import Const, add, compile_expr, mul, sample_max_abs
from ..symmetry import SymmetryGenerator, generator_bracket, generic_symmetry
from .families import PROPER_CKV, TRIG, BianchiFamily, FamilyError
from .vectors import catalog_vectors

SAMPLES = 24


@dataclass(frozen=True)
class BracketExpansion:
    left: str
    right: str
    coefficients: dict   # label -> Fraction, nonzero entries only
    expanded: bool
    residual: float

    def text(self) -> str:
        if not self.expanded:
            return "not in span"
        if not self.coefficients:
            return "0"
        parts = []
        for label, q in self.coefficients.items():
            if q == 1:
                parts.append(label)
            elif q == -1:
                parts.append(f"-{label}")
            else:
                parts.append(f"{q}*{label}")
        return " + ".join(parts).replace("+ -", "- ")


def commutator_basis(family: BianchiFamily):
    """Generators whose brackets are tabulated, as (label, SymmetryGenerator).

    For the proper-CKV family the conformal vector enters as X5 = Y5 - psi u du.
    For the conformally flat trig metric only the Killing subalgebra is used.
    """
    out = []
    for v in catalog_vectors(family):
        if family.variant == TRIG and v.label.startswith("C"):
            continue
        label = "X5" if v.label == "Y5" else v.label
        out.append((label, generic_symmetry(v.field, v.psi, label=label)))
    return out


def _components(g: SymmetryGenerator):
    return tuple(g.xi) + (g.eta_u_coeff, g.b)


def _sample_matrix(exprs, dom, pts):
    names = tuple(sorted(dom))
    fs = [compile_expr(e, names) for e in exprs]
    return np.array([[f(*p) for p in pts] for f in fs])


def _points(dom, seed):
    rng = np.random.default_rng(seed)
    names = sorted(dom)
    return [tuple(float(rng.uniform(*dom[k])) for k in names) for _ in range(SAMPLES)]


def expand_in_basis(target: SymmetryGenerator, basis, dom, seed: int = 0, tol: float = 1e-9):
    """Least-squares coefficients of ``target`` over ``basis`` at seeded points.

    The rounded rational coefficients are then checked by a zero test of
    target - sum(q_k basis_k); failure means the bracket is not in the span.
    """
    pts = _points(dom, seed)
    cols = []
    for _, g in basis:
        cols.append(np.concatenate([_sample_matrix([c], dom, pts)[0] for c in _components(g)]))
    rhs = np.concatenate([_sample_matrix([c], dom, pts)[0] for c in _components(target)])
    M = np.array(cols).T
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    coeffs = {}
    for (label, _), v in zip(basis, sol):
        q = Fraction(float(v)).limit_denominator(1000)
        if q != 0:
            coeffs[label] = q
    diff = list(_components(target))
    by_label = dict(basis)
    for label, q in coeffs.items():
        comps = _components(by_label[label])
        diff = [add(d, mul(Const(-q), c)) for d, c in zip(diff, comps)]
    worst = 0.0
    ok = True
    for d in diff:
        r = sample_max_abs(d, dom, 20, seed)
        worst = max(worst, r)
        ok = ok and r < tol
    return coeffs, ok, worst


def commutator_table(family: BianchiFamily, seed: int = 0):
    """Upper-triangle bracket expansions {(left, right): BracketExpansion}."""
    basis = commutator_basis(family)
    dom = family.metric.sample_domain()
    out = {}
    for i, (li, gi) in enumerate(basis):
        for lj, gj in basis[i:]:
            br = generator_bracket(gi, gj)
            coeffs, ok, res = expand_in_basis(br, basis, dom, seed)
            out[(li, lj)] = BracketExpansion(li, lj, coeffs if ok else {}, ok, res)
    return out


def expected_table(family: BianchiFamily) -> dict:
    """Published nonzero brackets for the two tabulated families (zero elsewhere)."""
    if family.variant == PROPER_CKV:
        alpha, beta, gamma = family.exponents()
        if beta != gamma:
            raise FamilyError("the tabulated proper-CKV brackets assume beta = gamma")
        return {("Y1", "X5"): {"Y1": Fraction(alpha)}, ("Y2", "Y4"): {"Y3": Fraction(-1)},
                ("Y2", "X5"): {"Y2": Fraction(beta)}, ("Y3", "Y4"): {"Y2": Fraction(1)},
                ("Y3", "X5"): {"Y3": Fraction(beta)}}
    if family.variant == TRIG:
        one = Fraction(1)
        return {
            ("Y1", "Y4bar"): {"Y4bar": one}, ("Y1", "Y5bar"): {"Y5bar": one},
            ("Y1", "Y6bar"): {"Y6bar": -one}, ("Y1", "Y7bar"): {"Y7bar": -one},
            ("Y2", "Y4bar"): {"Y4bar": one}, ("Y2", "Y5bar"): {"Y5bar": -one},
            ("Y2", "Y6bar"): {"Y6bar": one}, ("Y2", "Y7bar"): {"Y7bar": -one},
            ("Y4bar", "Y7bar"): {"Y1": Fraction(-4), "Y2": Fraction(-4)},
            ("Y5bar", "Y6bar"): {"Y1": Fraction(-4), "Y2": Fraction(4)},
        }
    raise FamilyError(f"no tabulated commutators for {family.variant}")


def compare_with_expected(family: BianchiFamily, seed: int = 0):
    """[(pair, computed, expected, match)] over the strict upper triangle."""
    table = commutator_table(family, seed)
    expected = expected_table(family)
    rows = []
    for pair, exp in table.items():
        if pair[0] == pair[1]:
            continue
        want = expected.get(pair, {})
        rows.append((pair, exp, want, exp.expanded and exp.coefficients == want))
    return rows


__all__ = ["BracketExpansion", "commutator_basis", "expand_in_basis", "commutator_table", "expected_table",
           "compare_with_expected"]
