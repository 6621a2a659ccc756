"""Point symmetries of the Klein-Gordon equation Delta u + V u = 0.

Generators have the form X = xi^i(x) d_i + (c(x) u + b(x)) d_u with
c = ((2 - n)/2) psi + a0, where xi is a conformal Killing vector with
factor psi.  The module provides the potential constraint, the second
prolongation, the on-shell Lie condition, the Noether condition with its
gauge, and the Noether current.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import COORDS, DiagonalMetric, VectorField, laplacian, laplacian_coefficients, zero_field
from .numerics import central_gradient
from .symexpr import (
    Const, EvalDomainError, Expr, ONE, ZERO, Symbol, add, as_expr, compile_expr, differentiate,
    is_zero_probabilistic, mul, power, sample_max_abs, simplify, substitute,
)

U = "u"
DERIVED, PRINTED = "derived", "printed"
JET_RANGE = (-1.0, 1.0)
JET_TOL = 1e-7


def d1(c: str) -> str:
    return f"u_{c}"


def d2(a: str, b: str, coords: Sequence[str] = COORDS) -> str:
    i, j = sorted((coords.index(a), coords.index(b)))
    return f"u_{coords[i]}{coords[j]}"


@dataclass(frozen=True)
class SymmetryGenerator:
    """X = xi + (eta_u_coeff * u + b) d_u."""

    xi: VectorField
    psi: Expr = ZERO
    a0: Expr = ZERO
    b: Expr = ZERO
    dim: int = 4
    label: str = ""

    @property
    def eta_u_coeff(self) -> Expr:
        return simplify(add(mul(Const(Fraction(2 - self.dim, 2)), self.psi), self.a0))

    @property
    def eta(self) -> Expr:
        return add(mul(self.eta_u_coeff, Symbol(U)), self.b)

    def __add__(self, other: "SymmetryGenerator") -> "SymmetryGenerator":
        return SymmetryGenerator(self.xi + other.xi, add(self.psi, other.psi), add(self.a0, other.a0),
                                 add(self.b, other.b), self.dim)

    def scale(self, c) -> "SymmetryGenerator":
        c = as_expr(c)
        return SymmetryGenerator(self.xi.scale(c), mul(c, self.psi), mul(c, self.a0), mul(c, self.b), self.dim)


def generic_symmetry(xi: VectorField, psi=ZERO, a0=ZERO, b=ZERO, label: str = "") -> SymmetryGenerator:
    xi = xi if isinstance(xi, VectorField) else VectorField(tuple(xi))
    return SymmetryGenerator(xi, simplify(as_expr(psi)), simplify(as_expr(a0)), simplify(as_expr(b)),
                             len(xi), label)


def trivial_symmetry(n: int = 4) -> SymmetryGenerator:
    """u d_u, admitted by every linear homogeneous equation."""
    return generic_symmetry(zero_field(n), ZERO, ONE, ZERO, "u*du")


def generator_bracket(X1: SymmetryGenerator, X2: SymmetryGenerator, coords=COORDS) -> SymmetryGenerator:
    """Commutator of two generators of the affine form xi + (c u + b) d_u.

    The d_u part of [X1, X2] is (xi1(c2) - xi2(c1)) u + xi1(b2) - xi2(b1) + b1 c2 - b2 c1.
    The result is expressed with psi = 0 and the whole u-coefficient in a0.
    """
    from .geometry import lie_bracket

    c1, c2 = X1.eta_u_coeff, X2.eta_u_coeff
    xi = lie_bracket(X1.xi, X2.xi, coords)
    c = add(X1.xi.apply(c2, coords), mul(Const(-1), X2.xi.apply(c1, coords)))
    b = add(X1.xi.apply(X2.b, coords), mul(Const(-1), X2.xi.apply(X1.b, coords)),
            mul(X1.b, c2), mul(Const(-1), X2.b, c1))
    return SymmetryGenerator(xi, ZERO, simplify(c), simplify(b), X1.dim)


# --- potential constraint ----------------------------------------------------

def constraint_residual(m: DiagonalMetric, xi: VectorField, psi: Expr, V: Expr, sign: str = DERIVED) -> Expr:
    """xi^k V_,k + 2 psi V + ((2 - n)/2) Delta psi.

    ``sign="printed"`` flips the Laplacian term to -((2 - n)/2) Delta psi, the
    literal form that only agrees with the derived one when Delta psi = 0.
    For n = 2 the Laplacian term drops out either way.
    """
    V = as_expr(V)
    n = m.dim
    k = Fraction(2 - n, 2)
    if sign == PRINTED:
        k = -k
    elif sign != DERIVED:
        raise ValueError(f"unknown sign convention {sign!r}")
    terms = [xi.apply(V, m.coords), mul(Const(2), psi, V)]
    if k != 0 and psi != ZERO:
        terms.append(mul(Const(k), laplacian(m, psi)))
    return simplify(add(*terms))


def wave_mode_check(m: DiagonalMetric, xi: VectorField, psi: Expr, tol: float = 1e-9, seed: int = 0) -> bool:
    """True iff Delta psi vanishes, i.e. the generator survives for V = 0."""
    if psi == ZERO:
        return True
    return is_zero_probabilistic(laplacian(m, psi), m.sample_domain(), tol=tol, seed=seed)


# --- prolongation ------------------------------------------------------------

def jet_symbols(coords: Sequence[str] = COORDS):
    first = [d1(c) for c in coords]
    second = [d2(coords[i], coords[j], coords) for i in range(len(coords)) for j in range(i, len(coords))]
    return first, second


def _xi_eta(g) -> tuple:
    if isinstance(g, SymmetryGenerator):
        return tuple(g.xi), g.eta
    xi, eta = g
    return tuple(as_expr(c) for c in xi), as_expr(eta)


def prolong2(g, coords: Sequence[str] = COORDS):
    """Coefficients (eta_i, eta_ij) of the second prolongation of g.

    ``g`` is a SymmetryGenerator or a pair (xi, eta) whose entries may depend
    on u as well as on the coordinates.  eta_ij is returned as a dict keyed by
    index pairs i <= j.  The formulas are the standard single-field ones:

      eta_i  = eta_,i + u_i eta_,u - xi^k_,i u_k - xi^k_,u u_i u_k
      eta_ij = eta_,ij + 2 eta_,u(i u_j) - xi^k_,ij u_k + eta_,uu u_i u_j
               - 2 xi^k_,u(i u_j) u_k - xi^k_,uu u_i u_j u_k + eta_,u u_ij
               - 2 xi^k_,(j u_i)k - xi^k_,u (u_k u_ij + 2 u_(j u_i)k)
    """
    xi, eta = _xi_eta(g)
    n = len(coords)
    uj = [Symbol(d1(c)) for c in coords]

    def uu(i, j):
        return Symbol(d2(coords[i], coords[j], coords))

    def D(f, i):
        return differentiate(f, coords[i])

    def Du(f):
        return differentiate(f, U)

    eta_u = Du(eta)
    eta_uu = Du(eta_u)
    xi_u = [Du(c) for c in xi]
    xi_uu = [Du(c) for c in xi_u]
    eta1 = []
    for i in range(n):
        terms = [D(eta, i), mul(uj[i], eta_u)]
        for k in range(n):
            terms.append(mul(Const(-1), D(xi[k], i), uj[k]))
            terms.append(mul(Const(-1), xi_u[k], uj[i], uj[k]))
        eta1.append(simplify(add(*terms)))
    eta2 = {}
    for i in range(n):
        for j in range(i, n):
            terms = [
                D(D(eta, i), j),
                mul(D(eta_u, i), uj[j]), mul(D(eta_u, j), uj[i]),
                mul(eta_uu, uj[i], uj[j]),
                mul(eta_u, uu(i, j)),
            ]
            for k in range(n):
                terms += [
                    mul(Const(-1), D(D(xi[k], i), j), uj[k]),
                    mul(Const(-1), add(mul(D(xi_u[k], i), uj[j]), mul(D(xi_u[k], j), uj[i])), uj[k]),
                    mul(Const(-1), xi_uu[k], uj[i], uj[j], uj[k]),
                    mul(Const(-1), add(mul(D(xi[k], j), uu(i, k)), mul(D(xi[k], i), uu(j, k)))),
                    mul(Const(-1), xi_u[k], add(mul(uj[k], uu(i, j)), mul(uj[j], uu(i, k)), mul(uj[i], uu(j, k)))),
                ]
            eta2[(i, j)] = simplify(add(*terms))
    return eta1, eta2


# --- Klein-Gordon operator and on-shell Lie condition -----------------------

def kg_operator(m: DiagonalMetric, V: Expr) -> Expr:
    """H = sum g^ii u_ii + sum c^i u_i + V u in jet symbols."""
    gi, drift = laplacian_coefficients(m)
    c = m.coords
    terms = [mul(as_expr(V), Symbol(U))]
    for i, x in enumerate(c):
        terms.append(mul(gi[i], Symbol(d2(x, x, c))))
        terms.append(mul(drift[i], Symbol(d1(x))))
    return simplify(add(*terms))


def prolonged_action(m: DiagonalMetric, V: Expr, g) -> Expr:
    """X^(2) H as an expression on the second jet space."""
    xi, eta = _xi_eta(g)
    H = kg_operator(m, V)
    eta1, eta2 = prolong2(g, m.coords)
    c = m.coords
    terms = [mul(xi[k], differentiate(H, c[k])) for k in range(m.dim)]
    terms.append(mul(eta, differentiate(H, U)))
    for i, x in enumerate(c):
        terms.append(mul(eta1[i], differentiate(H, d1(x))))
    for (i, j), e in eta2.items():
        terms.append(mul(e, differentiate(H, d2(c[i], c[j], c))))
    return simplify(add(*terms))


@dataclass(frozen=True)
class LieConditionReport:
    max_residual: float
    lambdas: tuple
    passed: bool
    samples: int = 0


def _jet_arg_names(m: DiagonalMetric):
    first, second = jet_symbols(m.coords)
    return tuple(m.coords) + (U,) + tuple(first) + tuple(second)


def sample_on_shell_jets(m: DiagonalMetric, V: Expr, n: int, seed: int, off_shell: bool = False):
    """Seeded jet points; u_tt is solved from H = 0 unless ``off_shell``."""
    names = _jet_arg_names(m)
    H = kg_operator(m, V)
    c = m.coords
    tt = d2(c[0], c[0], c)
    rest = compile_expr(substitute(H, {tt: ZERO}), names)
    gtt = compile_expr(m.inverse[0], names)
    rng = np.random.default_rng(seed)
    dom = m.sample_domain()
    out = []
    draws = 0
    while len(out) < n:
        draws += 1
        if draws > 10 * n:
            raise RuntimeError("too few admissible jet samples")
        vals = {x: float(rng.uniform(*dom[x])) for x in c}
        for name in names[len(c):]:
            vals[name] = float(rng.uniform(*JET_RANGE))
        vals[tt] = 0.0
        args = [vals[k] for k in names]
        try:
            r = rest(*args)
            a = gtt(*args)
        except EvalDomainError:
            continue
        if not off_shell:
            vals[tt] = -r / a
        out.append(vals)
    return out, names


def lie_condition_residual(m: DiagonalMetric, V: Expr, g, n: int = 20, seed: int = 0,
                           tol: float = JET_TOL) -> LieConditionReport:
    """Max |X^(2) H| over seeded on-shell jet points, plus off-shell lambda estimates."""
    action = prolonged_action(m, V, g)
    H = kg_operator(m, V)
    jets, names = sample_on_shell_jets(m, V, n, seed)
    f = compile_expr(action, names)
    h = compile_expr(H, names)
    worst = 0.0
    for vals in jets:
        args = [vals[k] for k in names]
        assert abs(h(*args)) < 1e-9 * max(1.0, max(abs(a) for a in args))
        worst = max(worst, abs(f(*args)))
    lambdas = []
    for vals in sample_on_shell_jets(m, V, 3, seed + 1, off_shell=True)[0]:
        args = [vals[k] for k in names]
        hv = h(*args)
        if abs(hv) > 1e-6:
            lambdas.append(f(*args) / hv)
    return LieConditionReport(worst, tuple(lambdas), worst < tol, len(jets))


# --- Lagrangian, Noether condition and current ------------------------------

def lagrangian_density(m: DiagonalMetric, V: Expr) -> Expr:
    """(1/2) sqrt(g) g^ij u_i u_j - (1/2) sqrt(g) V u^2."""
    root = m.sqrt_det
    kin = add(*[mul(gi, power(Symbol(d1(x)), Const(2))) for gi, x in zip(m.inverse, m.coords)])
    return simplify(mul(Const(Fraction(1, 2)), root, add(kin, mul(Const(-1), as_expr(V), power(Symbol(U), Const(2))))))


@dataclass(frozen=True)
class NoetherGauge:
    """Gauge vector F^i(x, u) entering X^(1) L + L D_i xi^i = D_i F^i.

    ``components`` are contravariant: F^i = ((2 - n)/4) sqrt(g) g^ij psi_,j u^2,
    plus sqrt(g) g^ij b_,j u when the generator carries a solution part b.
    """

    components: tuple

    def is_zero(self) -> bool:
        return all(c == ZERO for c in self.components)


def noether_gauge(m: DiagonalMetric, psi: Expr, b: Expr = ZERO) -> NoetherGauge:
    root = m.sqrt_det
    k = Const(Fraction(2 - m.dim, 4))
    u = Symbol(U)
    comps = []
    for gi, x in zip(m.inverse, m.coords):
        terms = [mul(k, root, gi, differentiate(psi, x), power(u, Const(2)))]
        if b != ZERO:
            terms.append(mul(root, gi, differentiate(b, x), u))
        comps.append(simplify(add(*terms)))
    return NoetherGauge(tuple(comps))


def _total_d1(f: Expr, x: str) -> Expr:
    """Total derivative on the first jet space (f depends on x, u, u_i)."""
    return add(differentiate(f, x), mul(Symbol(d1(x)), differentiate(f, U)))


def noether_condition_expr(m: DiagonalMetric, V: Expr, g, gauge: NoetherGauge) -> Expr:
    """X^(1) L + L D_i xi^i - D_i F^i; an identity in (x, u, u_i) for Noether symmetries.

    The gauge depends on (x, u) and L on first derivatives, so the u_ij terms
    of D_i F^i and X^(1) L cancel and only first-jet variables remain.
    """
    xi, eta = _xi_eta(g)
    L = lagrangian_density(m, V)
    eta1, _ = _prolong1(xi, eta, m.coords)
    c = m.coords
    terms = [mul(xi[k], differentiate(L, c[k])) for k in range(m.dim)]
    terms.append(mul(eta, differentiate(L, U)))
    for i, x in enumerate(c):
        terms.append(mul(eta1[i], differentiate(L, d1(x))))
    div_xi = add(*[_total_d1(xi[k], c[k]) for k in range(m.dim)])
    terms.append(mul(L, div_xi))
    for i, x in enumerate(c):
        terms.append(mul(Const(-1), _total_d1(gauge.components[i], x)))
    return simplify(add(*terms))


def _prolong1(xi, eta, coords):
    n = len(coords)
    uj = [Symbol(d1(c)) for c in coords]
    eta_u = differentiate(eta, U)
    out = []
    for i in range(n):
        terms = [differentiate(eta, coords[i]), mul(uj[i], eta_u)]
        for k in range(n):
            terms.append(mul(Const(-1), differentiate(xi[k], coords[i]), uj[k]))
            terms.append(mul(Const(-1), differentiate(xi[k], U), uj[i], uj[k]))
        out.append(simplify(add(*terms)))
    return out, None


def noether_condition_residual(m: DiagonalMetric, V: Expr, g, gauge: NoetherGauge | None = None,
                               n: int = 20, seed: int = 0) -> float:
    """Max |X^(1) L + L D_i xi^i - D_i F^i| over seeded first-jet points."""
    if gauge is None:
        psi = g.psi if isinstance(g, SymmetryGenerator) else ZERO
        b = g.b if isinstance(g, SymmetryGenerator) else ZERO
        gauge = noether_gauge(m, psi, b)
    expr = noether_condition_expr(m, V, g, gauge)
    dom = m.sample_domain({U: JET_RANGE, **{d1(x): JET_RANGE for x in m.coords}})
    return sample_max_abs(expr, dom, n, seed)


def noether_current(m: DiagonalMetric, V: Expr, g, gauge: NoetherGauge) -> tuple:
    """I^i = xi^k (u_k dL/du_i - delta^i_k L) - eta dL/du_i + F^i."""
    xi, eta = _xi_eta(g)
    L = lagrangian_density(m, V)
    c = m.coords
    dL = [differentiate(L, d1(x)) for x in c]
    contraction = add(*[mul(xi[k], Symbol(d1(c[k]))) for k in range(m.dim)])
    out = []
    for i in range(m.dim):
        out.append(simplify(add(mul(contraction, dL[i]), mul(Const(-1), xi[i], L),
                                mul(Const(-1), eta, dL[i]), gauge.components[i])))
    return tuple(out)


def current_divergence_on_solution(m: DiagonalMetric, current: Sequence[Expr], u_solution, points,
                                   h: float = 1e-3) -> float:
    """Max over ``points`` of the central-difference divergence sum_i d_i J^i.

    J^i(x) is the current evaluated on the field: I^i(x, u(x), grad u(x)).
    ``u_solution`` is an Expr in the coordinates (derivatives taken exactly)
    or a callable (derivatives by central differences with step h/10).
    """
    c = tuple(m.coords)
    names = c + (U,) + tuple(d1(x) for x in c)
    comps = [compile_expr(I, names) for I in current]
    if isinstance(u_solution, Expr):
        ufn = compile_expr(u_solution, c)
        grads = [compile_expr(differentiate(u_solution, x), c) for x in c]

        def field(*p):
            return [ufn(*p)] + [gr(*p) for gr in grads]
    else:
        def field(*p):
            return [u_solution(*p)] + central_gradient(u_solution, p, h / 10)

    def J(i):
        def fn(*p):
            return comps[i](*p, *field(*p))
        return fn

    worst = 0.0
    for p in points:
        div = 0.0
        for i in range(m.dim):
            fi = J(i)
            q = list(p)
            q[i] = p[i] + h
            fp = fi(*q)
            q[i] = p[i] - h
            fm = fi(*q)
            div += (fp - fm) / (2 * h)
        if not math.isfinite(div):
            return math.inf
        worst = max(worst, abs(div))
    return worst


__all__ = [
    "SymmetryGenerator", "generic_symmetry", "trivial_symmetry", "generator_bracket",
    "constraint_residual", "wave_mode_check", "prolong2", "kg_operator", "prolonged_action",
    "LieConditionReport", "lie_condition_residual", "sample_on_shell_jets", "lagrangian_density",
    "NoetherGauge", "noether_gauge", "noether_condition_expr", "noether_condition_residual",
    "noether_current", "current_divergence_on_solution", "jet_symbols", "d1", "d2", "DERIVED", "PRINTED",
]
