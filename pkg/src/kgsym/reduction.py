"""Symmetry reductions of the Klein-Gordon equation to ordinary differential equations.

Six cases are covered.  A1 is a general diagonal metric with V = V(t),
reduced by the three translations.  A2 is the power-law metric with a
radial potential, reduced by the rotation, the x-translation and the
homothety.  B+x, B-x, B+y and B-y live on the conformally flat trigonometric
metric and are reduced by commuting Killing vectors.

Each case is described by a chain of stages.  A stage records the ansatz
u = prefactor * v(new variables) and the linear operator L acting on v, with

    KG[prefactor * v] = kappa * prefactor * L[v]

holding identically.  Stages are checked with concrete test functions, and
the final stage is the reduced ODE c2 s'' + c1 s' + c0 s = 0.  Every case has
a ``derived`` reading and a ``printed`` reading.  The printed reading
reproduces the published coefficients where those differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .catalog.families import conformally_flat_trig, general_diagonal, power_law
from .geometry import COORDS, DiagonalMetric, laplacian_coefficients
from .numerics import Grid, SecondOrderSolution, fd_kg_residual, richardson_ok
from .symexpr import (
    Const, Expr, ONE, ZERO, Symbol, add, arctan, as_expr, compile_expr, cos, cot, differentiate, exp,
    is_number, ln, mul, power, sample_max_abs, simplify, sin, sqrt, substitute, sx, tan,
)
from .symmetry import SymmetryGenerator

DERIVED, PRINTED = "derived", "printed"
A1, A2, BPX, BMX, BPY, BMY = "A1", "A2", "BplusX", "BminusX", "BplusY", "BminusY"
CASES = (A1, A2, BPX, BMX, BPY, BMY)
CLI_NAMES = {"a1": A1, "a2": A2, "b-plus-x": BPX, "b-minus-x": BMX, "b-plus-y": BPY, "b-minus-y": BMY}
S = Symbol("s")
t, x, y, z = (Symbol(c) for c in COORDS)


class ReductionError(ValueError):
    pass


class UnsupportedGenerator(ReductionError):
    pass


class CommutatorGateError(ReductionError):
    pass


class DegenerateRootError(ReductionError):
    pass


# --- zero-order invariants -----------------------------------------------

def _const(e: Expr):
    e = simplify(e)
    return e if is_number(e) else None


def zero_order_invariants(g: SymmetryGenerator, coords: Sequence[str] = COORDS):
    """Invariants of xi + k u d_u (k constant) for translations, the rotation and scalings.

    The dependent variable is the symbol ``u``.  Results are ordered as the
    untouched coordinates first and the u-invariant last.
    """
    if g.b != ZERO:
        raise UnsupportedGenerator("inhomogeneous generators are not supported")
    k = _const(g.eta_u_coeff)
    if k is None:
        raise UnsupportedGenerator("u-coefficient must be constant")
    u = Symbol("u")
    X = [Symbol(c) for c in coords]
    comps = list(g.xi)
    nonzero = [i for i, c in enumerate(comps) if c != ZERO]
    consts = [_const(c) for c in comps]
    if len(nonzero) == 1 and consts[nonzero[0]] is not None:
        i = nonzero[0]
        a = consts[i]
        rest = [X[j] for j in range(len(X)) if j != i]
        return rest + [simplify(mul(exp(mul(Const(-1), k, power(a, Const(-1)), X[i])), u))]
    y_, z_ = X[2], X[3]
    if nonzero == [2, 3] and comps[2] == z_ and comps[3] == simplify(mul(Const(-1), y_)):
        theta = arctan(mul(z_, power(y_, Const(-1))))
        r2 = add(power(y_, Const(2)), power(z_, Const(2)))
        # z d_y - y d_z lowers arctan(z/y) by one
        return [X[0], X[1], simplify(r2), simplify(mul(exp(mul(k, theta)), u))]
    scal = [simplify(mul(c, power(X[i], Const(-1)))) if c != ZERO else ZERO for i, c in enumerate(comps)]
    if all(is_number(c) for c in scal) and scal[0] != ZERO:
        c0 = scal[0]
        out = [simplify(mul(X[i], power(X[0], mul(Const(-1), scal[i], power(c0, Const(-1))))))
               for i in range(1, len(X))]
        out.append(simplify(mul(power(X[0], mul(Const(-1), k, power(c0, Const(-1)))), u)))
        return out
    raise UnsupportedGenerator(f"no invariant recipe for xi = {tuple(map(str, comps))}")


# --- linear operators and stages --------------------------------------------

@dataclass(frozen=True)
class LinearOperator:
    """sum over multi-indices of coefficient * derivative; () is the zeroth-order term."""

    terms: tuple  # ((index tuple, Expr), ...)

    @classmethod
    def of(cls, mapping: Mapping) -> "LinearOperator":
        items = [(tuple(k), simplify(as_expr(v))) for k, v in mapping.items()]
        items = [(k, v) for k, v in items if v != ZERO]
        return cls(tuple(sorted(items, key=lambda kv: (len(kv[0]), kv[0]))))

    def as_dict(self) -> dict:
        return dict(self.terms)

    @property
    def variables(self):
        return sorted({v for k, _ in self.terms for v in k})

    def apply(self, f: Expr) -> Expr:
        out = []
        for idx, c in self.terms:
            d = f
            for v in idx:
                d = differentiate(d, v)
            out.append(mul(c, d))
        return simplify(add(*out))

    def reduce_translation(self, var: str, mu) -> "LinearOperator":
        """Operator on v after the ansatz exp(mu var) v with v free of var."""
        mu = as_expr(mu)
        new: dict = {}
        for idx, c in self.terms:
            if var in c.free_symbols:
                raise ReductionError(f"coefficient {c} depends on {var}; translation is not a symmetry")
            n = idx.count(var)
            rest = tuple(v for v in idx if v != var)
            new[rest] = add(new.get(rest, ZERO), mul(c, power(mu, Const(n))))
        return LinearOperator.of(new)

    def scaled(self, k) -> "LinearOperator":
        k = as_expr(k)
        return LinearOperator.of({i: mul(k, c) for i, c in self.terms})


def kg_linear_operator(m: DiagonalMetric, V: Expr) -> LinearOperator:
    gi, drift = laplacian_coefficients(m)
    d = {(): V}
    for g, c, name in zip(gi, drift, m.coords):
        d[(name, name)] = g
        d[(name,)] = c
    return LinearOperator.of(d)


@dataclass(frozen=True)
class Stage:
    """u = prefactor * v(variables), with KG[u] = kappa * prefactor * (operator v)(variables)."""

    name: str
    prefactor: Expr
    variables: tuple   # ((new name, Expr in coordinates), ...)
    operator: LinearOperator
    kappa: Expr = ONE


@dataclass(frozen=True)
class ReducedODE:
    """c2(s) sigma'' + c1(s) sigma' + c0(s) sigma = 0 in the variable ``name``."""

    name: str
    c2: Expr
    c1: Expr
    c0: Expr
    singular_points: tuple = ()

    def coefficients(self):
        return self.c2, self.c1, self.c0

    def residual_expr(self, sigma: Expr) -> Expr:
        d1 = differentiate(sigma, "s")
        return simplify(add(mul(self.c2, differentiate(d1, "s")), mul(self.c1, d1), mul(self.c0, sigma)))

    def accel(self) -> Callable:
        c2, c1, c0 = (compile_expr(c, ("s",)) for c in self.coefficients())

        def f(s, v, dv):
            return -(c1(s) * dv + c0(s) * v) / c2(s)
        return f

    def check_interval(self, lo: float, hi: float):
        for p in self.singular_points:
            if lo <= p <= hi:
                raise ReductionError(f"singular point {p} of the reduced equation lies in [{lo}, {hi}]")


def ode_operator(ode: ReducedODE) -> LinearOperator:
    return LinearOperator.of({("s", "s"): ode.c2, ("s",): ode.c1, (): ode.c0})


TEST_FUNCTIONS = ("exp(s/3)", "s^2 + 1", "sin(s)")
MULTI_TESTS = ("exp(t/3 + a1/5 - a2/7)", "t^2*cos(a1) + a2", "sin(t + a1*a2)")


def _test_functions(variables: Sequence[str]):
    """Jet-generic concrete test functions of the stage variables."""
    if list(variables) == ["s"]:
        return [sx(f) for f in TEST_FUNCTIONS]
    names = list(variables)
    out = []
    for k, tmpl in enumerate(MULTI_TESTS):
        e = sx(tmpl)
        mapping = {"t": Symbol(names[0])}
        others = names[1:] + [names[0]] * 2
        mapping["a1"] = Symbol(others[0])
        mapping["a2"] = Symbol(others[1]) if len(names) > 2 else Const(Fraction(k + 1, 3))
        out.append(substitute(e, mapping))
    return out


def stage_residual(m: DiagonalMetric, V: Expr, stage: Stage, domain=None, n: int = 20, seed: int = 0) -> float:
    """Max over samples of |KG[prefactor f(vars)] - kappa prefactor (L f)(vars)|, scaled by |prefactor|."""
    names = [n_ for n_, _ in stage.variables]
    mapping = dict(stage.variables)
    H = kg_linear_operator(m, V)
    dom = domain or m.sample_domain()
    inv_pref = power(stage.prefactor, Const(-1))
    worst = 0.0
    for f in _test_functions(names):
        lifted = mul(stage.prefactor, substitute(f, mapping))
        lhs = H.apply(lifted)
        rhs = mul(stage.kappa, stage.prefactor, substitute(stage.operator.apply(f), mapping))
        diff = simplify(mul(inv_pref, add(lhs, mul(Const(-1), rhs))))
        worst = max(worst, sample_max_abs(diff, dom, n, seed))
    return worst


# --- cases -------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionCase:
    """A reduction scenario.

    ``params`` holds mu1..mu7, alpha, beta and family data as applicable.
    ``potential`` is an Expr in ``s`` giving V as a function of the case's
    reduced argument: V(t) for A1 (written in s), V'(s) for A2, V(s) for the
    B cases.
    """

    case_id: str
    params: dict = field(default_factory=dict)
    potential: Expr = ZERO
    reading: str = DERIVED

    def p(self, key, default=0):
        return self.params.get(key, default)


@dataclass
class InvariantSolution:
    """u(t, x, y, z) = prefactor * sigma(variable)."""

    prefactor: Expr
    variable: Expr
    sigma: object = None       # Expr in s, or a SecondOrderSolution
    ansatz_text: str = ""

    def __post_init__(self):
        self._pref = compile_expr(self.prefactor, COORDS)
        self._var = compile_expr(self.variable, COORDS)
        if isinstance(self.sigma, Expr):
            self._sig = compile_expr(self.sigma, ("s",))
        elif self.sigma is not None:
            self._sig = self.sigma
        else:
            self._sig = None

    def with_sigma(self, sigma) -> "InvariantSolution":
        return InvariantSolution(self.prefactor, self.variable, sigma, self.ansatz_text)

    def __call__(self, *p) -> float:
        return self._pref(*p) * self._sig(self._var(*p))

    def expr(self) -> Expr:
        if not isinstance(self.sigma, Expr):
            raise ReductionError("sigma is numeric; no closed-form lift")
        return simplify(mul(self.prefactor, substitute(self.sigma, {"s": self.variable})))


@dataclass(frozen=True)
class Reduction:
    case: ReductionCase
    metric: DiagonalMetric
    V: Expr                       # full potential in (t, x, y, z)
    stages: tuple
    ode: ReducedODE
    solution: InvariantSolution   # sigma unset until solved
    grid: Grid


def _sqrt_r():
    return sqrt(add(power(y, Const(2)), power(z, Const(2))))


def _as(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, float):
        q = Fraction(v).limit_denominator(10 ** 6)
        if abs(float(q) - v) < 1e-15:
            v = q
    return as_expr(v)


def _reduce_a1(c: ReductionCase, order=("x", "y", "z")) -> Reduction:
    fam = general_diagonal(c.p("A", "t"), c.p("B", "t"), c.p("C", "t"), t_range=c.p("t_range", (0.5, 2.5)))
    m = fam.metric
    Vt = simplify(substitute(c.potential, {"s": t}))
    mus = dict(zip(("x", "y", "z"), (_as(v) for v in c.p("mu", (0, 0, 0)))))
    op = kg_linear_operator(m, Vt)
    stages = []
    pref = ONE
    for var in order:
        op = op.reduce_translation(var, mus[var])
        pref = mul(pref, exp(mul(mus[var], Symbol(var))))
        remaining = [v for v in COORDS if v not in order[: order.index(var) + 1]]
        stages.append(Stage(f"after-{var}", simplify(pref), tuple((v, Symbol(v)) for v in remaining), op))
    d = op.as_dict()
    # divide by the -1 in front of w''
    kappa = Const(-1)
    c2 = simplify(mul(kappa, d.get(("t", "t"), ZERO)))
    c1 = simplify(mul(kappa, d.get(("t",), ZERO)))
    c0 = simplify(mul(kappa, d.get((), ZERO)))
    if c.reading == PRINTED:
        musq = add(*[power(v, Const(2)) for v in mus.values()])
        c0 = simplify(mul(Const(-1), add(Vt, musq)))
    ode = ReducedODE("t", *(substitute(e, {"t": S}) for e in (c2, c1, c0)), singular_points=(0.0,))
    final = Stage("reduced-ode", simplify(pref), (("s", t),), ode_operator(ode), kappa)
    sol = InvariantSolution(simplify(pref), t, None, "exp(mu1 x + mu2 y + mu3 z) w(t)")
    tr = c.p("grid_t", (0.6, 1.4))
    grid = Grid((("t",) + tuple(tr) + (5,), ("x", 0.2, 1.2, 5), ("y", 0.2, 1.2, 5), ("z", 0.2, 1.2, 5)))
    return Reduction(c, m, Vt, tuple(stages) + (final,), ode, sol, grid)


A2_GRID = Grid((("t", 1.0, 1.5, 5), ("x", 0.0, 0.5, 5), ("y", 0.4, 0.7, 5), ("z", 0.4, 0.7, 5)))
A2_DOMAIN = {"t": (1.0, 1.5), "x": (0.0, 0.5), "y": (0.4, 0.7), "z": (0.4, 0.7)}


def _reduce_a2(c: ReductionCase) -> Reduction:
    alpha, beta = _as(c.p("alpha", Fraction(1, 2))), _as(c.p("beta", Fraction(1, 2)))
    mu1, mu4, p = _as(c.p("mu1")), _as(c.p("mu4")), _as(c.p("mu5"))
    if mu1 != ZERO and alpha != ZERO:
        raise CommutatorGateError(
            "the homothety is not inherited after reducing by Y1 + mu1 u du: "
            "[X1, X5'] = alpha Y1, so either mu1 = 0 or alpha = 0 is required")
    fam = power_law(c.p("alpha", Fraction(1, 2)), c.p("beta", Fraction(1, 2)))
    m = DiagonalMetric(fam.metric.scales, domain=A2_DOMAIN)
    printed = c.reading == PRINTED
    r = _sqrt_r()
    R = Symbol("r")
    theta = arctan(mul(z, power(y, Const(-1))))
    zeta2_r = mul(power(R, Const(2)), power(t, mul(Const(-2), beta)))
    Vprime = c.potential
    V = simplify(mul(power(t, Const(-2)), substitute(Vprime, {"s": mul(power(r, Const(2)), power(t, mul(Const(-2), beta)))})))
    mu4_term = mu4 if printed else power(mu4, Const(2))
    Vbar_r = add(substitute(Vprime, {"s": zeta2_r}), mul(mu4_term, power(t, mul(Const(2), beta)), power(R, Const(-2))))
    drift = mul(Const(-1), add(Const(3), mul(Const(-1), alpha), mul(Const(-2), beta)), power(t, Const(-1)))
    tb = power(t, add(mul(Const(2), beta), Const(-2)))
    op1 = LinearOperator.of({("t", "t"): Const(-1), ("x", "x"): power(t, add(mul(Const(2), alpha), Const(-2))),
                             ("r", "r"): tb, ("r",): mul(tb, power(R, Const(-1))), ("t",): drift,
                             (): mul(power(t, Const(-2)), Vbar_r)})
    pref1 = exp(mul(mu4, theta))
    s1 = Stage("after-rotation", pref1, (("t", t), ("x", x), ("r", r)), op1)
    op2 = op1.reduce_translation("x", mu1)
    pref2 = simplify(mul(pref1, exp(mul(mu1, x))))
    s2 = Stage("after-x", pref2, (("t", t), ("r", r)), op2)
    zeta = mul(r, power(t, mul(Const(-1), beta)))
    b2 = power(beta, Const(2))
    c2 = add(ONE, mul(Const(-1), b2, power(S, Const(2))))
    vbar_s = add(substitute(Vprime, {"s": power(S, Const(2))}), mul(mu4_term, power(S, Const(-2))))
    gate = power(mu1, Const(2)) if alpha == ZERO else ZERO
    if printed:
        c1 = add(mul(beta, S, add(Const(2), mul(Const(2), p), mul(Const(-3), beta))), ONE)
        c0 = add(mul(Const(2), beta, p), vbar_s, gate)
    else:
        c1 = add(mul(beta, S, add(Const(2), mul(Const(2), p), mul(Const(-3), beta), mul(Const(-1), alpha))),
                 power(S, Const(-1)))
        c0 = add(vbar_s, gate, mul(Const(2), beta, p),
                 mul(Const(-1), p, add(p, Const(2), mul(Const(-1), alpha))))
    bval = float(beta.value) if is_number(beta) else None
    sing = (0.0,) + ((1.0 / abs(bval),) if bval else ())
    ode = ReducedODE("zeta", simplify(c2), simplify(c1), simplify(c0), sing)
    pref3 = simplify(mul(pref2, power(t, p)))
    s3 = Stage("reduced-ode", pref3, (("s", zeta),), ode_operator(ode), power(t, Const(-2)))
    sol = InvariantSolution(pref3, simplify(zeta), None, "t^mu5 exp(mu1 x + mu4 arctan(z/y)) sigma(sqrt(y^2+z^2) t^-beta)")
    return Reduction(c, m, V, (s1, s2, s3), ode, sol, A2_GRID)


B_DOMAIN = {"t": (0.6, 0.95), "x": (0.2, 0.6), "y": (0.2, 0.6), "z": (0.2, 0.6)}
B_GRID = Grid((("t", 0.6, 0.95, 5), ("x", 0.2, 0.6, 5), ("y", 0.2, 0.6, 5), ("z", 0.2, 0.6, 5)))


def _b_data(c: ReductionCase, printed: bool):
    mu = {k: _as(c.p(k)) for k in ("mu3", "mu4", "mu5", "mu6", "mu7")}
    e = lambda a, b: exp(add(mul(Const(a), x), mul(Const(b), y)))  # noqa: E731
    half_cot = mul(Const(Fraction(-1, 2)), cot(t))
    half_tan = mul(Const(Fraction(1, 2)), tan(t))
    ls, lc = ln(sin(t)), ln(cos(t))
    if c.case_id == BPX:
        var = add(x, ls)
        second = e(1, -1) if printed else e(-1, 1)
        shape = mul(half_cot, add(mul(mu["mu4"], e(-1, -1)), mul(mu["mu5"], second)))
        damp, pair, sgn = 2, mul(mu["mu4"], mu["mu5"]), -2
    elif c.case_id == BMX:
        var = add(x, mul(Const(-1), ls))
        shape = mul(half_cot, add(mul(mu["mu6"], e(1, -1)), mul(mu["mu7"], e(1, 1))))
        damp, pair, sgn = -2, mul(mu["mu6"], mu["mu7"]), 2
    elif c.case_id == BPY:
        var = add(y, lc)
        shape = mul(half_tan, add(mul(mu["mu4"], e(-1, -1)), mul(mu["mu6"], e(1, -1))))
        damp, pair, sgn = 2, mul(mu["mu4"], mu["mu6"]), -2
    else:
        var = add(y, mul(Const(-1), lc))
        shape = mul(half_tan, add(mul(mu["mu5"], e(-1, 1)), mul(mu["mu7"], e(1, 1))))
        damp, pair, sgn = -2, mul(mu["mu5"], mu["mu7"]), 2
    pref = simplify(exp(add(mul(mu["mu3"], z), shape)))
    c0 = add(c.potential, power(mu["mu3"], Const(2)), mul(Const(-1), pair, exp(mul(Const(sgn), S))))
    return mu, simplify(var), pref, ReducedODE("zeta" if damp > 0 else "xi", ONE, Const(damp), simplify(c0))


def _reduce_b(c: ReductionCase) -> Reduction:
    fam = conformally_flat_trig()
    m = DiagonalMetric(fam.metric.scales, domain=B_DOMAIN)
    mu, var, pref, ode = _b_data(c, c.reading == PRINTED)
    V = simplify(substitute(c.potential, {"s": var}))
    op0 = kg_linear_operator(m, V).reduce_translation("z", mu["mu3"])
    s1 = Stage("after-z", exp(mul(mu["mu3"], z)), (("t", t), ("x", x), ("y", y)), op0)
    s2 = Stage("reduced-ode", pref, (("s", var),), ode_operator(ode), ONE)
    sol = InvariantSolution(pref, var, None, f"sigma({var}) * {pref}")
    return Reduction(c, m, V, (s1, s2), ode, sol, B_GRID)


def reduce_case(c: ReductionCase, order=("x", "y", "z")) -> Reduction:
    if c.case_id == A1:
        return _reduce_a1(c, order)
    if c.case_id == A2:
        return _reduce_a2(c)
    if c.case_id in (BPX, BMX, BPY, BMY):
        return _reduce_b(c)
    raise ReductionError(f"unknown case {c.case_id!r}; expected one of {CASES}")


def stage_residuals(red: Reduction, n: int = 20, seed: int = 0) -> list:
    return [(s.name, stage_residual(red.metric, red.V, s, red.metric.sample_domain(), n, seed)) for s in red.stages]


# --- solving and lifting -------------------------------------------------------

def closed_form_sigma(mu3, sigma1=1.0, sigma2=0.0, allow_degenerate: bool = False) -> Expr:
    """Solution of sigma'' + 2 sigma' + mu3^2 sigma = 0 as an Expr in s.

    Distinct real roots -1 +- sqrt(1 - mu3^2) give exponentials; |mu3| > 1
    gives the damped oscillation exp(-s)(sigma1 cos(w s) + sigma2 sin(w s))
    with w = sqrt(mu3^2 - 1).  The repeated root |mu3| = 1 is rejected unless
    ``allow_degenerate``, which yields (sigma1 + sigma2 s) exp(-s).
    """
    m3 = float(mu3)
    disc = 1.0 - m3 * m3
    s1, s2 = _as(sigma1), _as(sigma2)
    if disc == 0.0:
        if not allow_degenerate:
            raise DegenerateRootError("|mu3| = 1 gives a repeated root")
        return simplify(mul(add(s1, mul(s2, S)), exp(mul(Const(-1), S))))
    if disc > 0:
        q = _as(disc)
        rt = sqrt(q)
        return simplify(add(mul(s1, exp(mul(add(Const(-1), rt), S))),
                            mul(s2, exp(mul(add(Const(-1), mul(Const(-1), rt)), S)))))
    w = sqrt(_as(-disc))
    return simplify(mul(exp(mul(Const(-1), S)), add(mul(s1, cos(mul(w, S))), mul(s2, sin(mul(w, S))))))


def variable_range(red: Reduction, h: float) -> tuple:
    """Range of the reduced variable over the grid plus its FD stencil."""
    f = compile_expr(red.solution.variable, COORDS)
    lo, hi = math.inf, -math.inf
    for p in red.grid.points():
        for i in range(4):
            for d in (-h, 0.0, h):
                q = list(p)
                q[i] += d
                v = f(*q)
                lo, hi = min(lo, v), max(hi, v)
    return lo, hi


def solve_numeric(red: Reduction, s0: float = 1.0, ds0: float = 0.5, step: float = 1e-3, h: float = 1e-3,
                  pad: float = 0.05) -> InvariantSolution:
    """Integrate the reduced ODE with RK4 over the grid's variable range and lift."""
    lo, hi = variable_range(red, h)
    lo, hi = lo - pad, hi + pad
    red.ode.check_interval(lo, hi)
    sol = SecondOrderSolution(red.ode.accel(), lo, hi, s0, ds0, step)
    return red.solution.with_sigma(sol)


def solve_closed(red: Reduction, sigma: Expr) -> InvariantSolution:
    return red.solution.with_sigma(sigma)


@dataclass(frozen=True)
class VerificationResult:
    residual: float
    residual_half: float
    richardson: bool

    @property
    def ratio(self) -> float:
        return self.residual / self.residual_half if self.residual_half else math.inf


def _fd_max(m: DiagonalMetric, V: Expr, u: Callable, grid: Grid, h: float) -> float:
    gi, drift = laplacian_coefficients(m)
    gi_f = [compile_expr(g, COORDS) for g in gi]
    dr_f = [compile_expr(d, COORDS) for d in drift]
    v_f = compile_expr(V, COORDS)
    worst = 0.0
    for p in grid.points():
        r = fd_kg_residual(u, p, [g(*p) for g in gi_f], [d(*p) for d in dr_f], v_f(*p), h)
        if not math.isfinite(r):
            return math.inf
        worst = max(worst, abs(r))
    return worst


def verify_invariant_solution(m: DiagonalMetric, V: Expr, u: Callable, grid: Grid, h: float = 1e-3) -> VerificationResult:
    """Normalized FD residual of KG on ``grid`` at h and h/2, plus the Richardson trend check."""
    r1 = _fd_max(m, V, u, grid, h)
    r2 = _fd_max(m, V, u, grid, h / 2)
    return VerificationResult(r1, r2, richardson_ok(r1, r2))


def default_cases():
    """Two parameter sets per case; the first B set uses the closed-form potential where one exists."""
    e = sx
    return {
        A1: [ReductionCase(A1, {"A": "t", "B": "t", "C": "t", "mu": (1, 0, 0)}, ZERO),
             ReductionCase(A1, {"A": "t", "B": "t^2", "C": "t^3", "mu": (Fraction(1, 2), Fraction(3, 10), Fraction(-1, 5))},
                           e("1/s^2"))],
        A2: [ReductionCase(A2, {"alpha": Fraction(1, 2), "beta": Fraction(1, 2), "mu1": 0, "mu4": Fraction(7, 10),
                                "mu5": Fraction(3, 10)}, e("exp(-s)")),
             ReductionCase(A2, {"alpha": 0, "beta": Fraction(1, 2), "mu1": Fraction(3, 5), "mu4": Fraction(2, 5),
                                "mu5": Fraction(-1, 5)}, e("exp(-s)"))],
        BPX: [ReductionCase(BPX, {"mu3": Fraction(1, 2), "mu4": 1, "mu5": 1}, e("exp(-2*s)")),
              ReductionCase(BPX, {"mu3": Fraction(3, 10), "mu4": Fraction(1, 2), "mu5": Fraction(-1, 2)},
                            e("exp(-s^2)/2"))],
        BMX: [ReductionCase(BMX, {"mu3": Fraction(1, 2), "mu6": Fraction(1, 2), "mu7": Fraction(1, 5)},
                            e("(1/10)*exp(2*s) - 1/4")),
              ReductionCase(BMX, {"mu3": Fraction(1, 5), "mu6": Fraction(1, 10), "mu7": Fraction(-1, 10)},
                            e("exp(-s^2)/2"))],
        BPY: [ReductionCase(BPY, {"mu3": Fraction(3, 2), "mu4": Fraction(1, 2), "mu6": Fraction(1, 5)},
                            e("(1/10)*exp(-2*s)")),
              ReductionCase(BPY, {"mu3": Fraction(1, 5), "mu4": Fraction(3, 10), "mu6": Fraction(2, 5)},
                            e("exp(-s^2)/2"))],
        BMY: [ReductionCase(BMY, {"mu3": Fraction(1, 2), "mu5": Fraction(-1, 10), "mu7": Fraction(1, 10)},
                            e("(-1/100)*exp(2*s) - 1/4")),
              ReductionCase(BMY, {"mu3": Fraction(1, 5), "mu5": Fraction(-1, 10), "mu7": Fraction(1, 10)},
                            e("exp(-s^2)/2"))],
    }


def _same_function(a: Expr, b: Expr) -> bool:
    return sample_max_abs(add(a, mul(Const(-1), b)), {"s": (-3.0, 3.0)}, 20, 0) < 1e-12


def closed_form_potential(case_id: str, params: Mapping) -> Expr:
    """Potential V(s) that cancels the exponential term of a B-case reduced ODE.

    Plus cases then reduce to the damped oscillator sigma'' + 2 sigma' + mu3^2 sigma = 0,
    minus cases to sigma'' - 2 sigma' = 0.
    """
    mu = {k: _as(params.get(k, 0)) for k in ("mu3", "mu4", "mu5", "mu6", "mu7")}
    if case_id in (BPX, BPY):
        partner = mu["mu5"] if case_id == BPX else mu["mu6"]
        return simplify(mul(mu["mu4"], partner, exp(mul(Const(-2), S))))
    if case_id in (BMX, BMY):
        first = mu["mu6"] if case_id == BMX else mu["mu5"]
        return simplify(add(mul(first, mu["mu7"], exp(mul(Const(2), S))), mul(Const(-1), power(mu["mu3"], Const(2)))))
    raise ReductionError(f"case {case_id} has no closed-form potential")


def closed_form_for(c: ReductionCase):
    """Closed-form sigma when the potential cancels the exponential term, else None."""
    if c.case_id not in (BPX, BMX, BPY, BMY):
        return None
    if not _same_function(c.potential, closed_form_potential(c.case_id, c.params)):
        return None
    if c.case_id in (BPX, BPY):
        return closed_form_sigma(_as(c.p("mu3")).value, 1, Fraction(1, 2), allow_degenerate=True)
    return simplify(add(ONE, mul(Const(Fraction(1, 10)), exp(mul(Const(2), S)))))


def solve(red: Reduction, h: float = 1e-3) -> InvariantSolution:
    sigma = closed_form_for(red.case)
    if sigma is not None:
        return solve_closed(red, sigma)
    return solve_numeric(red, h=h)


__all__ = [
    "ReductionCase", "ReducedODE", "InvariantSolution", "Reduction", "Stage", "LinearOperator",
    "zero_order_invariants", "reduce_case", "stage_residual", "stage_residuals", "kg_linear_operator",
    "closed_form_sigma", "closed_form_for", "closed_form_potential", "solve", "solve_numeric", "solve_closed",
    "verify_invariant_solution", "VerificationResult", "default_cases", "variable_range",
    "ReductionError", "UnsupportedGenerator", "CommutatorGateError", "DegenerateRootError",
    "CASES", "CLI_NAMES", "A1", "A2", "BPX", "BMX", "BPY", "BMY", "DERIVED", "PRINTED",
]
