"""Bianchi I metric families and their canonical verification instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..geometry import DiagonalMetric
from ..symexpr import (
    Const, Expr, ONE, ZERO, Symbol, as_expr, differentiate, exp, is_zero_probabilistic, lambert_w, ln,
    mul, power, simplify, sx,
)

T = Symbol("t")

GENERAL, LRS, PROPER_CKV, TRIG, HYP = (
    "GeneralDiagonal", "ClassA_LRS", "ProperCkvFamily", "ConformallyFlatTrig", "ConformallyFlatHyp",
)

SPATIAL = (0.2, 1.3)


class FamilyError(ValueError):
    pass


@dataclass(frozen=True)
class BianchiFamily:
    """A Bianchi I metric -dt^2 + A^2 dx^2 + B^2 dy^2 + C^2 dz^2 with its data.

    For the proper-CKV family ``U`` and its primitive are kept, together
    with the exponents (alpha, beta, gamma) of the scale factors.
    """

    variant: str
    metric: DiagonalMetric
    params: dict = field(default_factory=dict)
    U: Expr | None = None
    U_primitive: Expr | None = None
    label: str = ""

    @property
    def A(self):
        return self.metric.scales[1]

    @property
    def B(self):
        return self.metric.scales[2]

    @property
    def C(self):
        return self.metric.scales[3]

    @property
    def domain(self):
        return self.metric.domain

    def exponents(self):
        p = self.params
        return p["alpha"], p["beta"], p["gamma"]

    def bar_scale(self, which: str) -> Expr:
        """exp(-k * integral U) for k in {alpha, beta, gamma}."""
        if self.variant != PROPER_CKV:
            raise FamilyError("bar scale factors exist only for the proper-CKV family")
        k = self.params[which]
        return exp(mul(Const(-1), as_expr(k), self.U_primitive))


def _domain(t_range):
    return {"t": t_range, "x": SPATIAL, "y": SPATIAL, "z": SPATIAL}


def _expr(v) -> Expr:
    return sx(v) if isinstance(v, str) else simplify(as_expr(v))


def general_diagonal(A, B, C, t_range=(0.5, 2.5)) -> BianchiFamily:
    A, B, C = _expr(A), _expr(B), _expr(C)
    return BianchiFamily(GENERAL, DiagonalMetric((ONE, A, B, C), domain=_domain(t_range)),
                         {"A": A, "B": B, "C": C}, label=f"A={A}, B={B}, C={C}")


def class_a_lrs(A, B, t_range=(0.5, 2.5)) -> BianchiFamily:
    """Locally rotationally symmetric case B = C (with A != B)."""
    A, B = _expr(A), _expr(B)
    if A == B:
        raise FamilyError("A = B = C is the FRW case, not a class A LRS metric")
    return BianchiFamily(LRS, DiagonalMetric((ONE, A, B, B), domain=_domain(t_range)),
                         {"A": A, "B": B, "C": B}, label=f"A={A}, B=C={B}")


def known_primitive(U: Expr) -> Expr | None:
    """Closed-form primitive for a few simple U(t): c*t^n, c/t, c*exp(k t)."""
    U = simplify(U)
    if U.free_symbols - {"t"}:
        return None
    coeff, rest = Fraction(1), U
    if rest.kind == "Mul" and rest.factors[0].kind == "Const":
        coeff = rest.factors[0].value
        rest = rest.factors[1:][0] if len(rest.factors) == 2 else None
    if rest is None:
        return None
    c = Const(coeff)
    if rest == T:
        return mul(c, Const(Fraction(1, 2)), power(T, Const(2)))
    if rest.kind == "Pow" and rest.base == T and rest.exp.kind == "Const":
        n = rest.exp.value
        if n == -1:
            return mul(c, ln(T))
        return mul(c, Const(1 / (n + 1)), power(T, Const(n + 1)))
    if rest.kind == "Func" and rest.name == "exp":
        k = simplify(differentiate(rest.arg, "t"))
        if k.kind == "Const" and k.value != 0 and differentiate(k, "t") == ZERO:
            return mul(c, Const(1 / k.value), rest)
    if rest.kind == "Const":
        return mul(rest, c, T)
    return None


def proper_ckv(alpha, beta, gamma, U, U_primitive=None, t_range=(0.5, 2.5), seed: int = 0) -> BianchiFamily:
    """Metric with A = exp(-alpha int U)/U etc., admitting the CKV Y5.

    ``U_primitive`` is checked against U by differentiation; when omitted a
    primitive is looked up for simple monomial or exponential U.
    """
    alpha, beta, gamma = (Fraction(v) if not isinstance(v, float) else v for v in (alpha, beta, gamma))
    U = _expr(U)
    P = _expr(U_primitive) if U_primitive is not None else known_primitive(U)
    if P is None:
        raise FamilyError(f"no closed-form primitive known for U={U}; pass one explicitly")
    dom = _domain(t_range)
    if not is_zero_probabilistic(differentiate(P, "t") - U, {"t": t_range}, seed=seed):
        raise FamilyError(f"{P} is not a primitive of {U}")
    inv_u = power(U, Const(-1))
    scales = tuple(mul(inv_u, exp(mul(Const(-1), as_expr(k), P))) for k in (alpha, beta, gamma))
    params = {"alpha": alpha, "beta": beta, "gamma": gamma}
    return BianchiFamily(PROPER_CKV, DiagonalMetric((ONE,) + scales, domain=dom), params, U, P,
                         label=f"alpha={alpha}, beta={beta}, gamma={gamma}, U={U}")


def power_law(alpha, beta, t_range=(0.5, 2.5)) -> BianchiFamily:
    """-dt^2 + t^(2-2alpha) dx^2 + t^(2-2beta)(dy^2 + dz^2): the U = 1/t case with beta = gamma."""
    return proper_ckv(alpha, beta, beta, sx("1/t"), sx("ln(t)"), t_range)


def lambert_family(alpha, beta, gamma, c1=0, t_range=(0.1, 1.0)) -> BianchiFamily:
    """U = 1/L with L = W(exp(M^2 (t + c1)))/M + 1/M and M = alpha + beta + gamma.

    The primitive of U is ln(W(exp(M^2 (t + c1))))/M.
    """
    M = as_expr(Fraction(alpha) + Fraction(beta) + Fraction(gamma))
    if M == ZERO:
        raise FamilyError("alpha + beta + gamma must be nonzero")
    w = lambert_w(exp(mul(power(M, Const(2)), T + as_expr(Fraction(c1)))))
    L = mul(power(M, Const(-1)), w + ONE)
    U = power(L, Const(-1))
    P = mul(power(M, Const(-1)), ln(w))
    fam = proper_ckv(alpha, beta, gamma, U, P, t_range)
    return BianchiFamily(fam.variant, fam.metric, fam.params, fam.U, fam.U_primitive,
                         label=f"alpha={alpha}, beta={beta}, gamma={gamma}, U=1/L1, c1={c1}")


def conformally_flat_trig() -> BianchiFamily:
    return BianchiFamily(TRIG, DiagonalMetric((ONE, sx("sin(t)"), sx("cos(t)"), ONE), domain=_domain((0.2, 1.3))),
                         label="-dt^2 + sin(t)^2 dx^2 + cos(t)^2 dy^2 + dz^2")


def conformally_flat_hyp() -> BianchiFamily:
    return BianchiFamily(HYP, DiagonalMetric((ONE, sx("sinh(t)"), sx("cosh(t)"), ONE), domain=_domain((0.3, 1.5))),
                         label="-dt^2 + sinh(t)^2 dx^2 + cosh(t)^2 dy^2 + dz^2")


def scale_factor_residual(L: Expr, alpha, beta, gamma) -> Expr:
    """L''' + (3 L' - alpha - beta - gamma) L''/L, zero when Laplacian of psi5 vanishes."""
    L = _expr(L)
    M = as_expr(Fraction(alpha) + Fraction(beta) + Fraction(gamma))
    d1 = differentiate(L, "t")
    d2 = differentiate(d1, "t")
    d3 = differentiate(d2, "t")
    return simplify(d3 + (Const(3) * d1 - M) * d2 / L)


# canonical instances used by the table checks
def table1_family():
    return general_diagonal("t", "t^2", "t^3")


def table2_family():
    return class_a_lrs("t", "t^2")


def table3_family():
    return proper_ckv(Fraction(1, 2), Fraction(1, 3), Fraction(1, 5), sx("1/t"), sx("ln(t)"))


def table3_lambert_family():
    return lambert_family(Fraction(1, 2), Fraction(1, 3), Fraction(1, 5))


def table4_family():
    return proper_ckv(Fraction(1, 2), Fraction(1, 3), Fraction(1, 3), sx("1/t"), sx("ln(t)"))
