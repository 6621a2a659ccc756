import math
from fractions import Fraction

import pytest

from kgsym.catalog import rotation, translations
from kgsym.geometry import VectorField, laplacian
from kgsym.reduction import (
    A1, A2, BMX, BPX, BPY, CASES, CommutatorGateError, DegenerateRootError, LinearOperator, PRINTED, ReducedODE,
    ReductionCase, ReductionError, UnsupportedGenerator, closed_form_for, closed_form_potential, closed_form_sigma,
    default_cases, reduce_case, solve, stage_residuals, variable_range, verify_invariant_solution,
    zero_order_invariants,
)
from kgsym.symexpr import Const, add, differentiate, mul, sample_max_abs, simplify, sx
from kgsym.symmetry import generic_symmetry, trivial_symmetry

COORDS = ("t", "x", "y", "z")
LINE = {"s": (-2.0, 2.0)}


def _apply(g, f):
    """X f for X = xi + eta d_u acting on f(t, x, y, z, u)."""
    out = g.xi.apply(f, COORDS)
    return simplify(add(out, mul(g.eta, differentiate(f, "u"))))


@pytest.mark.parametrize("gen", [
    generic_symmetry(translations()[0].field, a0=Const(Fraction(3, 2))),
    generic_symmetry(translations()[2].field.scale(2), a0=Const(-1)),
    generic_symmetry(rotation().field, a0=Const(Fraction(7, 10))),
    generic_symmetry(VectorField(("t", "x/2", "y/3", "z/3")), psi=Const(1)),
])
def test_zero_order_invariants_are_annihilated(gen):
    invs = zero_order_invariants(gen)
    assert len(invs) == 4
    dom = {"t": (0.5, 1.5), "x": (0.1, 1), "y": (0.2, 1), "z": (0.3, 1), "u": (-1, 1)}
    for f in invs:
        assert sample_max_abs(_apply(gen, f), dom, 10, 0) < 1e-12
    assert "u" in invs[-1].free_symbols


def test_zero_order_invariants_reject_unsupported():
    with pytest.raises(UnsupportedGenerator):
        zero_order_invariants(generic_symmetry(translations()[0].field, b=sx("x")))
    with pytest.raises(UnsupportedGenerator):
        zero_order_invariants(generic_symmetry(translations()[0].field, a0=sx("t")))
    with pytest.raises(UnsupportedGenerator):
        zero_order_invariants(generic_symmetry(VectorField(("0", "y", "0", "0"))))
    with pytest.raises(UnsupportedGenerator):
        zero_order_invariants(trivial_symmetry())


def test_translation_reduction_of_operator():
    op = LinearOperator.of({("x", "x"): sx("t^-2"), ("t",): sx("-3/t"), (): sx("t")})
    red = op.reduce_translation("x", Fraction(1, 2))
    assert red.as_dict() == {(): simplify(sx("t + (1/4)*t^-2")), ("t",): sx("-3/t")}
    with pytest.raises(ReductionError):
        LinearOperator.of({("y",): sx("x")}).reduce_translation("x", 1)


def test_every_case_has_two_parameter_sets():
    cases = default_cases()
    assert set(cases) == set(CASES)
    assert all(len(v) >= 2 for v in cases.values())


def test_derived_stages_hold_and_printed_readings_break():
    for cid, broken in ((A1, {"reduced-ode"}), (A2, {"after-rotation", "after-x", "reduced-ode"}),
                        (BPX, {"reduced-ode"}), (BMX, set())):
        case = default_cases()[cid][0]
        derived = dict(stage_residuals(reduce_case(case)))
        printed = dict(stage_residuals(reduce_case(ReductionCase(cid, case.params, case.potential, PRINTED))))
        assert max(derived.values()) < 1e-12
        assert {k for k, v in printed.items() if v > 1e-6} == broken


def test_a1_final_equation_is_independent_of_reduction_order():
    case = default_cases()[A1][1]
    a = reduce_case(case, ("x", "y", "z")).ode
    b = reduce_case(case, ("z", "y", "x")).ode
    dom = {"s": (0.5, 2.0)}
    for ca, cb in zip(a.coefficients(), b.coefficients()):
        assert sample_max_abs(add(ca, mul(Const(-1), cb)), dom, 10, 0) < 1e-12


def test_a1_lifted_solution_is_translation_covariant():
    case = default_cases()[A1][1]
    red = reduce_case(case)
    sol = solve(red)
    mu1 = float(case.params["mu"][0])
    d = 0.137
    for p in ((0.8, 0.3, 0.5, 0.4), (1.2, 0.6, 0.9, 1.0)):
        shifted = sol(p[0], p[1] + d, p[2], p[3])
        assert shifted == pytest.approx(math.exp(mu1 * d) * sol(*p), rel=1e-12)


def test_a2_commutator_gate():
    with pytest.raises(CommutatorGateError, match="mu1 = 0 or alpha = 0"):
        reduce_case(ReductionCase(A2, {"alpha": Fraction(1, 2), "beta": Fraction(1, 2), "mu1": Fraction(1, 2)},
                                  sx("exp(-s)")))
    # either factor vanishing opens the branch
    reduce_case(ReductionCase(A2, {"alpha": 0, "beta": Fraction(1, 2), "mu1": Fraction(1, 2)}, sx("exp(-s)")))
    reduce_case(ReductionCase(A2, {"alpha": Fraction(1, 2), "beta": Fraction(1, 2), "mu1": 0}, sx("exp(-s)")))


def _damped_residual(sigma, mu3):
    ode = ReducedODE("zeta", sx("1"), sx("2"), Const(Fraction(mu3) ** 2))
    return sample_max_abs(ode.residual_expr(sigma), LINE, 20, 0)


def test_closed_form_without_mass_term_has_exponents_zero_and_minus_two():
    sigma = closed_form_sigma(0, 1, 1)
    assert sample_max_abs(add(sigma, mul(Const(-1), sx("1 + exp(-2*s)"))), LINE, 10, 0) < 1e-12
    assert _damped_residual(sigma, Fraction(0)) < 1e-10


@pytest.mark.parametrize("mu3", [Fraction(1, 2), Fraction(2), Fraction(-3, 10)])
def test_closed_form_solves_damped_equation(mu3):
    sigma = closed_form_sigma(mu3, 1, Fraction(1, 2))
    assert _damped_residual(sigma, mu3) < 1e-10
    if abs(mu3) > 1:
        assert "cos" in str(sigma) and "sin" in str(sigma)


def test_degenerate_root_needs_opt_in():
    with pytest.raises(DegenerateRootError):
        closed_form_sigma(1)
    sigma = closed_form_sigma(-1, 1, 2, allow_degenerate=True)
    assert _damped_residual(sigma, Fraction(1)) < 1e-10


def test_closed_form_potentials():
    params = {"mu3": Fraction(1, 2), "mu4": 2, "mu5": 3, "mu6": 5, "mu7": 7}
    expect = {BPX: "6*exp(-2*s)", BPY: "10*exp(-2*s)", BMX: "35*exp(2*s) - 1/4"}
    for cid, text in expect.items():
        got = closed_form_potential(cid, params)
        assert sample_max_abs(add(got, mul(Const(-1), sx(text))), LINE, 10, 0) < 1e-12
    with pytest.raises(ReductionError):
        closed_form_potential(A1, params)


def test_closed_form_lift_is_an_exact_solution():
    case = default_cases()[BPX][0]
    red = reduce_case(case)
    sigma = closed_form_for(case)
    assert sigma is not None
    lo, hi = variable_range(red, 1e-3)
    assert sample_max_abs(red.ode.residual_expr(sigma), {"s": (lo, hi)}, 20, 0) < 1e-10
    u = solve(red).expr()
    res = simplify(add(laplacian(red.metric, u), mul(red.V, u)))
    assert sample_max_abs(mul(res, sx("1") / u), red.metric.sample_domain(), 20, 0) < 1e-10


def test_numeric_lift_passes_and_perturbation_fails():
    case = default_cases()[BPX][1]
    red = reduce_case(case)
    assert closed_form_for(case) is None
    sol = solve(red)
    v = verify_invariant_solution(red.metric, red.V, sol, red.grid)
    assert v.residual < 1e-4 and v.richardson and 2.5 < v.ratio < 6

    def bent(t, x, y, z):
        return sol(t, x, y, z) * (1 + 0.1 * x * x)

    assert verify_invariant_solution(red.metric, red.V, bent, red.grid).residual > 1e-2


def test_singular_point_inside_interval_is_refused():
    ode = ReducedODE("t", sx("1"), sx("3/s"), sx("0"), singular_points=(0.0,))
    with pytest.raises(ReductionError):
        ode.check_interval(-0.5, 0.5)
    ode.check_interval(0.1, 0.5)


def test_unknown_case():
    with pytest.raises(ReductionError):
        reduce_case(ReductionCase("C9"))



def test_reduced_variable_depends_on_time_and_one_space_coordinate():
    red = reduce_case(default_cases()[BMX][0])
    assert red.solution.variable.free_symbols == {"t", "x"}
    assert red.stages[-1].name == "reduced-ode"
