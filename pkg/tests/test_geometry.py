from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kgsym.catalog import (
    catalog_vectors, class_a_lrs, conformally_flat_trig, general_diagonal, power_law, proper_ckv,
)
from kgsym.geometry import (
    CKV, HV, KV, NOT_CONFORMAL, DiagonalMetric, VectorField, christoffel, classify_collineation, conformal_factor,
    covariant_hessian, divergence, laplacian, laplacian_coefficients, lie_bracket, lie_derivative_metric,
    metric_compatibility,
)
from kgsym.symexpr import ZERO, Const, add, compile_expr, differentiate, mul, sample_max_abs, simplify, sx

COORDS = ("t", "x", "y", "z")
BIANCHI = general_diagonal("t", "t^2", "t^3").metric
TRIG = conformally_flat_trig().metric


def _zero(e, m, n=20, seed=3):
    return sample_max_abs(e, m.sample_domain(), n, seed) < 1e-9


def _diff(a, b):
    return add(a, mul(Const(-1), b))


def test_minkowski_laplacian_is_wave_operator():
    flat = DiagonalMetric(("1", "1", "1", "1"), domain={k: (0.1, 1.0) for k in COORDS})
    assert simplify(laplacian(flat, sx("t^2"))) == sx("-2")
    assert simplify(laplacian(flat, sx("x^2*y"))) == sx("2*y")


def test_laplacian_matches_christoffel_form():
    G = christoffel(BIANCHI)
    for f in (sx("t^2*x + sin(y)*z"), sx("exp(t)*cos(x + z)")):
        grad = [differentiate(f, c) for c in COORDS]
        terms = []
        for a in range(4):
            hess = add(differentiate(grad[a], COORDS[a]), *[mul(Const(-1), G[k][a][a], grad[k]) for k in range(4)])
            terms.append(mul(BIANCHI.inverse[a], hess))
        assert _zero(_diff(laplacian(BIANCHI, f), add(*terms)), BIANCHI)


def test_laplacian_matches_nested_finite_differences():
    # independent numeric route: (1/sqrt g) d_i (sqrt g g^ii d_i f) by central differences
    m = BIANCHI
    f = sx("t^2*x + sin(y)*z")
    ff = compile_expr(f, COORDS)
    root = compile_expr(m.sqrt_det, COORDS)
    inv = [compile_expr(g, COORDS) for g in m.inverse]
    lap = compile_expr(laplacian(m, f), COORDS)
    h = 1e-4

    def flux(i, p):
        q, r = list(p), list(p)
        q[i] += h
        r[i] -= h
        return root(*p) * inv[i](*p) * (ff(*q) - ff(*r)) / (2 * h)

    for p in ((0.7, 0.3, 0.5, 0.9), (1.4, 1.1, 0.2, 0.4)):
        total = 0.0
        for i in range(4):
            q, r = list(p), list(p)
            q[i] += h
            r[i] -= h
            total += (flux(i, q) - flux(i, r)) / (2 * h)
        assert total / root(*p) == pytest.approx(lap(*p), rel=1e-5, abs=1e-6)


def test_laplacian_coefficients_reassemble():
    gi, drift = laplacian_coefficients(TRIG)
    f = sx("exp(x)*cos(t)*sin(z) + y^2")
    rebuilt = add(*[add(mul(gi[i], differentiate(differentiate(f, c), c)), mul(drift[i], differentiate(f, c)))
                    for i, c in enumerate(COORDS)])
    assert _zero(_diff(rebuilt, laplacian(TRIG, f)), TRIG)


@pytest.mark.parametrize("m", [BIANCHI, TRIG, class_a_lrs("sinh(t)", "t").metric])
def test_levi_civita_connection_is_metric_compatible(m):
    assert all(_zero(e, m, 8) for e in metric_compatibility(m))
    G = christoffel(m)
    assert all(G[i][j][k] == G[i][k][j] for i in range(4) for j in range(4) for k in range(4))


def test_divergence_of_gradient_is_laplacian():
    f = sx("t^3*y + x*z")
    grad = VectorField(tuple(mul(BIANCHI.inverse[i], differentiate(f, c)) for i, c in enumerate(COORDS)))
    assert _zero(_diff(divergence(BIANCHI, grad), laplacian(BIANCHI, f)), BIANCHI)


def test_conformal_factor_of_minkowski_dilation():
    flat = DiagonalMetric(("1", "1", "1", "1"), domain={k: (0.1, 1.0) for k in COORDS})
    X = VectorField(tuple(sx(c) for c in COORDS))
    assert simplify(conformal_factor(flat, X)) == sx("1")
    cls = classify_collineation(flat, X)
    assert cls.tag == HV and cls.psi == sx("1")


def test_translations_are_killing_for_any_bianchi_metric():
    for v in catalog_vectors(general_diagonal("t", "t^2", "t^3")):
        L = lie_derivative_metric(BIANCHI, v.field)
        assert all(simplify(L[i][j]) == ZERO for i in range(4) for j in range(4))
        assert classify_collineation(BIANCHI, v.field).tag == KV


def test_rotation_is_killing_only_when_b_equals_c():
    rot = VectorField((sx("0"), sx("0"), sx("z"), sx("-y")))
    assert classify_collineation(class_a_lrs("t", "t^2").metric, rot).tag == KV
    assert classify_collineation(BIANCHI, rot).tag == NOT_CONFORMAL


def test_negative_control_is_not_conformal():
    cls = classify_collineation(BIANCHI, VectorField((sx("0"), sx("y"), sx("0"), sx("0"))))
    assert cls.tag == NOT_CONFORMAL and cls.residual > 1e-2 and cls.psi is None


def test_y5_homothetic_for_u_equal_one_over_t():
    fam = power_law(Fraction(1, 2), Fraction(1, 3))
    y5 = [v for v in catalog_vectors(fam) if v.label == "Y5"][0]
    cls = classify_collineation(fam.metric, y5.field)
    assert cls.tag == HV and cls.psi == sx("1")


def test_y5_proper_conformal_for_other_u():
    fam = proper_ckv(1, Fraction(1, 2), Fraction(1, 3), sx("1/t^2"))
    y5 = [v for v in catalog_vectors(fam) if v.label == "Y5"][0]
    cls = classify_collineation(fam.metric, y5.field)
    assert cls.tag == CKV and y5.tag == CKV
    # conformal factor -U'/U^2 = 2t
    assert _zero(_diff(cls.psi, sx("2*t")), fam.metric)


def test_special_ckv_detection_on_flat_space():
    flat = DiagonalMetric(("1", "1", "1", "1"), domain={k: (0.1, 1.0) for k in COORDS})
    # special conformal vector along x: 2 x x^a d_a - (x.x) d_x, with x.x = -t^2 + x^2 + y^2 + z^2
    X = VectorField((sx("2*x*t"), sx("x^2 + t^2 - y^2 - z^2"), sx("2*x*y"), sx("2*x*z")))
    cls = classify_collineation(flat, X)
    assert cls.tag == "SpecialCKV"
    assert all(sample_max_abs(h, flat.domain, 10, 0) < 1e-12 for row in covariant_hessian(flat, cls.psi) for h in row)


_poly = st.sampled_from(["t", "x*y", "z^2", "t*z", "1", "x - y", "y*t^2"])


@settings(max_examples=25, deadline=None)
@given(st.tuples(*[_poly] * 4), st.tuples(*[_poly] * 4), st.tuples(*[_poly] * 4))
def test_lie_bracket_antisymmetry_and_jacobi(a, b, c):
    X, Y, Z = (VectorField(tuple(sx(s) for s in v)) for v in (a, b, c))
    dom = {k: (-1.0, 1.0) for k in COORDS}
    anti = [add(p, q) for p, q in zip(lie_bracket(X, Y), lie_bracket(Y, X))]
    assert all(sample_max_abs(e, dom, 6, 0) < 1e-12 for e in anti)
    jac = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) + lie_bracket(Z, lie_bracket(X, Y))
    assert all(sample_max_abs(e, dom, 6, 0) < 1e-10 for e in jac)
