from fractions import Fraction

import pytest

from kgsym.catalog import (
    CHAIN, CORRECTED, DEFAULT_INSTANCES, GAUSSIAN, PRINTED, TABLE_IDS, BracketExpansion, FamilyError,
    all_entries, scale_factor_residual, catalog_vectors, class_a_lrs, commutator_basis, commutator_table,
    compare_with_expected, conformally_flat_trig, default_family, expand_in_basis, expected_table,
    general_diagonal, instance_by_name, known_primitive, lambert_family, power_law, proper_ckv, table4_family,
    table_entries, vector_by_label,
)
from kgsym.geometry import VectorField
from kgsym.symexpr import ZERO, sample_max_abs, sx
from kgsym.symmetry import generic_symmetry


def test_table_sizes():
    sizes = {tid: len(table_entries(tid)) for tid in TABLE_IDS}
    assert sizes == {1: 8, 2: 8, 3: 8, 5: 4, 6: 8}
    assert len(all_entries()) == 36
    assert [e.row_id for e in table_entries(6)][:2] == ["T6.R1", "T6.R2"]


def test_suspect_rows_carry_two_readings():
    suspects = sorted(e.row_id for e in all_entries() if e.suspect)
    assert suspects == ["T1.R1", "T2.R4", "T2.R6", "T2.R8", "T3.R3", "T3.R7", "T6.R5", "T6.R6", "T6.R7", "T6.R8"]
    for e in all_entries():
        assert e.readings[0].name == PRINTED
        if e.suspect:
            assert e.preferred.name == CORRECTED


def test_table3_row3_readings_differ_by_stray_factor():
    e = table_entries(3)[2]
    assert "*y*Bbar" in e.reading(PRINTED).template_text()
    assert "*y*Bbar" not in e.reading(CORRECTED).template_text()


def test_free_function_instances_are_independent():
    args = (sx("x"), sx("y"))
    assert sample_max_abs(GAUSSIAN(args) - sx("exp(-x^2 - y^2)"), {"x": (-1, 1), "y": (-1, 1)}, 5, 0) < 1e-15
    assert CHAIN(args) == sx("x + x*y")
    assert instance_by_name("chain") is CHAIN and len(DEFAULT_INSTANCES) == 2
    with pytest.raises(KeyError):
        instance_by_name("cubic")


def test_potential_instantiation_substitutes_family_data():
    fam = default_family(3)
    e = table_entries(3)[0]
    V = e.potential(fam, CHAIN)
    assert {"Abar", "U", "alpha"}.isdisjoint(V.free_symbols)
    assert V.free_symbols <= {"t", "x", "y", "z"}


def test_generator_of_conformal_row_carries_psi():
    fam = default_family(6)
    g = table_entries(6)[0].generator(fam)
    assert g.psi == vector_by_label(fam, "C1px").psi
    assert table_entries(1)[0].generator(default_family(1), reading=table_entries(1)[0].reading(CORRECTED)).a0 == sx("1")


def test_export_record_fields():
    rec = table_entries(2)[3].record()
    assert set(rec) == {"table", "row", "template-text", "printed-template-text", "symmetry", "symmetry-labels",
                        "coefficients", "noether"}
    assert rec["symmetry-labels"] == ["Y3", "Y4"] and rec["coefficients"] == ["a", "b"]


def test_catalog_vector_counts():
    assert len(catalog_vectors(general_diagonal("t", "t^2", "t^3"))) == 3
    assert [v.label for v in catalog_vectors(class_a_lrs("t", "t^2"))] == ["Y1", "Y2", "Y3", "Y4"]
    assert len(catalog_vectors(conformally_flat_trig())) == 15
    assert [v.label for v in catalog_vectors(table4_family())][-1] == "Y5"
    with pytest.raises(KeyError):
        vector_by_label(general_diagonal("t", "t^2", "t^3"), "Y4")


def test_known_primitives():
    assert known_primitive(sx("1/t")) == sx("ln(t)")
    assert sample_max_abs(known_primitive(sx("3*t^2")) - sx("t^3"), {"t": (0.5, 2)}, 5, 0) < 1e-12
    with pytest.raises(FamilyError):
        proper_ckv(1, 1, 1, sx("sin(t)"))
    with pytest.raises(FamilyError):
        proper_ckv(1, 1, 1, sx("1/t"), sx("t"))


def test_scale_factor_residual_for_linear_and_lambert_scale():
    assert scale_factor_residual(sx("t"), 1, 1, 1) == ZERO
    fam = lambert_family(1, 1, 1)
    L = sx("1") / fam.U
    assert sample_max_abs(scale_factor_residual(L, 1, 1, 1), {"t": (0.1, 1.0)}, 40, 0) < 1e-7
    assert sample_max_abs(scale_factor_residual(sx("t^2"), 1, 1, 1), {"t": (0.1, 1.0)}, 10, 0) > 1e-2


def test_power_law_scale_factors():
    fam = power_law(Fraction(1, 2), Fraction(1, 3))
    assert sample_max_abs(fam.A - sx("t^(1/2)"), fam.domain, 10, 0) < 1e-12
    assert sample_max_abs(fam.B - sx("t^(2/3)"), fam.domain, 10, 0) < 1e-12


def test_commutator_tables_match_published():
    for fam, n in ((table4_family(), 10), (conformally_flat_trig(), 21)):
        rows = compare_with_expected(fam, seed=42)
        assert len(rows) == n
        assert all(match for *_, match in rows)


def test_commutator_diagonal_is_zero():
    for fam in (table4_family(), conformally_flat_trig()):
        table = commutator_table(fam, seed=1)
        labels = [label for label, _ in commutator_basis(fam)]
        assert all(table[(k, k)].expanded and table[(k, k)].coefficients == {} for k in labels)


def test_expected_table_requires_equal_exponents():
    with pytest.raises(FamilyError):
        expected_table(proper_ckv(Fraction(1, 2), Fraction(1, 3), Fraction(1, 5), sx("1/t")))
    with pytest.raises(FamilyError):
        expected_table(general_diagonal("t", "t", "t"))


def test_bracket_outside_span_is_reported():
    fam = table4_family()
    target = generic_symmetry(VectorField(("0", "x^2", "0", "0")))
    coeffs, ok, res = expand_in_basis(target, commutator_basis(fam), fam.metric.sample_domain())
    assert not ok and res > 1e-3
    assert BracketExpansion("a", "b", {}, False, res).text() == "not in span"
    assert BracketExpansion("a", "b", {"Y1": Fraction(-1), "Y2": Fraction(1, 2)}, True, 0).text() == "-Y1 + 1/2*Y2"
