import numpy as np
import pytest

from pyudtfs import definer, gallery, logic, model
from pyudtfs.logic import FormulaSet, format_formula
from pyudtfs.typespace import ParamSet

SIGNATURE = [("<", 2)]


def test_zero_types():
    """Test ∅-type classes of the example posets"""
    for d in (1, 2):
        hypercube = gallery.make_hypercube_poset(gallery.HypercubePosetSpec(d))
        partition = definer.zero_type_partition(hypercube.poset)
        assert partition.classes == (tuple(hypercube.P), tuple(hypercube.H))
        assert [len(c) for c in partition.classes] == [2 ** (d + 1), 2 * (d + 1)]
    grid = gallery.make_grid_order(gallery.GridOrderSpec(1)).poset
    partition = definer.zero_type_partition(grid)
    assert partition.classes == tuple((3 * x, 3 * x + 1, 3 * x + 2) for x in range(5))
    assert partition.class_of(4) == (3, 4, 5)
    assert definer.zero_type_partition(model.chain(4)).classes == ((0,), (1,), (2,), (3,))


def test_classes_are_antichains():
    """Test every ∅-type class is an antichain"""
    posets = [model.chain(5), gallery.make_grid_order(gallery.GridOrderSpec(2)).poset,
              gallery.make_hypercube_poset(gallery.HypercubePosetSpec(2)).poset]
    rng = np.random.default_rng(2)
    posets += [gallery.random_width_poset(int(rng.integers(1, 5)), int(rng.integers(4, 12)), seed=s) for s in range(10)]
    for p in posets:
        check = definer.check_lemma33(p)
        assert check
        assert check.witness is None


def test_isolating_formula():
    """Test isolating formulas of the points of the hypercube poset and of chain elements"""
    hypercube = gallery.make_hypercube_poset(gallery.HypercubePosetSpec(1))
    isolator = definer.isolating_formula(hypercube.poset, hypercube.P)
    assert isolator.exact
    assert isolator.method == "down"
    assert format_formula(isolator.formula) == "!exists z1. z1 < x"
    assert isolator.satisfiers == set(hypercube.P)
    p = model.chain(5)
    for a in range(5):
        isolator = definer.isolating_formula(p, [a])
        assert isolator.exact
        assert logic.satisfier_set(p.structure, isolator.formula, "x") == {a}


def test_isolating_formula_by_refinement():
    """Test classes not separated by their counts are isolated by refinement rounds"""
    # Two chains of length 2 and one element below both tops of one of them
    p = model.poset_from_cover(5, [(0, 1), (2, 3), (4, 3)])
    isolator = definer.isolating_formula(p, [0])
    assert isolator.exact
    assert isolator.method.startswith("refinement")
    assert logic.satisfier_set(p.structure, isolator.formula, "x") == {0}


def test_base_case():
    """Test a single satisfier needs no parameters"""
    p = model.chain(3)
    psi = logic.parse_formula("!exists z. z < x", SIGNATURE)
    phi = logic.parse_formula("x < y", SIGNATURE)
    result = definer.lemma31_define(p.structure, psi, phi, 0, ParamSet.of_elements([0, 1, 2]), 0)
    assert format_formula(result.formula) == "exists x. (!exists z. z < x & x < y)"
    assert result.parameter_count == 0
    assert result.terminal == "base"
    assert result.transcript == ((False,), (True,), (True,))


def test_split_case():
    """Test the grid type of (3,0) is defined with one parameter"""
    spec = gallery.GridOrderSpec(1)
    grid = gallery.make_grid_order(spec)
    c = spec.element(3, 0)
    isolator = definer.isolating_formula(grid.poset, [c, c + 1, c + 2])
    assert isolator.exact
    phi = logic.parse_formula("y < x", SIGNATURE)
    result = definer.lemma31_define(grid.poset.structure, isolator.formula, phi, c, ParamSet.of_elements(grid.B), 1)
    assert result.parameter_count == 1
    assert result.params_used[0].entry == (spec.element(2, 0),)
    assert result.params_used[0].case == 1
    assert result.terminal == "base"
    assert logic.param_count(result.formula) == 1


def test_counting_case():
    """Test the counting case on three minimal elements below a top"""
    p = model.poset_from_cover(4, [(0, 3), (1, 3), (2, 3)])
    psi = logic.parse_formula("!exists z. z < x", SIGNATURE)
    phi = logic.parse_formula("x < y", SIGNATURE)
    result = definer.lemma31_define(p.structure, psi, phi, 0, ParamSet.of_elements([3]), 1)
    assert result.terminal == "counting"
    assert result.parameter_count == 0
    assert format_formula(result.formula) == "exists[>=2] x. (!exists z. z < x & x < y)"
    expanded = result.expanded()[0]
    assert logic.counting_depth(expanded) == 0
    assert logic.evaluate(p.structure, expanded, {"y": 3})
    assert not logic.evaluate(p.structure, expanded, {"y": 0})


def test_bound_violation():
    """Test too many satisfiers are reported with their count and the bound"""
    hypercube = gallery.make_hypercube_poset(gallery.HypercubePosetSpec(1))
    psi = logic.parse_formula("!exists z. z < x", SIGNATURE)
    phi = logic.parse_formula("x < y", SIGNATURE)
    with pytest.raises(definer.DefinerError) as e:
        definer.lemma31_define(hypercube.poset.structure, psi, phi, 0, ParamSet.of_elements(hypercube.H), 1)
    assert e.value.cardinality == 4
    assert e.value.bound == 3
    with pytest.raises(definer.DefinerError):
        definer.lemma31_define(hypercube.poset.structure, psi, phi, hypercube.H[0], ParamSet.of_elements(hypercube.H), 2)
    with pytest.raises(definer.DefinerError):
        definer.lemma31_define(hypercube.poset.structure, logic.parse_formula("x < y", SIGNATURE), phi, 0,
                               ParamSet.of_elements(hypercube.H), 2)


def test_define_type_with_equality():
    """Test a type over the order and equality is defined and replayed"""
    p = model.poset_from_cover(4, [(0, 3), (1, 3), (2, 3)])
    delta = FormulaSet.parse(["x < y", "x = y"], SIGNATURE)
    psi = logic.parse_formula("!exists z. z < x", SIGNATURE)
    result = definer.define_type(p.structure, psi, delta, 1, ParamSet.of_elements([0, 1, 3]), 1)
    assert len(result.formulas) == 2
    assert result.parameter_count <= 1
    description = result.get_description()
    assert len(description["transcript"]) == 3


def test_vcd_certificates():
    """Test certificates of a chain, a grid order and an undersized hypercube budget"""
    report = definer.vcd_certificate(model.chain(4), ParamSet.of_elements(range(4)))
    assert report.d == 0 and report.certified
    assert all(e.kind == "syntactic" and e.result.parameter_count == 0 for e in report.entries)

    grid = gallery.make_grid_order(gallery.GridOrderSpec(1))
    report = definer.vcd_certificate(grid.poset, ParamSet.of_elements(grid.B), include_eq=True)
    assert report.width == 3 and report.d == 1
    assert report.certified
    assert 0.0 <= report.fallback_rate <= 1.0

    hypercube = gallery.make_hypercube_poset(gallery.HypercubePosetSpec(1))
    report = definer.vcd_certificate(hypercube.poset, ParamSet.of_elements(hypercube.H), d=1)
    assert not report.certified
    assert any(0 in e.trace.realizers for e in report.uncertified())
    natural = definer.vcd_certificate(hypercube.poset, ParamSet.of_elements(hypercube.H))
    assert natural.d == 2 and natural.certified


def test_natural_parameter_count():
    """Test the parameter count is the floor of log2 of the width"""
    for w, d in [(1, 0), (2, 1), (3, 1), (4, 2), (7, 2), (8, 3), (15, 3), (16, 4)]:
        assert w.bit_length() - 1 == d
        report = definer.vcd_certificate(model.poset_from_cover(w, []), ParamSet.of_elements([0]))
        assert report.d == d


def test_refinement_rounds_are_capped():
    """Test a class needing refinement is only over-approximated when no rounds are allowed"""
    p = model.poset_from_cover(5, [(0, 1), (2, 3), (4, 3)])
    isolator = definer.isolating_formula(p, [0], rounds=0)
    assert not isolator.exact
    assert isolator.method == "up"
    assert isolator.satisfiers == {0, 2, 4}
    assert not definer.isolating_formula(p, [0], rounds=1).exact
    assert definer.isolating_formula(p, [0], rounds=2).exact


def test_psi_with_parameters():
    """Test psi may carry its own parameters on top of the d the definer adds"""
    p = model.poset_from_cover(4, [(0, 3), (1, 3), (2, 3)])
    psi = logic.parse_formula("x < @3", SIGNATURE)
    B = ParamSet.of_elements([0, 1, 3])
    result = definer.lemma31_define(p.structure, psi, logic.parse_formula("x = y", SIGNATURE), 0, B, 1)
    assert result.terminal == "base"
    assert result.params_used[0].entry == (0,)
    assert result.params_used[0].case == 1
    assert logic.constants(result.formula) == {0, 3}
    assert result.transcript == ((True,), (False,), (False,))
    counted = definer.lemma31_define(p.structure, psi, logic.parse_formula("x < y", SIGNATURE), 0, B, 1)
    assert counted.terminal == "counting"
    assert counted.parameter_count == 0
    assert format_formula(counted.formula) == "exists[>=2] x. (x < @3 & x < y)"
    assert logic.param_count(counted.formula) == 1
