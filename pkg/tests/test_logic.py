import numpy as np
import pytest

from pyudtfs import gallery, logic, model, symmetry
from pyudtfs.config import ResourceLimitError
from pyudtfs.logic import Atom, Const, Equals, Exists, Implies, Var

SIGNATURE = [("<", 2)]


def test_format_is_canonical():
    """Test printing parsed formulas gives back the canonical text"""
    for src in ["x < y & y < z", "!exists z. z < x", "exists[>=2] z. z < x", "x < y -> y < z -> x < z",
                "(x = y | x < y) & !y < x", "forall w. (w < y -> w < x)", "x < y <-> !y = x"]:
        f = logic.parse_formula(src, SIGNATURE)
        assert logic.format_formula(f) == src
        assert logic.parse_formula(logic.format_formula(f), SIGNATURE) == f


def test_parse_precedence():
    """Test implication is right-associative and binds weaker than conjunction"""
    f = logic.parse_formula("x = x -> y = y -> z = z", SIGNATURE)
    assert f == Implies(Equals(Var("x"), Var("x")), Implies(Equals(Var("y"), Var("y")), Equals(Var("z"), Var("z"))))
    g = logic.parse_formula("x < y & y < z | x = z", SIGNATURE)
    assert isinstance(g, logic.Or) and isinstance(g.parts[0], logic.And)


def test_parse_errors():
    """Test syntax errors report their offset"""
    with pytest.raises(logic.FormulaSyntaxError) as e:
        logic.parse_formula("x <", SIGNATURE)
    assert e.value.position == 3
    with pytest.raises(logic.FormulaSyntaxError):
        logic.parse_formula("forall[>=2] z. z < x", SIGNATURE)
    with pytest.raises(logic.FormulaSyntaxError) as e:
        logic.parse_formula("x < y & R(x)", SIGNATURE)
    assert e.value.position == 8
    with pytest.raises(logic.FormulaSyntaxError):
        logic.parse_formula("x < y $", SIGNATURE)
    with pytest.raises(logic.FormulaSyntaxError):
        logic.parse_formula("x < @nowhere", SIGNATURE)


def test_labels():
    """Test element labels in constants"""
    grid = gallery.make_grid_order(gallery.GridOrderSpec(1)).poset.structure
    f = logic.parse_formula("x < @g0_0", grid)
    assert f == Atom("<", (Var("x"), Const(0)))
    assert logic.format_formula(f, labels=grid.labels) == "x < @g0_0"
    assert logic.format_formula(f) == "x < @0"
    assert logic.param_count(logic.parse_formula("x < @0 & @0 < y | @3 = x", grid)) == 2


def test_evaluation():
    """Test satisfier sets on a chain"""
    p = model.chain(3)
    f = logic.parse_formula("exists z. z < x", SIGNATURE)
    assert logic.satisfier_set(p.structure, f, "x") == {1, 2}
    g = logic.parse_formula("exists[>=2] z. z < x", SIGNATURE)
    assert logic.satisfier_set(p.structure, g, "x") == {2}
    h = logic.parse_formula("exists[>=0] z. z < x", SIGNATURE)
    assert logic.satisfier_set(p.structure, h, "x") == {0, 1, 2}
    assert logic.evaluate(p.structure, logic.parse_formula("forall z. (z = x | z < x)", SIGNATURE), {"x": 2})
    with pytest.raises(logic.EvaluationError):
        logic.evaluate(p.structure, f, {})
    with pytest.raises(logic.EvaluationError):
        logic.satisfier_set(p.structure, logic.parse_formula("x < y", SIGNATURE), "x")


def test_counting_expansion():
    """Test expanded counting quantifiers keep the satisfier sets"""
    rng = np.random.default_rng(5)
    for seed in range(5):
        p = gallery.random_width_poset(int(rng.integers(1, 4)), 8, seed=seed)
        for src in ["exists[>=2] z. z < x", "!exists[>=3] z. (x < z & exists[>=2] w. w < z)"]:
            f = logic.parse_formula(src, SIGNATURE)
            expanded = logic.expand_counting(f)
            assert logic.counting_depth(expanded) == 0
            assert logic.satisfier_set(p.structure, expanded, "x") == logic.satisfier_set(p.structure, f, "x")
    with pytest.raises(ValueError):
        logic.expand_counting(Exists("z", Equals(Var("z"), Var("z")), 0))


def test_substitution_avoids_capture():
    """Test bound variables are renamed when a substituted variable would be captured"""
    f = logic.parse_formula("exists y. x < y", SIGNATURE)
    g = logic.substitute(f, {"x": Var("y")})
    assert logic.format_formula(g) == "exists y1. y < y1"
    assert logic.free_variables(g) == {"y"}
    assert logic.substitute(f, {"y": Const(0)}) == f
    assert logic.format_formula(logic.substitute(f, {"x": Const(2)})) == "exists y. @2 < y"


def test_depth_cap():
    """Test the quantifier depth cap"""
    p = model.chain(3)
    f = logic.parse_formula("exists z. exists w. (w < z & z < x)", SIGNATURE)
    assert logic.quantifier_depth(f) == 2
    with pytest.raises(ResourceLimitError):
        logic.Evaluator(p.structure, depth_cap=1).evaluate(f, {"x": 2})
    assert logic.Evaluator(p.structure, depth_cap=2).evaluate(f, {"x": 2})


def test_formula_set():
    """Test formula sets check their free variables"""
    delta = logic.FormulaSet.parse(["x < y", "x = y"], SIGNATURE)
    assert len(delta) == 2
    assert delta.environment((1,), (2,)) == {"x": 1, "y": 2}
    assert delta.get_description()["formulas"] == ["x < y", "x = y"]
    with pytest.raises(ValueError):
        logic.FormulaSet.parse(["x < z"], SIGNATURE)
    with pytest.raises(ValueError):
        logic.FormulaSet.parse(["x < y"], SIGNATURE, x=("x",), y=("x",))
    with pytest.raises(ValueError):
        delta.environment((1, 2), (0,))


VARIABLES = ["x", "y", "z", "w"]


def _random_term(rng, constants):
    if constants and rng.random() < 0.3:
        return Const(int(rng.integers(4)))
    return Var(VARIABLES[int(rng.integers(len(VARIABLES)))])


def _random_formula(rng, depth, constants=True):
    if depth == 0 or rng.random() < 0.25:
        left, right = _random_term(rng, constants), _random_term(rng, constants)
        return Atom("<", (left, right)) if rng.random() < 0.5 else Equals(left, right)
    kind = int(rng.integers(7))
    if kind == 0:
        return logic.Not(_random_formula(rng, depth - 1, constants))
    if kind in (1, 2):
        parts = tuple(_random_formula(rng, depth - 1, constants) for _ in range(int(rng.integers(2, 4))))
        return logic.And(parts) if kind == 1 else logic.Or(parts)
    if kind == 3:
        return Implies(_random_formula(rng, depth - 1, constants), _random_formula(rng, depth - 1, constants))
    if kind == 4:
        return logic.Iff(_random_formula(rng, depth - 1, constants), _random_formula(rng, depth - 1, constants))
    var = VARIABLES[int(rng.integers(len(VARIABLES)))]
    if kind == 5:
        return Exists(var, _random_formula(rng, depth - 1, constants), int(rng.integers(0, 3)))
    return logic.Forall(var, _random_formula(rng, depth - 1, constants))


def test_format_round_trip():
    """Test parsing the printed text of random formulas gives back the same tree"""
    rng = np.random.default_rng(17)
    for _ in range(200):
        f = _random_formula(rng, 4)
        assert logic.parse_formula(logic.format_formula(f), SIGNATURE) == f


def test_evaluation_is_invariant_under_automorphisms():
    """Test parameter-free formulas keep their truth value when the assignment is moved by an automorphism"""
    structure = gallery.make_hypercube_poset(gallery.HypercubePosetSpec(1)).poset.structure
    generators = symmetry.automorphism_generators(structure)
    assert generators
    rng = np.random.default_rng(23)
    evaluator = logic.Evaluator(structure)
    for _ in range(60):
        f = _random_formula(rng, 3, constants=False)
        env = {v: int(rng.integers(structure.universe_size)) for v in VARIABLES}
        g = generators[int(rng.integers(len(generators)))]
        moved = {v: int(g[a]) for v, a in env.items()}
        assert evaluator.evaluate(f, env) == evaluator.evaluate(f, moved)


def test_conjoining_an_instance_adds_one_parameter():
    """Test conjoining phi(x, @a) to a formula adds at most one parameter"""
    phi = logic.parse_formula("x < y", SIGNATURE)
    rng = np.random.default_rng(29)
    for _ in range(50):
        f = _random_formula(rng, 3)
        a = int(rng.integers(6))
        g = logic.conjoin([f, logic.substitute(phi, {"y": Const(a)})])
        assert logic.param_count(g) <= logic.param_count(f) + 1
        assert logic.param_count(g) == logic.param_count(f) + (a not in logic.constants(f))


def test_memo_cap():
    """Test the evaluator starts over once its memo exceeds the cap, keeping its answers"""
    p = model.chain(6)
    f = logic.parse_formula("forall z. exists w. (z < w | w < x)", SIGNATURE)
    evaluator = logic.Evaluator(p.structure, memo_cap=5)
    expected = [logic.evaluate(p.structure, f, {"x": a}) for a in range(6)]
    assert [evaluator.evaluate(f, {"x": a}) for a in range(6)] == expected
    assert evaluator.memoized > 5
    assert evaluator.evaluate(logic.parse_formula("x = x", SIGNATURE), {"x": 0})
    assert evaluator.memoized == 1
    evaluator.clear()
    assert evaluator.memoized == 0
