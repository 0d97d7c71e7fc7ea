import numpy as np
import pytest

from pyudtfs import gallery, model
from pyudtfs.logic import FormulaSet
from pyudtfs.typespace import ParamSet, TypeTrace, enumerate_types, realize_type

SIGNATURE = [("<", 2)]


def test_param_set():
    """Test parameter sets of elements and tuples"""
    B = ParamSet([3, (1,), [4]])
    assert B.entries == ((3,), (1,), (4,))
    assert B.elements == [1, 3, 4]
    assert B.index((4,)) == 2
    assert (1,) in B and (2,) not in B
    assert ParamSet([], arity=2).arity == 2
    with pytest.raises(ValueError):
        ParamSet([1, 1])
    with pytest.raises(ValueError):
        ParamSet([(1,), (1, 2)])
    with pytest.raises(ValueError):
        ParamSet.of_elements([5]).validate(model.chain(3).structure)


def test_chain_types():
    """Test the two types of a chain of three elements over its middle element"""
    p = model.chain(3)
    delta = FormulaSet.parse(["y < x"], SIGNATURE)
    traces = enumerate_types(p.structure, delta, ParamSet.of_elements([1]))
    assert len(traces) == 2
    assert traces[0].realizers == (0, 1)
    assert traces[1].realizers == (2,)
    assert traces[1].positive == {(0, 0)}
    assert traces[0] != traces[1]
    assert realize_type(p.structure, delta, 2, ParamSet.of_elements([1])) == traces[1]


def test_grid_type():
    """Test the type of an element of the upper half of copy 0 of the grid"""
    spec = gallery.GridOrderSpec(2)
    grid = gallery.make_grid_order(spec)
    delta = FormulaSet.parse(["y < x"], SIGNATURE)
    B = ParamSet.of_elements(grid.B)
    trace = realize_type(grid.poset.structure, delta, spec.element(5, 0), B)
    positive = {B[j][0] for j in trace.positive_parameters()}
    assert positive == {spec.element(0, 1), spec.element(0, 2), spec.element(4, 0)}
    assert trace.get_description()["realizers"] == [spec.element(5, 0)]


def test_grid_type_count():
    """Test the upper half of copy 0 realizes 2n-1 types"""
    delta = FormulaSet.parse(["y < x"], SIGNATURE)
    for n in (2, 3, 4):
        grid = gallery.make_grid_order(gallery.GridOrderSpec(n))
        traces = enumerate_types(grid.poset.structure, delta, ParamSet.of_elements(grid.B), over=grid.A)
        assert len(traces) == 2 * n - 1


def test_hypercube_types():
    """Test points of the hypercube poset have distinct types over the half-spaces"""
    spec = gallery.HypercubePosetSpec(1)
    hypercube = gallery.make_hypercube_poset(spec)
    delta = FormulaSet.parse(["x < y"], SIGNATURE)
    B = ParamSet.of_elements(hypercube.H)
    trace = realize_type(hypercube.poset.structure, delta, 0, B)
    assert {B[j][0] for j in trace.positive_parameters()} == {spec.half_space(0, 1), spec.half_space(1, 1)}
    hypercube = gallery.make_hypercube_poset(gallery.HypercubePosetSpec(2))
    traces = enumerate_types(hypercube.poset.structure, delta, ParamSet.of_elements(hypercube.H), over=hypercube.P)
    assert len(traces) == 8


def test_types_move_with_automorphisms():
    """Test the type of the image of an element is the type of the element over the image parameters"""
    spec = gallery.HypercubePosetSpec(2)
    structure = gallery.make_hypercube_poset(spec).poset.structure
    delta = FormulaSet.parse(["x < y", "x = y"], SIGNATURE)
    B = ParamSet.of_elements(range(structure.universe_size))
    for i in range(3):
        sigma = gallery.coordinate_flip(spec, i)
        for a in range(structure.universe_size):
            image = realize_type(structure, delta, int(sigma[a]), B)
            own = realize_type(structure, delta, a, B)
            assert np.array_equal(image.matrix[:, sigma], own.matrix)


def test_empty_parameters():
    """Test a single type over no parameters"""
    p = model.chain(4)
    delta = FormulaSet.parse(["x < y"], SIGNATURE)
    traces = enumerate_types(p.structure, delta, ParamSet([]))
    assert len(traces) == 1
    assert traces[0].matrix.shape == (1, 0)
    assert traces[0].realizers == (0, 1, 2, 3)


def test_arity_errors():
    """Test tuples of the wrong length are rejected"""
    p = model.chain(3)
    delta = FormulaSet.parse(["x < y"], SIGNATURE)
    with pytest.raises(ValueError):
        realize_type(p.structure, delta, (0, 1), ParamSet.of_elements([1]))
    with pytest.raises(ValueError):
        realize_type(p.structure, delta, 0, ParamSet([(0, 1)]))
    pairs = FormulaSet.parse(["x < y"], SIGNATURE, x=("x", "y"), y=())
    with pytest.raises(ValueError):
        enumerate_types(p.structure, pairs, ParamSet([]))
    assert isinstance(realize_type(p.structure, pairs, (0, 1), ParamSet([], arity=0)), TypeTrace)
