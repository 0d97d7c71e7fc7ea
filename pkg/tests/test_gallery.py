import pytest

from pyudtfs import gallery, model, symmetry
from pyudtfs.config import ResourceLimitError


def test_grid_order():
    """Test size, designated sets and comparisons of the grid order"""
    spec = gallery.GridOrderSpec(2, 3)
    grid = gallery.make_grid_order(spec)
    p = grid.poset
    assert p.universe_size == 27
    assert len(grid.B) == 19
    assert grid.A == [spec.element(x, 0) for x in (5, 6, 7)]
    assert spec.element(4, 0) in grid.B
    assert p.less[spec.element(0, 0), spec.element(1, 0)]
    assert p.less[spec.element(1, 0), spec.element(6, 1)]
    assert not p.less[spec.element(2, 0), spec.element(6, 1)]
    assert p.structure.label(spec.element(3, 1)) == "g3_1"
    assert spec.coordinates(spec.element(3, 1)) == (3, 1)


def test_grid_widths():
    """Test the grid order has one chain per copy"""
    for n in (1, 2, 3):
        assert model.width(gallery.make_grid_order(gallery.GridOrderSpec(n)).poset) == 3
    for k in (2, 4, 5):
        assert model.width(gallery.make_grid_order(gallery.GridOrderSpec(1, k)).poset) == k


def test_grid_spec_validation():
    """Test invalid grid parameters"""
    with pytest.raises(ValueError):
        gallery.GridOrderSpec(0)
    with pytest.raises(ValueError):
        gallery.GridOrderSpec(1, 1)


def test_hypercube_poset():
    """Test layout and membership of the hypercube poset"""
    spec = gallery.HypercubePosetSpec(2)
    hypercube = gallery.make_hypercube_poset(spec)
    p = hypercube.poset
    assert p.universe_size == 14
    assert hypercube.P == list(range(8))
    assert hypercube.H == list(range(8, 14))
    assert p.structure.label(0) == "P_ppp"
    assert p.structure.label(spec.half_space(0, 1)) == "H0p"
    assert p.structure.label(spec.half_space(2, -1)) == "H2m"
    assert p.less[0, spec.half_space(0, 1)]
    assert not p.less[0, spec.half_space(0, -1)]
    for d in (1, 2, 3):
        assert model.width(gallery.make_hypercube_poset(gallery.HypercubePosetSpec(d)).poset) == 2 ** (d + 1)


def test_hypercube_cap():
    """Test the dimension guard"""
    with pytest.raises(ResourceLimitError):
        gallery.make_hypercube_poset(gallery.HypercubePosetSpec(3), max_d=2)
    with pytest.raises(ValueError):
        gallery.HypercubePosetSpec(0)


def test_named_automorphisms():
    """Test coordinate flips and copy permutations preserve the order"""
    spec = gallery.HypercubePosetSpec(2)
    structure = gallery.make_hypercube_poset(spec).poset.structure
    for i in range(3):
        flip = gallery.coordinate_flip(spec, i)
        assert symmetry.is_automorphism(structure, flip)
        assert flip[spec.half_space(i, 1)] == spec.half_space(i, -1)
    grid_spec = gallery.GridOrderSpec(1)
    grid = gallery.make_grid_order(grid_spec).poset.structure
    assert symmetry.is_automorphism(grid, gallery.copy_permutation(grid_spec, [2, 0, 1]))


def test_random_width_poset():
    """Test random posets have the requested width and are reproducible"""
    for w, size, seed in [(1, 6, 0), (2, 8, 1), (3, 12, 7), (5, 9, 3)]:
        p = gallery.random_width_poset(w, size, seed=seed)
        assert p.universe_size == size
        assert model.width(p) == w
        again = gallery.random_width_poset(w, size, seed=seed)
        assert again.structure.get_description() == p.structure.get_description()
    with pytest.raises(ValueError, match="size 2 < width_target 3"):
        gallery.random_width_poset(3, 2, seed=0)
