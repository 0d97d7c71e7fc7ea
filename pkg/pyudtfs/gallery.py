"""
Module with deterministic generators of example posets
"""
import dataclasses
import itertools
import logging
from typing import List, NamedTuple

import numpy as np

from .config import get_settings, ResourceLimitError
from .model import PosetView, poset_from_cover, width

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class GridOrderSpec:
    """Discretized order on k copies of a line, where copies only compare across half the grid span.

    The universe is {0..4n} x {0..k-1}, element (x, i) encoded as x*k + i, and
    :math:`(x,i) < (y,j)` iff :math:`i=j, x<y` or :math:`i \\neq j, x+2n<y`.
    """
    n: int
    k: int = 3

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("The grid granularity n must be positive")
        if self.k < 2:
            raise ValueError("At least two copies are needed")

    @property
    def span(self):
        return 4 * self.n

    def element(self, x, i):
        return x * self.k + i

    def coordinates(self, element):
        return divmod(element, self.k)

    def get_description(self):
        return {"family": "grid", "n": self.n, "k": self.k}


@dataclasses.dataclass(frozen=True)
class HypercubePosetSpec:
    """Points of {+1,-1}^(d+1) ordered by membership in the 2(d+1) coordinate half-spaces.

    Points come first, in lexicographic sign order with +1 before -1, followed by
    H(0,+1), H(0,-1), H(1,+1), ...
    """
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("The dimension parameter d must be at least 1")

    @property
    def points(self):
        return list(itertools.product((1, -1), repeat=self.d + 1))

    @property
    def point_count(self):
        return 2 ** (self.d + 1)

    def half_space(self, i, sign):
        return self.point_count + 2 * i + (0 if sign == 1 else 1)

    def get_description(self):
        return {"family": "hypercube", "d": self.d}


class GridOrder(NamedTuple):
    poset: PosetView
    B: List[int]
    A: List[int]


class HypercubePoset(NamedTuple):
    poset: PosetView
    P: List[int]
    H: List[int]


def make_grid_order(spec):
    """
    Build the grid order with its designated parameter and realizer sets.

    For k copies, B is the whole grid on copies 1 and 2 plus the midpoint (2n, 0) of copy 0, and A is the open
    upper half (2n, 4n) of copy 0.

    Args:
        spec (GridOrderSpec): The grid parameters.

    Returns:
        GridOrder: The poset, B and A.

    """
    n, k, span = spec.n, spec.k, spec.span
    cover = []
    for x, y in itertools.combinations(range(span + 1), 2):
        for i in range(k):
            cover.append((spec.element(x, i), spec.element(y, i)))
            if x + 2 * n < y:
                cover.extend((spec.element(x, i), spec.element(y, j)) for j in range(k) if j != i)
    labels = {spec.element(x, i): "g%d_%d" % (x, i) for x in range(span + 1) for i in range(k)}
    poset = poset_from_cover((span + 1) * k, cover, labels=labels)
    copies = [c for c in (1, 2) if c < k]
    B = sorted([spec.element(x, c) for x in range(span + 1) for c in copies] + [spec.element(2 * n, 0)])
    A = [spec.element(x, 0) for x in range(2 * n + 1, span)]
    return GridOrder(poset, B, A)


def make_hypercube_poset(spec, max_d=None):
    """
    Build the membership poset of points and coordinate half-spaces.

    Args:
        spec (HypercubePosetSpec): The dimension parameter.
        max_d (int): Resource guard on d. Defaults to the configured cap.

    Returns:
        HypercubePoset: The poset, the points P and the half-spaces H.

    """
    cap = max_d if max_d is not None else get_settings().hypercube_max_d
    if spec.d > cap:
        raise ResourceLimitError("hypercube_max_d", cap)
    points = spec.points
    cover = []
    for index, point in enumerate(points):
        for i, sign in enumerate(point):
            cover.append((index, spec.half_space(i, sign)))
    labels = {index: "P_" + "".join("p" if s == 1 else "m" for s in point) for index, point in enumerate(points)}
    for i in range(spec.d + 1):
        for sign in (1, -1):
            labels[spec.half_space(i, sign)] = "H%d%s" % (i, "p" if sign == 1 else "m")
    size = spec.point_count + 2 * (spec.d + 1)
    poset = poset_from_cover(size, cover, labels=labels)
    return HypercubePoset(poset, list(range(spec.point_count)), list(range(spec.point_count, size)))


def coordinate_flip(spec, i):
    """The automorphism flipping coordinate i of every point and swapping H(i,+1) with H(i,-1)"""
    image = list(range(spec.point_count + 2 * (spec.d + 1)))
    points = spec.points
    position = {p: index for index, p in enumerate(points)}
    for index, point in enumerate(points):
        flipped = point[:i] + (-point[i],) + point[i + 1:]
        image[index] = position[flipped]
    image[spec.half_space(i, 1)] = spec.half_space(i, -1)
    image[spec.half_space(i, -1)] = spec.half_space(i, 1)
    return np.array(image, dtype=np.intp)


def copy_permutation(spec, permutation):
    """The automorphism of a grid order permuting the copies, fixing the grid coordinate"""
    image = np.empty((spec.span + 1) * spec.k, dtype=np.intp)
    for x in range(spec.span + 1):
        for i in range(spec.k):
            image[spec.element(x, i)] = spec.element(x, permutation[i])
    return image


def random_width_poset(width_target, size, seed, max_rejections=None, order="<"):
    """
    Generate a random poset of an exact width.

    Layers of at most width_target elements (one of them exactly that large) are stacked; every element is placed
    above a random nonempty part of the previous layer and above random earlier elements, the relation is closed
    transitively and the result is rejected unless its width is width_target.

    Args:
        width_target (int): The width of the poset.
        size (int): Number of elements.
        seed (int): Seed of the generator. Identical seeds give identical posets.
        max_rejections (int): Attempts before giving up. Defaults to the configured value.
        order (str): Name of the order relation.

    Returns:
        PosetView: The poset.

    """
    if width_target < 1:
        raise ValueError("The width must be positive")
    if size < width_target:
        raise ValueError("size %d < width_target %d: no such poset" % (size, width_target))
    attempts = max_rejections if max_rejections is not None else get_settings().max_rejections
    rng = np.random.default_rng(seed)
    for attempt in range(attempts):
        layers = _random_layers(rng, width_target, size)
        cover = []
        previous = []
        earlier = []
        start = 0
        for layer_size in layers:
            layer = list(range(start, start + layer_size))
            for element in layer:
                if previous:
                    below = [b for b in previous if rng.random() < 0.6]
                    if not below:
                        below = [previous[int(rng.integers(len(previous)))]]
                    cover.extend((b, element) for b in below)
                    cover.extend((b, element) for b in earlier if rng.random() < 0.3)
            earlier.extend(previous)
            previous = layer
            start += layer_size
        poset = poset_from_cover(size, cover, order=order)
        if width(poset) == width_target:
            logger.debug("Random poset of width %d accepted after %d rejections", width_target, attempt)
            return poset
    raise ResourceLimitError("max_rejections", attempts, "no poset of width %d and size %d found" %
                             (width_target, size))


def _random_layers(rng, width_target, size):
    """Random layer sizes in [1, width_target] adding up to size, one of them equal to width_target"""
    layers = [width_target]
    remaining = size - width_target
    while remaining > 0:
        layer = int(rng.integers(1, min(width_target, remaining) + 1))
        layers.append(layer)
        remaining -= layer
    position = int(rng.integers(len(layers)))
    layers[0], layers[position] = layers[position], layers[0]
    return layers
