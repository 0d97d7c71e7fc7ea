"""
Module computing automorphism groups of finite structures, their point stabilizers and orbit partitions

The search individualizes points and refines colorings by relation degrees into color classes until the coloring is
equitable, walking a stabilizer chain. For every base point v, each candidate image w in the cell of v is either
already reached by the generators found so far or is tested by an exhaustive backtracking search for an automorphism
mapping v to w. Refinement only prunes: every candidate leaf is checked to preserve all relations, and no candidate
image is skipped unless it is known to lie in the orbit. The generators therefore generate the full stabilizer.

In a finite structure two tuples have the same complete type over a set of parameters if and only if an automorphism
fixing the parameters maps one onto the other, so orbits of stabilizers are the type classes used elsewhere.
"""
import dataclasses
import itertools
import logging
from collections import deque
from typing import Tuple

import numpy as np

from .config import get_settings, ResourceLimitError

logger = logging.getLogger(__name__)


def identity(n):
    return np.arange(n, dtype=np.intp)


def compose(first, then):
    """The permutation applying first and then then"""
    return then[first]


def is_automorphism(structure, permutation):
    """
    Check whether a permutation preserves every relation of a structure, in both directions.

    Args:
        structure (FiniteStructure): The structure.
        permutation (sequence of int): Image array of length universe_size.

    Returns:
        bool: Whether it is an automorphism.

    """
    perm = np.asarray(permutation, dtype=np.intp)
    n = structure.universe_size
    if perm.shape != (n,):
        raise ValueError("Permutation of length %d for a universe of size %d" % (len(perm), n))
    if not np.array_equal(np.sort(perm), identity(n)):
        raise ValueError("Not a bijection on the universe")
    for relation in structure.relations.values():
        if relation.arity == 1:
            if not np.array_equal(relation.matrix[perm], relation.matrix):
                return False
        elif relation.arity == 2:
            if not np.array_equal(relation.matrix[np.ix_(perm, perm)], relation.matrix):
                return False
        elif {tuple(int(perm[e]) for e in t) for t in relation.tuples} != relation.tuples:
            return False
    return True


class UnionFind:
    def __init__(self, size):
        self.parent = list(range(size))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # Smallest element as root keeps orbit representatives canonical
            self.parent[max(rx, ry)] = min(rx, ry)


@dataclasses.dataclass(frozen=True)
class OrbitPartition:
    """Partition of the universe into orbits of the pointwise stabilizer of some fixed elements"""
    fixed: Tuple[int, ...]
    orbits: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        index = {}
        for k, orbit in enumerate(self.orbits):
            for a in orbit:
                index[a] = k
        object.__setattr__(self, "_index", index)

    def orbit_of(self, a):
        return self.orbits[self._index[a]]

    def same_orbit(self, a, b):
        return self._index[a] == self._index[b]

    def get_description(self):
        return {"fixed": list(self.fixed), "orbits": [list(o) for o in self.orbits]}


def orbit_partition(universe_size, generators, fixed=()):
    """Orbit partition of the group generated by some permutations, by union-find over generator images"""
    uf = UnionFind(universe_size)
    for g in generators:
        for a in range(universe_size):
            uf.union(a, int(g[a]))
    classes = {}
    for a in range(universe_size):
        classes.setdefault(uf.find(a), []).append(a)
    return OrbitPartition(tuple(fixed), tuple(tuple(c) for _, c in sorted(classes.items())))


def transversal(generators, start):
    """
    Group elements carrying a point, or a tuple of points, onto every member of its orbit.

    Args:
        generators (list of numpy.ndarray): Generators of the group.
        start (int or tuple of int): The point or tuple.

    Returns:
        dict: Mapping from each orbit member to a permutation whose image of start is that member.

    """
    if not generators:
        return {start: None}
    n = len(generators[0])
    single = not isinstance(start, tuple)
    key = (start,) if single else start
    reached = {key: identity(n)}
    queue = deque([key])
    while queue:
        current = queue.popleft()
        for g in generators:
            image = tuple(int(g[e]) for e in current)
            if image not in reached:
                reached[image] = compose(reached[current], g)
                queue.append(image)
    if single:
        return {k[0]: v for k, v in reached.items()}
    return reached


def _orbit_of(point, generators):
    orbit = {point}
    queue = deque([point])
    while queue:
        current = queue.popleft()
        for g in generators:
            image = int(g[current])
            if image not in orbit:
                orbit.add(image)
                queue.append(image)
    return orbit


class _Refiner:
    """Equitable refinement of colorings by relation degrees"""

    def __init__(self, structure):
        n = structure.universe_size
        self.n = n
        self.matrices = []
        columns = []
        for relation in structure.relations.values():
            if relation.arity == 1:
                columns.append(relation.matrix.astype(np.int64))
            elif relation.arity == 2:
                m = relation.matrix.astype(np.int64)
                self.matrices.append(m)
                columns.append(np.diagonal(m).copy())
            else:
                for position in range(relation.arity):
                    counts = np.zeros(n, dtype=np.int64)
                    for t in relation.tuples:
                        counts[t[position]] += 1
                    columns.append(counts)
        signature = np.stack(columns, axis=1) if columns else np.zeros((n, 1), dtype=np.int64)
        self.base = self._relabel(signature)[0] if n else np.zeros(0, dtype=np.int64)

    @staticmethod
    def _relabel(signature):
        rows, inverse, counts = np.unique(signature, axis=0, return_inverse=True, return_counts=True)
        return inverse.reshape(-1).astype(np.int64), (rows.shape, rows.tobytes(), counts.tobytes())

    def refine(self, colors):
        """Refine a coloring until equitable, returning the canonical coloring and a trace for compatibility checks"""
        trace = []
        while True:
            k = len(np.unique(colors))
            onehot = np.zeros((self.n, int(colors.max()) + 1), dtype=np.int64)
            onehot[np.arange(self.n), colors] = 1
            parts = [colors[:, None]]
            for m in self.matrices:
                parts.append(m @ onehot)
                parts.append(m.T @ onehot)
            refined, step = self._relabel(np.hstack(parts))
            trace.append(step)
            if int(refined.max()) + 1 == k:
                return refined, tuple(trace)
            colors = refined

    def individualize(self, colors, element):
        colors = colors.copy()
        colors[element] = colors.max() + 1
        return self.refine(colors)


class _Search:
    def __init__(self, structure, node_budget):
        self.structure = structure
        self.refiner = _Refiner(structure)
        self.node_budget = node_budget
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise ResourceLimitError("node_budget", self.node_budget, "automorphism search")

    def seed(self, fixed):
        colors, _ = self.refiner.refine(self.refiner.base.copy())
        for a in fixed:
            colors, _ = self.refiner.individualize(colors, a)
        return colors

    def extend(self, left, right):
        """An automorphism mapping each left color class onto the equally colored right class, if any"""
        self.tick()
        sizes = np.bincount(left)
        if len(sizes) == self.refiner.n:
            perm = np.empty(self.refiner.n, dtype=np.intp)
            perm[np.argsort(left)] = np.argsort(right)
            return perm if is_automorphism(self.structure, perm) else None
        cell = int(np.flatnonzero(sizes > 1)[0])
        v = int(np.flatnonzero(left == cell)[0])
        left_next, left_trace = self.refiner.individualize(left, v)
        for w in np.flatnonzero(right == cell):
            right_next, right_trace = self.refiner.individualize(right, int(w))
            if right_trace != left_trace:
                continue
            found = self.extend(left_next, right_next)
            if found is not None:
                return found
        return None

    def chain(self, colors, generators, basic_orbits):
        """Collect generators of the stabilizer of the individualized points of a coloring"""
        self.tick()
        sizes = np.bincount(colors)
        if len(sizes) == self.refiner.n:
            return
        cell = int(np.flatnonzero(sizes > 1)[0])
        members = [int(w) for w in np.flatnonzero(colors == cell)]
        v = members[0]
        fixed_v, trace_v = self.refiner.individualize(colors, v)
        self.chain(fixed_v, generators, basic_orbits)
        orbit = _orbit_of(v, generators)
        for w in members[1:]:
            if w in orbit:
                continue
            fixed_w, trace_w = self.refiner.individualize(colors, w)
            if trace_w != trace_v:
                continue
            found = self.extend(fixed_v, fixed_w)
            if found is not None:
                generators.append(found)
                orbit = _orbit_of(v, generators)
        basic_orbits.insert(0, (v, tuple(sorted(orbit))))


@dataclasses.dataclass(frozen=True, eq=False)
class AutomorphismGroup:
    """The pointwise stabilizer of some fixed elements, given by generators and the basic orbits of the search"""
    universe_size: int
    fixed: Tuple[int, ...]
    generators: Tuple
    basic_orbits: Tuple
    nodes: int = 0

    @property
    def order(self):
        order = 1
        for _, orbit in self.basic_orbits:
            order *= len(orbit)
        return order

    def orbits(self):
        return orbit_partition(self.universe_size, self.generators, self.fixed)

    def get_description(self):
        return {"fixed": list(self.fixed), "order": self.order,
                "generators": [g.tolist() for g in self.generators],
                "basic_orbits": [[v, list(o)] for v, o in self.basic_orbits]}


def automorphism_group(structure, fixed=(), node_budget=None):
    """
    Compute the automorphisms fixing some elements pointwise.

    Args:
        structure (FiniteStructure): The structure.
        fixed (iterable of int): Elements to fix.
        node_budget (int): Maximum number of search nodes. Defaults to the configured budget.

    Returns:
        AutomorphismGroup: Generators (lexicographically sorted image arrays) and basic orbits.

    """
    fixed = tuple(dict.fromkeys(int(a) for a in fixed))
    n = structure.universe_size
    for a in fixed:
        if not 0 <= a < n:
            raise ValueError("Fixed element %s is not in the universe" % a)
    budget = node_budget if node_budget is not None else get_settings().node_budget
    generators = []
    basic_orbits = []
    search = _Search(structure, budget)
    if n:
        search.chain(search.seed(fixed), generators, basic_orbits)
    generators.sort(key=lambda g: tuple(g.tolist()))
    logger.debug("Stabilizer of %s: %d generators, %d search nodes", fixed, len(generators), search.nodes)
    return AutomorphismGroup(n, fixed, tuple(generators), tuple(basic_orbits), search.nodes)


def automorphism_generators(structure, fixed=(), node_budget=None):
    """Generators of the group of automorphisms fixing some elements pointwise"""
    return list(automorphism_group(structure, fixed, node_budget=node_budget).generators)


def orbits(structure, fixed=(), node_budget=None):
    """Orbit partition of the universe under the automorphisms fixing some elements pointwise"""
    return automorphism_group(structure, fixed, node_budget=node_budget).orbits()


def refine_colors(structure, fixed=()):
    """Equitable coloring obtained by individualizing some elements and refining by relation degrees"""
    search = _Search(structure, node_budget=1)
    if not structure.universe_size:
        return np.zeros(0, dtype=np.int64)
    return search.seed(tuple(dict.fromkeys(fixed)))


def brute_force_automorphisms(structure, fixed=(), max_size=10):
    """Every automorphism fixing some elements, by enumerating all bijections. Only usable for small structures."""
    n = structure.universe_size
    if n > max_size:
        raise ResourceLimitError("brute_force_size", max_size, "universe of size %d" % n)
    fixed = set(fixed)
    free = [a for a in range(n) if a not in fixed]
    found = []
    for images in itertools.permutations(free):
        perm = identity(n)
        perm[free] = images
        if is_automorphism(structure, perm):
            found.append(perm)
    return found
