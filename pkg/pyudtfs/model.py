"""
Module with finite relational structures, poset validation and order-theoretic measurements
"""
import itertools
import logging

import networkx as nx
import numpy as np

from .config import get_settings, ResourceLimitError

logger = logging.getLogger(__name__)


class PosetError(ValueError):
    """A relation fails one of the strict partial order axioms"""


class Relation:
    """A named finite relation over the universe of a structure"""

    def __init__(self, name, arity, tuples, universe_size):
        """

        Args:
            name (str): Name of the relation.
            arity (int): Number of arguments (at least 1).
            tuples (iterable of tuple of int): The tuples in the relation.
            universe_size (int): Size of the universe the tuples refer to.
        """
        if not name:
            raise ValueError("Relation names must be nonempty")
        if arity < 1:
            raise ValueError("Relation %s must have positive arity" % name)
        self.name = name
        self.arity = arity
        tuples = frozenset(tuple(int(e) for e in t) for t in tuples)
        for t in tuples:
            if len(t) != arity:
                raise ValueError("Tuple %s of relation %s does not have arity %d" % (t, name, arity))
            if any(e < 0 or e >= universe_size for e in t):
                raise ValueError("Tuple %s of relation %s is out of the universe" % (t, name))
        self.tuples = tuples

        # Dense storage for unary and binary relations, the only ones used in comparisons
        if arity <= 2:
            self.matrix = np.zeros((universe_size,) * arity, dtype=bool)
            if tuples:
                self.matrix[tuple(np.array(sorted(tuples)).T)] = True
            self.matrix.setflags(write=False)
        else:
            self.matrix = None

    def holds(self, args):
        """Check whether a tuple of elements is in the relation"""
        if self.matrix is not None:
            return bool(self.matrix[tuple(args)])
        return tuple(args) in self.tuples


class FiniteStructure:
    """A finite universe {0, ..., n-1} with named finite relations"""

    def __init__(self, universe_size, relations, labels=None):
        """

        Args:
            universe_size (int): Number of elements.
            relations (dict): Mapping from relation name to either a pair (arity, tuples) or a nonempty iterable of
                              tuples (the arity is then read from them).
            labels (dict): Optional mapping from element index to a human-readable label.
        """
        if universe_size < 0:
            raise ValueError("The universe size must be nonnegative")
        self.universe_size = int(universe_size)
        self.relations = {}
        for name, value in relations.items():
            if isinstance(value, tuple) and len(value) == 2 and isinstance(value[0], int):
                arity, tuples = value
            else:
                tuples = [tuple(t) for t in value]
                if not tuples:
                    raise ValueError("The arity of the empty relation %s must be given explicitly" % name)
                arity = len(tuples[0])
            self.relations[name] = Relation(name, arity, tuples, self.universe_size)
        self.labels = {int(k): str(v) for k, v in (labels or {}).items()}
        self._indices = {v: k for k, v in self.labels.items()}
        if len(self._indices) != len(self.labels):
            raise ValueError("Element labels must be unique")

    @property
    def signature(self):
        """List of (name, arity) pairs"""
        return [(r.name, r.arity) for r in self.relations.values()]

    @property
    def elements(self):
        return range(self.universe_size)

    def relation(self, name):
        try:
            return self.relations[name]
        except KeyError:
            raise ValueError("Unknown relation %s" % name) from None

    def holds(self, name, args):
        return self.relation(name).holds(args)

    def label(self, element):
        """Human-readable label of an element (its index when unlabeled)"""
        return self.labels.get(element, str(element))

    def index(self, label):
        """Element with a given label"""
        try:
            return self._indices[label]
        except KeyError:
            raise ValueError("Unknown element label %s" % label) from None

    def get_description(self):
        """Get a dictionary describing the instance, in the model file format"""
        description = {"universe": self.universe_size,
                       "relations": {r.name: sorted(list(t) for t in r.tuples) for r in self.relations.values()}}
        # Arity of empty relations cannot be read back from the tuples
        arities = {r.name: r.arity for r in self.relations.values() if not r.tuples}
        if arities:
            description["arities"] = arities
        if self.labels:
            description["labels"] = {v: k for k, v in sorted(self.labels.items())}
        return description


class PosetView:
    """A structure together with a binary relation validated as a strict partial order"""

    def __init__(self, structure, order_relation):
        self.structure = structure
        self.order_relation = order_relation
        self.less = structure.relation(order_relation).matrix
        self.comparable = self.less | self.less.T

    @property
    def universe_size(self):
        return self.structure.universe_size

    def down_set(self, a):
        return frozenset(int(x) for x in np.flatnonzero(self.less[:, a]))

    def up_set(self, a):
        return frozenset(int(x) for x in np.flatnonzero(self.less[a, :]))

    def down_set_sizes(self):
        """Vector with |{x : x < a}| for every a"""
        return self.less.sum(axis=0)

    def up_set_sizes(self):
        """Vector with |{x : a < x}| for every a"""
        return self.less.sum(axis=1)


def validate_poset(structure, relation):
    """
    Check that a binary relation of a structure is a strict partial order.

    Args:
        structure (FiniteStructure): The structure.
        relation (str): Name of the relation to interpret as a strict order.

    Returns:
        PosetView: The validated view.

    Raises:
        PosetError: Naming the first violating pair or triple.

    """
    r = structure.relation(relation)
    if r.arity != 2:
        raise PosetError("Relation %s is not binary" % relation)
    m = r.matrix
    diagonal = np.flatnonzero(np.diagonal(m))
    if diagonal.size:
        a = int(diagonal[0])
        raise PosetError("irreflexivity violated at (%d,%d)" % (a, a))
    symmetric = np.argwhere(m & m.T)
    if symmetric.size:
        a, b = (int(v) for v in symmetric[0])
        raise PosetError("asymmetry violated at (%d,%d),(%d,%d)" % (a, b, b, a))
    composed = (m.astype(np.int64) @ m.astype(np.int64)) > 0
    missing = np.argwhere(composed & ~m)
    if missing.size:
        a, c = (int(v) for v in missing[0])
        b = int(np.flatnonzero(m[a, :] & m[:, c])[0])
        raise PosetError("transitivity violated at (%d,%d),(%d,%d): (%d,%d) absent" % (a, b, b, c, a, c))
    return PosetView(structure, relation)


def poset_from_cover(universe_size, cover, order="<", labels=None, extra_relations=None):
    """
    Build a poset structure from a cover (or any acyclic generating) relation, closing it transitively.

    Args:
        universe_size (int): Number of elements.
        cover (iterable of pairs): Generating pairs (a, b) meaning a < b.
        order (str): Name for the order relation.
        labels (dict): Optional element labels.
        extra_relations (dict): Further relations for the structure.

    Returns:
        PosetView: The validated poset.

    """
    graph = nx.DiGraph()
    graph.add_nodes_from(range(universe_size))
    graph.add_edges_from(cover)
    if not nx.is_directed_acyclic_graph(graph):
        raise PosetError("The generating relation has a cycle")
    closure = nx.transitive_closure_dag(graph)
    relations = {order: (2, sorted(closure.edges()))}
    relations.update(extra_relations or {})
    return validate_poset(FiniteStructure(universe_size, relations, labels=labels), order)


def chain(length, order="<"):
    """A chain 0 < 1 < ... < length-1"""
    return poset_from_cover(length, [(i, i + 1) for i in range(length - 1)], order=order)


def _color_sort(candidates, adjacency):
    """Greedy coloring of a candidate bitset, giving an upper bound for each vertex"""
    order = []
    bounds = []
    uncolored = candidates
    color = 0
    while uncolored:
        color += 1
        available = uncolored
        while available:
            v = (available & -available).bit_length() - 1
            available &= ~(1 << v) & ~adjacency[v]
            uncolored &= ~(1 << v)
            order.append(v)
            bounds.append(color)
    return order, bounds


def maximum_antichain(p, universe_cap=None):
    """
    Find a maximum antichain of a poset.

    The search is an exact branch and bound for a maximum clique of the incomparability graph, bounded by greedy
    colorings.

    Args:
        p (PosetView): The poset.
        universe_cap (int): Abort above this universe size. Defaults to the configured cap.

    Returns:
        list of int: A maximum antichain, sorted.

    """
    n = p.universe_size
    cap = universe_cap if universe_cap is not None else get_settings().universe_cap
    if n > cap:
        raise ResourceLimitError("universe_cap", cap, "width search over %d elements" % n)
    adjacency = []
    for a in range(n):
        bits = 0
        for b in np.flatnonzero(~p.comparable[a]):
            if b != a:
                bits |= 1 << int(b)
        adjacency.append(bits)

    best = []
    nodes = 0

    def expand(current, candidates):
        nonlocal best, nodes
        nodes += 1
        order, bounds = _color_sort(candidates, adjacency)
        for v, bound in zip(reversed(order), reversed(bounds)):
            if len(current) + bound <= len(best):
                return
            extended = current + [v]
            remaining = candidates & adjacency[v]
            if remaining:
                expand(extended, remaining)
            elif len(extended) > len(best):
                best = extended
            candidates &= ~(1 << v)

    if n:
        expand([], (1 << n) - 1)
    logger.debug("Maximum antichain of size %d found after %d nodes", len(best), nodes)
    return sorted(best)


def width(p, universe_cap=None):
    """
    Width of a poset: the maximum size of an antichain.

    Args:
        p (PosetView): The poset.
        universe_cap (int): Abort above this universe size. Defaults to the configured cap.

    Returns:
        int: The width (0 only for the empty poset).

    """
    return len(maximum_antichain(p, universe_cap=universe_cap))


def brute_force_width(p):
    """Width by enumerating all subsets, largest first. Only usable for small posets."""
    n = p.universe_size
    for size in range(n, 0, -1):
        for subset in itertools.combinations(range(n), size):
            if is_antichain(p, subset):
                return size
    return 0


def down_set_size(p, a):
    """Number of elements strictly below a"""
    if not 0 <= a < p.universe_size:
        raise ValueError("Element %s is not in the universe" % a)
    return int(p.less[:, a].sum())


def is_antichain(p, elements):
    """Check whether no two distinct elements of a set are comparable"""
    elements = sorted(set(elements))
    if not elements:
        return True
    return not p.comparable[np.ix_(elements, elements)].any()


def structure_from_description(description):
    """
    Build a structure from a model file description (see FiniteStructure.get_description).

    Args:
        description (dict): With keys universe, relations and optionally arities and labels.

    Returns:
        FiniteStructure: The structure.

    """
    if not isinstance(description, dict) or "universe" not in description:
        raise ValueError("A model description needs a universe size")
    arities = description.get("arities") or {}
    relations = {}
    for name, tuples in (description.get("relations") or {}).items():
        tuples = [tuple(t) for t in tuples or []]
        if name in arities:
            relations[name] = (int(arities[name]), tuples)
        elif not tuples:
            raise ValueError("The arity of the empty relation %s must be given" % name)
        else:
            relations[name] = tuples
    labels = {int(index): label for label, index in (description.get("labels") or {}).items()}
    return FiniteStructure(int(description["universe"]), relations, labels=labels)
