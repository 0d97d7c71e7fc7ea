"""
Module deciding d-parameter definability of types over finite parameter sets

A type over B is definable over parameters b̄ in a finite structure exactly when its trace on B is invariant under
the automorphisms fixing b̄ pointwise: the defining set only has to agree with the type on B, so invariance is only
required between members of B in a common orbit. Negative answers carry an automorphism flipping a classified pair.
"""
import dataclasses
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Tuple

import networkx as nx
import numpy as np

from .config import get_settings, ResourceLimitError
from .logic import (Atom, Const, Equals, Evaluator, Exists, Forall, Implies, Not, Var, conjoin, disjoin,
                    format_formula, fresh_variable, substitute, variables)
from .symmetry import automorphism_group, is_automorphism, transversal

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class ParameterOrbits:
    """Orbits on the entries of a parameter set under the stabilizer of some elements"""
    fixed: Tuple[int, ...]
    classes: Tuple[Tuple[int, ...], ...]
    transversals: Tuple[dict, ...]

    def carrier(self, k, target):
        """A permutation of the stabilizer mapping the first entry of class k onto target"""
        return self.transversals[k][target]


class StabilizerCache:
    """Orbits of the entries of one parameter set under pointwise stabilizers, keyed by the fixed elements"""

    def __init__(self, structure, B, node_budget=None):
        self.structure = structure
        self.B = B
        self.node_budget = node_budget
        self._orbits = {}

    def __len__(self):
        return len(self._orbits)

    def get(self, elements):
        key = tuple(sorted(set(elements)))
        if key not in self._orbits:
            self._orbits[key] = self._compute(key)
        return self._orbits[key]

    def _compute(self, fixed):
        group = automorphism_group(self.structure, fixed, node_budget=self.node_budget)
        identity = np.arange(self.structure.universe_size, dtype=np.intp)
        assigned = set()
        classes = []
        transversals = []
        for j, entry in enumerate(self.B):
            if j in assigned:
                continue
            reached = transversal(list(group.generators), entry) if group.generators else {entry: identity}
            members = tuple(k for k, other in enumerate(self.B) if other in reached)
            assigned.update(members)
            classes.append(members)
            transversals.append(reached)
        return ParameterOrbits(fixed, tuple(classes), tuple(transversals))


@dataclasses.dataclass(frozen=True, eq=False)
class Conflict:
    """An automorphism fixing the parameters that maps B entry b onto b_image while the type separates them"""
    permutation: np.ndarray
    b: int
    b_image: int
    formula: int

    def get_description(self):
        return {"permutation": self.permutation.tolist(), "b": self.b, "b_image": self.b_image,
                "formula": self.formula}


@dataclasses.dataclass(frozen=True, eq=False)
class DefinabilityVerdict:
    trace: object
    params: Tuple
    verdict: bool
    orbits: Optional[Tuple[Tuple[int, ...], ...]] = None
    conflict: Optional[Conflict] = None

    def replay(self, structure):
        """Check the certificate independently of the search that produced it"""
        if self.verdict:
            for cls in self.orbits:
                for i in range(len(self.trace.delta)):
                    if len({self.trace.holds(i, j) for j in cls}) > 1:
                        return False
            return True
        c = self.conflict
        perm = c.permutation
        fixed = {e for b in self.params for e in b}
        if any(int(perm[e]) != e for e in fixed):
            return False
        if not is_automorphism(structure, perm):
            return False
        B = self.trace.B
        if tuple(int(perm[e]) for e in B[c.b]) != B[c.b_image]:
            return False
        return self.trace.holds(c.formula, c.b) != self.trace.holds(c.formula, c.b_image)

    def get_description(self):
        description = {"params": [list(b) for b in self.params], "verdict": self.verdict}
        if self.verdict:
            description["orbits"] = [list(c) for c in self.orbits]
        else:
            description["conflict"] = self.conflict.get_description()
        return description


def is_definable_over(structure, trace, params, cache=None):
    """
    Decide whether a type is definable with some parameters drawn from its parameter set.

    Args:
        structure (FiniteStructure): The structure.
        trace (TypeTrace): The type.
        params (sequence of tuple): Entries of trace.B used as parameters.
        cache (StabilizerCache): Stabilizer orbits to reuse. Must belong to the same structure and B.

    Returns:
        DefinabilityVerdict: The verdict with its certificate.

    """
    params = tuple(tuple(b) for b in params)
    for b in params:
        if b not in trace.B:
            raise ValueError("Parameter %s is not an entry of B" % (b,))
    cache = cache or StabilizerCache(structure, trace.B)
    return _judge(trace, params, cache.get(e for b in params for e in b))


def _judge(trace, params, orbits):
    for k, cls in enumerate(orbits.classes):
        for i in range(len(trace.delta)):
            bits = trace.matrix[i, list(cls)]
            if bits.all() or not bits.any():
                continue
            j = int(np.flatnonzero(bits != bits[0])[0])
            image = cls[j]
            conflict = Conflict(orbits.carrier(k, trace.B[image]), cls[0], image, i)
            return DefinabilityVerdict(trace, params, False, conflict=conflict)
    return DefinabilityVerdict(trace, params, True, orbits=orbits.classes)


def def_tuples(structure, trace, d, jobs=None, tuple_cap=None, cache=None):
    """
    Every parameter tuple of length d from B over which a type is definable.

    Tuples are ordered and may repeat entries. With an empty B the only tuple is the empty one.

    Args:
        structure (FiniteStructure): The structure.
        trace (TypeTrace): The type.
        d (int): Tuple length.
        jobs (int): Worker threads for the stabilizer computations. Defaults to the configured value.
        tuple_cap (int): Maximum number of tuples examined. Defaults to the configured cap.
        cache (StabilizerCache): Stabilizer orbits to reuse.

    Returns:
        frozenset of tuple: The admissible tuples.

    """
    if d < 0:
        raise ValueError("The parameter count must be nonnegative")
    B = trace.B
    if not len(B):
        return frozenset([()])
    settings = get_settings()
    cap = tuple_cap if tuple_cap is not None else settings.tuple_cap
    if len(B) ** d > cap:
        raise ResourceLimitError("tuple_cap", cap, "%d^%d parameter tuples" % (len(B), d))
    cache = cache or StabilizerCache(structure, B)
    by_set = {}
    for t in itertools.product(B.entries, repeat=d):
        by_set.setdefault(frozenset(e for b in t for e in b), []).append(t)

    def decide(elements):
        return _judge(trace, (), cache.get(elements)).verdict

    workers = jobs if jobs is not None else settings.jobs
    keys = sorted(by_set, key=sorted)
    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(decide, keys))
    else:
        verdicts = [decide(k) for k in keys]
    admissible = frozenset(t for k, ok in zip(keys, verdicts) if ok for t in by_set[k])
    logger.debug("Def-set of %d tuples out of %d (%d stabilizers)", len(admissible), len(B) ** d, len(cache))
    return admissible


def def_sets(structure, traces, d, jobs=None, tuple_cap=None):
    """Def-sets of several types over a common parameter set, sharing stabilizer computations"""
    if not traces:
        return []
    cache = StabilizerCache(structure, traces[0].B)
    return [(t, def_tuples(structure, t, d, jobs=jobs, tuple_cap=tuple_cap, cache=cache)) for t in traces]


@dataclasses.dataclass(frozen=True, eq=False)
class SchemeBound:
    """Least maximum number of types sharing an admissible tuple, over every choice of one tuple per type"""
    d: int
    def_sets: Tuple
    lower_bound: object
    assignment: Optional[Tuple]
    distinct_sets: int

    @property
    def feasible(self):
        return self.lower_bound != math.inf

    def get_description(self):
        return {"d": self.d,
                "lower_bound": "inf" if not self.feasible else self.lower_bound,
                "distinct_parameter_sets": self.distinct_sets,
                "def_sets": [sorted([list(b) for b in t] for t in tuples) for _, tuples in self.def_sets],
                "assignment": None if self.assignment is None else [[list(b) for b in t] for t in self.assignment]}


def _assign(def_sets, load):
    """A choice of one admissible tuple per type with no tuple chosen more than load times, or None"""
    graph = nx.Graph()
    types = [("type", i) for i in range(len(def_sets))]
    graph.add_nodes_from(types)
    for i, tuples in enumerate(def_sets):
        for t in tuples:
            for k in range(load):
                graph.add_edge(("type", i), ("slot", t, k))
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=types)
    if any(node not in matching for node in types):
        return None
    return tuple(matching[("type", i)][1] for i in range(len(def_sets)))


def min_scheme_count(entries, d):
    """
    Lower bound on the number of defining schemes needed for a collection of types.

    Each scheme instantiated with one tuple defines at most one type, so n schemes require an assignment of types to
    admissible tuples using no tuple more than n times. The least such n is found by binary search with a bipartite
    matching from types to tuple slots.

    Args:
        entries (list of pairs): (TypeTrace, Def-set) pairs, Def-sets computed for the same d.
        d (int): The tuple length of the Def-sets.

    Returns:
        SchemeBound: The bound (math.inf when a Def-set is empty) and a witnessing assignment.

    """
    entries = tuple((t, frozenset(s)) for t, s in entries)
    sets = [s for _, s in entries]
    distinct = len({frozenset(e for b in t for e in b) for s in sets for t in s})
    if not entries:
        return SchemeBound(d, entries, 0, (), distinct)
    if any(not s for s in sets):
        return SchemeBound(d, entries, math.inf, None, distinct)
    ordered = [sorted(s) for s in sets]
    low, high = 1, len(entries)
    best = _assign(ordered, high)
    while low < high:
        middle = (low + high) // 2
        found = _assign(ordered, middle)
        if found is None:
            low = middle + 1
        else:
            high, best = middle, found
    return SchemeBound(d, entries, high, best, distinct)


@dataclasses.dataclass(frozen=True)
class BreadthReport:
    """Breadth of a family of sets, with a smaller equal intersection for every nonempty (d+1)-intersection"""
    family: Tuple[frozenset, ...]
    breadth: Optional[int]
    witnesses: Tuple = ()
    labels: Tuple = ()

    def replay(self):
        for big, small in self.witnesses:
            if len(small) > self.breadth or not set(small) <= set(big):
                return False
            if _intersection(self.family, big) != _intersection(self.family, small):
                return False
        return True

    def get_description(self):
        return {"breadth": self.breadth if self.breadth is not None else "undefined",
                "family": [sorted(s) for s in self.family], "labels": list(self.labels),
                "witnesses": [[list(big), list(small)] for big, small in self.witnesses]}


def _intersection(family, indices):
    result = None
    for i in indices:
        result = family[i] if result is None else result & family[i]
    return result


def _collapse(family, subset, d, target):
    # only d-subsets of the intersected sets count
    for small in itertools.combinations(subset, d):
        if _intersection(family, small) == target:
            return small
    return None


def breadth(family, labels=None, max_d=None):
    """
    Breadth of a family of sets: the least d such that every nonempty intersection of d+1 distinct members equals
    the intersection of some d of those members.

    Args:
        family (iterable of sets): The sets. Duplicates are removed, keeping the first occurrence.
        labels (list): Optional labels of the sets, such as their generating parameters.
        max_d (int): Largest d tried. Defaults to the configured cap.

    Returns:
        BreadthReport: The breadth (None when it exceeds max_d) and the witnesses.

    """
    family = [frozenset(s) for s in family]
    labels = list(labels) if labels is not None else list(range(len(family)))
    seen = {}
    for s, label in zip(family, labels):
        seen.setdefault(s, label)
    members = tuple(seen)
    kept_labels = tuple(seen[s] for s in members)
    if not members:
        return BreadthReport(members, 0, (), kept_labels)
    cap = max_d if max_d is not None else get_settings().breadth_max_d
    for d in range(1, cap + 1):
        if len(members) <= d:
            return BreadthReport(members, d, (), kept_labels)
        witnesses = []
        for subset in itertools.combinations(range(len(members)), d + 1):
            target = _intersection(members, subset)
            if not target:
                continue
            witness = _collapse(members, subset, d, target)
            if witness is None:
                break
            witnesses.append((subset, witness))
        else:
            logger.debug("Family of %d sets has breadth %d", len(members), d)
            return BreadthReport(members, d, tuple(witnesses), kept_labels)
    return BreadthReport(members, None, (), kept_labels)


def sample_collapse(family, d, size, rng, samples=100):
    """Check on random size-subsets that every nonempty intersection equals that of some d of the same members"""
    family = list(dict.fromkeys(frozenset(s) for s in family))
    if len(family) < size:
        return True
    for _ in range(samples):
        subset = tuple(sorted(int(i) for i in rng.choice(len(family), size=size, replace=False)))
        target = _intersection(family, subset)
        if target and _collapse(family, subset, d, target) is None:
            return False
    return True


@dataclasses.dataclass(frozen=True, eq=False)
class BreadthDefinition:
    """Defining formulas of a type, built from the positive parameters whose satisfier sets intersect minimally"""
    trace: object
    params: Tuple
    formulas: Tuple
    verdicts: Tuple
    agrees: bool

    def get_description(self, labels=None, order="<"):
        return {"params": [list(b) for b in self.params],
                "formulas": [format_formula(f, labels=labels, order=order) for f in self.formulas],
                "verdicts": [list(v) for v in self.verdicts], "agrees": self.agrees}


def _instance(delta, i, x_term, b):
    mapping = {delta.x[0]: x_term}
    mapping.update({v: Const(e) for v, e in zip(delta.y, b)})
    return substitute(delta[i], mapping)


def breadth_define(structure, delta, B, trace, d):
    """
    Define a type by containment of one intersection of satisfier sets.

    Among the positively classified pairs (formula, parameter) at most d are chosen whose satisfier sets have the
    same intersection as all of them. A pair is then positive exactly when that intersection is contained in its
    satisfier set.

    Args:
        structure (FiniteStructure): The structure.
        delta (FormulaSet): The formulas, with a single object variable.
        B (ParamSet): The parameters.
        trace (TypeTrace): A realized type over B.
        d (int): Breadth bound of the family of satisfier sets.

    Returns:
        BreadthDefinition: The formulas, one per member of Δ, with their replay against the type.

    """
    evaluator = Evaluator(structure)
    n = structure.universe_size
    x = delta.x[0]
    sets = {}
    for i in range(len(delta)):
        for j, b in enumerate(B):
            sets[(i, j)] = frozenset(a for a in range(n) if evaluator.evaluate(delta[i], delta.environment((a,), b)))
    positive = sorted(trace.positive)
    if not positive:
        y0 = Var(delta.y[0])
        formulas = tuple(Not(Equals(y0, y0)) for _ in delta)
        chosen = []
    else:
        target = frozenset.intersection(*(sets[pair] for pair in positive))
        chosen = list(positive)
        for pair in positive:
            rest = [q for q in chosen if q != pair]
            if rest and frozenset.intersection(*(sets[q] for q in rest)) == target:
                chosen = rest
        chosen = _shrink(chosen, positive, sets, d)
        avoid = set(delta.x) | set(delta.y)
        for f in delta:
            avoid |= variables(f)
        w = fresh_variable("w", avoid)
        premise = conjoin([_instance(delta, i, Var(w), B[j]) for i, j in chosen])
        formulas = tuple(Forall(w, Implies(premise, substitute(f, {x: Var(w)}))) for f in delta)
    params = tuple(dict.fromkeys(B[j] for _, j in chosen))
    verdicts = tuple(tuple(evaluator.evaluate(f, dict(zip(delta.y, b))) for b in B) for f in formulas)
    agrees = all(verdicts[i][j] == trace.holds(i, j) for i in range(len(delta)) for j in range(len(B)))
    if not agrees:
        logger.error("Breadth definition disagrees with the type; the breadth bound %d does not hold", d)
    return BreadthDefinition(trace, params, formulas, verdicts, agrees and len(params) <= d)


def _shrink(chosen, positive, sets, d):
    """Replace d+1 chosen pairs by d positive pairs of the same intersection until at most d remain"""
    chosen = list(chosen)
    while len(chosen) > d:
        head = chosen[:d + 1]
        target = frozenset.intersection(*(sets[q] for q in head))
        for subset in itertools.combinations(positive, d):
            if frozenset.intersection(*(sets[q] for q in subset)) == target:
                chosen = list(dict.fromkeys(list(subset) + chosen[d + 1:]))
                break
        else:
            logger.error("No %d positive pairs have the intersection of %s", d, head)
            return chosen
    return chosen


def _order_features(structure, trace, params, depth, order):
    """Candidate formulas in y with constants among params, each with its truth vector on B"""
    less = structure.relation(order).matrix
    n = structure.universe_size
    y_name = trace.delta.y[0]
    y = Var(y_name)
    z_name = fresh_variable("z", {y_name})
    z = Var(z_name)
    points = np.array([b[0] for b in trace.B], dtype=np.intp)
    constants = sorted({e for b in params for e in b})
    features = []
    for t in constants:
        features.append((Atom(order, (y, Const(t))), less[points, t]))
        features.append((Atom(order, (Const(t), y)), less[t, points]))
        features.append((Equals(y, Const(t)), points == t))
    if depth >= 2:
        restrictions = [(None, np.ones(n, dtype=bool))]
        for t in constants:
            restrictions += [(Atom(order, (z, Const(t))), less[:, t]), (Atom(order, (Const(t), z)), less[t, :]),
                             (Not(Atom(order, (z, Const(t)))), ~less[:, t]),
                             (Not(Atom(order, (Const(t), z))), ~less[t, :])]
        for literal, mask in restrictions:
            below = (less & mask[:, None]).sum(axis=0)[points]
            above = (less & mask[None, :]).sum(axis=1)[points]
            for body, counts in ((Atom(order, (z, y)), below), (Atom(order, (y, z)), above)):
                full = body if literal is None else conjoin([body, literal])
                for k in range(1, int(counts.max(initial=0)) + 1):
                    features.append((Exists(z_name, full, k), counts >= k))
    unique = {}
    for formula, values in features:
        unique.setdefault(values.tobytes(), (formula, values))
    return list(unique.values())


def bounded_formula_search(structure, trace, params, depth, order="<"):
    """
    Search a small grammar for formulas defining a type with constants among some parameters.

    Depth 1 allows boolean combinations of comparisons of y with the constants; depth 2 adds counting atoms
    ``exists[>=k] z. (z < y & literal)`` with literals on the constants. Not finding a formula proves nothing.

    Args:
        structure (FiniteStructure): The structure.
        trace (TypeTrace): The type, over single-element parameters.
        params (sequence of tuple): Entries of trace.B usable as constants.
        depth (int): Grammar budget, at least 1.
        order (str): Name of the order relation.

    Returns:
        list of Formula: One formula per member of Δ, verified on B, or None.

    """
    if depth < 1:
        raise ValueError("The depth budget must be at least 1")
    if len(trace.delta.y) != 1:
        raise ValueError("The formula search needs a single parameter variable")
    y = Var(trace.delta.y[0])
    features = _order_features(structure, trace, params, depth, order)
    signature = np.array([values for _, values in features], dtype=bool).T.reshape(len(trace.B), len(features))
    groups = {}
    for j in range(len(trace.B)):
        groups.setdefault(signature[j].tobytes(), []).append(j)
    evaluator = Evaluator(structure)
    found = []
    for i in range(len(trace.delta)):
        target = trace.matrix[i]
        positive, negative = [], []
        for members in groups.values():
            bits = {bool(target[j]) for j in members}
            if len(bits) > 1:
                return None
            (positive if bits.pop() else negative).append(members[0])
        if not positive:
            formula = Not(Equals(y, y))
        elif not negative:
            formula = Equals(y, y)
        else:
            clauses = []
            for p in positive:
                literals = []
                for q in negative:
                    k = int(np.flatnonzero(signature[p] != signature[q])[0])
                    feature = features[k][0]
                    literals.append(feature if signature[p, k] else Not(feature))
                clauses.append(conjoin(list(dict.fromkeys(literals))))
            formula = disjoin(list(dict.fromkeys(clauses)))
        for j, b in enumerate(trace.B):
            if evaluator.evaluate(formula, {y.name: b[0]}) != bool(target[j]):
                logger.error("Formula found for a type fails its replay at parameter %s", b)
                return None
        found.append(formula)
    return found
