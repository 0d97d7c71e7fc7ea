"""
Module with parameter sets and Δ-types over them
"""
import logging

import numpy as np

from .logic import Evaluator, format_formula

logger = logging.getLogger(__name__)


class ParamSet:
    """An ordered list of distinct parameter tuples, all of the same length"""

    def __init__(self, entries, arity=None):
        """

        Args:
            entries (iterable): Parameter tuples. Bare integers are read as tuples of length 1.
            arity (int): Length of the tuples. Only needed for an empty set of a length other than 1.
        """
        self.entries = tuple(tuple(int(e) for e in b) if isinstance(b, (tuple, list)) else (int(b),)
                             for b in entries)
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("Parameter tuples must be distinct")
        lengths = {len(b) for b in self.entries}
        if len(lengths) > 1:
            raise ValueError("Parameter tuples of different lengths: %s" % sorted(lengths))
        if lengths:
            found = lengths.pop()
            if arity is not None and arity != found:
                raise ValueError("Parameter tuples of length %d, expected %d" % (found, arity))
            arity = found
        self.arity = arity if arity is not None else 1
        self._index = {b: j for j, b in enumerate(self.entries)}

    @classmethod
    def of_elements(cls, elements):
        """Parameter set of single elements, in the given order"""
        return cls([(int(e),) for e in elements])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, item):
        return self.entries[item]

    def __contains__(self, entry):
        return entry in self._index

    def index(self, entry):
        return self._index[entry]

    @property
    def elements(self):
        """Sorted list of the elements occurring in some entry"""
        return sorted({e for b in self.entries for e in b})

    def validate(self, structure):
        for b in self.entries:
            if any(not 0 <= e < structure.universe_size for e in b):
                raise ValueError("Parameter %s is out of the universe" % (b,))

    def get_description(self):
        return [list(b) for b in self.entries]


class TypeTrace:
    """The Δ-type of some element over a parameter set, as a bit matrix indexed by (formula, parameter)"""

    def __init__(self, delta, B, matrix, realizers=()):
        self.delta = delta
        self.B = B
        self.matrix = np.array(matrix, dtype=bool).reshape(len(delta), len(B))
        self.matrix.setflags(write=False)
        self.realizers = tuple(sorted(realizers))

    @property
    def positive(self):
        """Set of (formula index, parameter index) pairs classified positively"""
        return frozenset((int(i), int(j)) for i, j in np.argwhere(self.matrix))

    @property
    def key(self):
        return self.matrix.tobytes()

    def holds(self, i, j):
        return bool(self.matrix[i, j])

    def positive_parameters(self, i=0):
        """The parameter indices j with (i, j) positive"""
        return [int(j) for j in np.flatnonzero(self.matrix[i])]

    def __eq__(self, other):
        return isinstance(other, TypeTrace) and self.matrix.shape == other.matrix.shape and self.key == other.key

    def __hash__(self):
        return hash((self.matrix.shape, self.key))

    def __repr__(self):
        return "TypeTrace(positive=%s, realizers=%s)" % (sorted(self.positive), list(self.realizers))

    def get_description(self, labels=None, order="<"):
        return {"delta": [format_formula(f, labels=labels, order=order) for f in self.delta],
                "B": self.B.get_description(),
                "positive": [list(pair) for pair in sorted(self.positive)],
                "realizers": list(self.realizers)}


def _as_tuple(a):
    return tuple(int(e) for e in a) if isinstance(a, (tuple, list)) else (int(a),)


def _check_arity(delta, B):
    if len(B) and B.arity != len(delta.y):
        raise ValueError("Parameters of length %d for %d parameter variables" % (B.arity, len(delta.y)))


def _trace_row(evaluator, delta, a, B):
    return [[evaluator.evaluate(f, delta.environment(a, b)) for b in B] for f in delta]


def realize_type(structure, delta, a, B, evaluator=None):
    """
    The Δ-type of a tuple over a parameter set.

    Args:
        structure (FiniteStructure): The structure.
        delta (FormulaSet): The formulas.
        a (int or tuple of int): The realizing element (or tuple, one per object variable).
        B (ParamSet): The parameters.
        evaluator (Evaluator): An evaluator of the structure to reuse.

    Returns:
        TypeTrace: The trace, with a as its only realizer.

    """
    a = _as_tuple(a)
    if len(a) != len(delta.x):
        raise ValueError("Tuple of length %d for %d object variables" % (len(a), len(delta.x)))
    _check_arity(delta, B)
    evaluator = evaluator or Evaluator(structure)
    realizer = a[0] if len(a) == 1 else a
    return TypeTrace(delta, B, _trace_row(evaluator, delta, a, B), realizers=[realizer])


def enumerate_types(structure, delta, B, over=None, evaluator=None):
    """
    The distinct realized Δ-types over a parameter set, with their realizers.

    Args:
        structure (FiniteStructure): The structure.
        delta (FormulaSet): The formulas, with a single object variable.
        B (ParamSet): The parameters.
        over (iterable of int): Elements whose types are collected. Defaults to the whole universe.
        evaluator (Evaluator): An evaluator of the structure to reuse.

    Returns:
        list of TypeTrace: Traces ordered lexicographically on their bits.

    """
    if len(delta.x) != 1:
        raise ValueError("Types are enumerated for a single object variable")
    _check_arity(delta, B)
    evaluator = evaluator or Evaluator(structure)
    over = range(structure.universe_size) if over is None else sorted(set(over))
    groups = {}
    for a in over:
        matrix = np.array(_trace_row(evaluator, delta, (a,), B), dtype=bool).reshape(len(delta), len(B))
        groups.setdefault(matrix.tobytes(), (matrix, []))[1].append(a)
    traces = [TypeTrace(delta, B, matrix, realizers) for matrix, realizers in groups.values()]
    traces.sort(key=lambda t: tuple(t.matrix.ravel().tolist()))
    logger.debug("%d distinct types over %d parameters", len(traces), len(B))
    return traces
