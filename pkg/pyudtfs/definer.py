"""
Module constructing defining formulas for types in finite posets

The construction recursively narrows a formula ψ(x) with few satisfiers. While some parameter splits the
satisfiers of ψ into a small side containing c, ψ is conjoined with that split and the bound on its satisfiers
halves; otherwise membership of every parameter is decided by counting satisfiers, at least 2^d of them. In a finite
poset of width w every ∅-type class is an antichain, so it has at most w elements and at most ⌊log2 w⌋ parameters
are needed per type.
"""
import dataclasses
import logging
from typing import Optional, Tuple

import numpy as np

from .config import get_settings
from .definability import StabilizerCache, def_tuples
from .logic import (Atom, And, Const, Equals, Evaluator, Exists, FormulaSet, Not, Var, conjoin, expand_counting,
                    format_formula, free_variables, param_count, substitute)
from .model import PosetView, is_antichain, validate_poset, width
from .symmetry import orbits, refine_colors
from .typespace import enumerate_types, realize_type

logger = logging.getLogger(__name__)


class DefinerError(ValueError):
    """The recursive definer was called outside its preconditions, or its output failed verification"""

    def __init__(self, message, cardinality=None, bound=None):
        self.cardinality = cardinality
        self.bound = bound
        super().__init__(message)


def _poset(p, order="<"):
    return p if isinstance(p, PosetView) else validate_poset(p, order)


@dataclasses.dataclass(frozen=True)
class ZeroTypePartition:
    """Automorphism orbits of a poset with invariants (down-set size, up-set size, refined color) per class"""
    classes: Tuple[Tuple[int, ...], ...]
    invariants: Tuple[Tuple[int, int, int], ...]

    def class_of(self, a):
        for cls in self.classes:
            if a in cls:
                return cls
        raise ValueError("Element %s is not in the universe" % a)

    def get_description(self):
        return [{"class": list(c), "down": v[0], "up": v[1], "color": v[2]}
                for c, v in zip(self.classes, self.invariants)]


def zero_type_partition(p, order="<"):
    """
    Partition the universe into ∅-type classes.

    Args:
        p (PosetView or FiniteStructure): The poset.
        order (str): The order relation, when p is a structure.

    Returns:
        ZeroTypePartition: Classes ordered by their least element.

    """
    p = _poset(p, order)
    partition = orbits(p.structure)
    down, up = p.down_set_sizes(), p.up_set_sizes()
    colors = refine_colors(p.structure)
    invariants = []
    for cls in partition.orbits:
        vectors = {(int(down[a]), int(up[a]), int(colors[a])) for a in cls}
        if len(vectors) != 1:
            raise AssertionError("Invariants are not constant on the orbit %s" % (cls,))
        invariants.append(vectors.pop())
    return ZeroTypePartition(partition.orbits, tuple(invariants))


@dataclasses.dataclass(frozen=True)
class AntichainCheck:
    """Whether every ∅-type class is an antichain, with a comparable pair inside a class when not"""
    holds: bool
    witness: Optional[Tuple[int, int]]
    monotonicity_violations: Tuple[Tuple[int, int], ...]

    def __bool__(self):
        return self.holds and not self.monotonicity_violations

    def get_description(self):
        return {"holds": self.holds, "witness": self.witness,
                "monotonicity_violations": [list(v) for v in self.monotonicity_violations]}


def check_lemma33(p, partition=None):
    """
    Check that every ∅-type class of a finite poset is an antichain.

    Along the way, every pair a < b is checked to have strictly fewer elements below a than below b, the counting
    invariant that separates comparable elements.

    Args:
        p (PosetView): The poset.
        partition (ZeroTypePartition): The classes, if already computed.

    Returns:
        AntichainCheck: The result, truthy when everything holds.

    """
    partition = partition or zero_type_partition(p)
    witness = None
    for cls in partition.classes:
        if not is_antichain(p, cls):
            members = list(cls)
            block = p.less[np.ix_(members, members)]
            i, j = np.argwhere(block)[0]
            witness = (members[int(i)], members[int(j)])
            break
    down = p.down_set_sizes()
    violations = tuple((int(a), int(b)) for a, b in np.argwhere(p.less) if down[a] >= down[b])
    return AntichainCheck(witness is None, witness, violations)


@dataclasses.dataclass(frozen=True, eq=False)
class IsolatingFormula:
    formula: object
    exact: bool
    satisfiers: frozenset
    method: str

    def get_description(self, labels=None, order="<"):
        return {"formula": format_formula(self.formula, labels=labels, order=order),
                "exact": self.exact, "method": self.method}


def _exactly(count, z, body):
    if count == 0:
        return Not(Exists(z, body))
    return conjoin([Exists(z, body, count), Not(Exists(z, body, count + 1))])


def isolating_formula(p, cls, x="x", depth_cap=None, rounds=None):
    """
    A parameter-free formula whose satisfiers contain an ∅-type class.

    Counting invariants are tried in turn: the number of elements below, the number above, and then the colors of
    iterated refinement by those counts. Each round nests the descriptions of the previous colors, so the number of
    rounds is capped. The first candidate whose satisfier set equals the class is returned and
    marked exact; otherwise the last candidate is returned, marked over-approximate.

    Args:
        p (PosetView): The poset.
        cls (iterable of int): The class.
        x (str): The free variable of the formula.
        depth_cap (int): Maximum quantifier depth. Defaults to the configured cap less one, leaving room for the
                         quantifier the definer adds.
        rounds (int): Maximum number of refinement rounds. Defaults to the configured value.

    Returns:
        IsolatingFormula: The formula and its marking.

    """
    cls = frozenset(int(a) for a in cls)
    if not cls:
        raise ValueError("Cannot isolate an empty class")
    order = p.order_relation
    evaluator = Evaluator(p.structure)
    settings = get_settings()
    cap = depth_cap if depth_cap is not None else settings.quantifier_depth_cap - 1
    cap = min(cap, rounds if rounds is not None else settings.refinement_rounds)
    a = min(cls)
    z = Var("z1")
    xv = Var(x)
    down = _exactly(int(p.down_set_sizes()[a]), z.name, Atom(order, (z, xv)))
    up = _exactly(int(p.up_set_sizes()[a]), z.name, Atom(order, (xv, z)))
    last = None
    for method, formula in (("down", down), ("up", up)):
        last = IsolatingFormula(formula, False, evaluator.satisfier_set(formula, x), method)
        if last.satisfiers == cls:
            return dataclasses.replace(last, exact=True)

    n = p.universe_size
    colors = np.zeros(n, dtype=np.int64)
    described = {0: None}
    less = p.less.astype(np.int64)
    for r in range(1, cap + 1):
        zr = Var("z%d" % r)
        k = int(colors.max()) + 1
        onehot = np.zeros((n, k), dtype=np.int64)
        onehot[np.arange(n), colors] = 1
        keys = np.hstack([colors[:, None], less.T @ onehot, less @ onehot])
        rows, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        on_z = {c: (None if f is None else substitute(f, {x: zr})) for c, f in described.items()}
        refined = {}
        for color, row in enumerate(rows):
            old = int(row[0])
            parts = [] if described[old] is None else [described[old]]
            for c in range(k):
                below = Atom(order, (zr, xv)) if on_z[c] is None else conjoin([Atom(order, (zr, xv)), on_z[c]])
                above = Atom(order, (xv, zr)) if on_z[c] is None else conjoin([Atom(order, (xv, zr)), on_z[c]])
                parts.append(_exactly(int(row[1 + c]), zr.name, below))
                parts.append(_exactly(int(row[1 + k + c]), zr.name, above))
            refined[color] = conjoin(parts)
        stable = len(rows) == k
        colors, described = inverse.astype(np.int64), refined
        formula = described[int(colors[a])]
        satisfiers = frozenset(int(e) for e in np.flatnonzero(colors == colors[a]))
        last = IsolatingFormula(formula, satisfiers == cls, satisfiers, "refinement-%d" % r)
        if last.exact or stable:
            break
    satisfiers = evaluator.satisfier_set(last.formula, x)
    last = dataclasses.replace(last, exact=satisfiers == cls, satisfiers=satisfiers)
    if not last.exact:
        logger.debug("Class %s only over-approximated by %s", sorted(cls), last.method)
    return last


@dataclasses.dataclass(frozen=True)
class ParamUse:
    """A parameter introduced by the definer: its B entry, the formula and recursion step it came from, its case"""
    entry: Tuple[int, ...]
    index: int
    formula: int
    depth: int
    case: int

    def get_description(self):
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True, eq=False)
class DefinerResult:
    """Defining formulas of tp_Δ(c/B), one per member of Δ, sharing their parameters"""
    formulas: Tuple
    params_used: Tuple[ParamUse, ...]
    depth: int
    terminal: str
    delta: object
    B: object
    transcript: Tuple

    @property
    def formula(self):
        return self.formulas[0]

    @property
    def parameter_count(self):
        return len(self.params_used)

    def expanded(self):
        """The formulas with every counting quantifier written out with distinct witnesses"""
        return tuple(expand_counting(f) for f in self.formulas)

    def get_description(self, labels=None, order="<"):
        return {"formulas": [format_formula(f, labels=labels, order=order) for f in self.formulas],
                "params_used": [u.get_description() for u in self.params_used],
                "depth": self.depth, "terminal": self.terminal,
                "transcript": [{"b": list(b), "verdicts": list(v)} for b, v in zip(self.B, self.transcript)]}


def _instance(delta, i, b):
    return substitute(delta[i], {v: Const(e) for v, e in zip(delta.y, b)})


def _narrow(psi, extra):
    parts = psi.parts if isinstance(psi, And) else (psi,)
    return And(tuple(parts) + (extra,))


class _Definer:
    def __init__(self, evaluator, delta, c, B, trace):
        self.evaluator = evaluator
        self.delta = delta
        self.x = delta.x[0]
        self.c = c
        self.B = B
        self.trace = trace
        self.uses = []

    def define(self, psi, d, depth):
        satisfiers = self.evaluator.satisfier_set(psi, self.x)
        bound = 2 ** (d + 1) - 1
        if self.c not in satisfiers:
            raise DefinerError("element %d does not satisfy psi" % self.c)
        if len(satisfiers) > bound:
            raise DefinerError("|psi(M)| = %d exceeds the bound 2^(d+1)-1 = %d for d=%d" % (len(satisfiers), bound, d),
                               cardinality=len(satisfiers), bound=bound)
        if d == 0:
            return tuple(Exists(self.x, conjoin([psi, f])) for f in self.delta), "base", depth
        small = 2 ** d - 1
        counts = np.zeros((len(self.delta), len(self.B)), dtype=np.int64)
        for i, f in enumerate(self.delta):
            for j, b in enumerate(self.B):
                counts[i, j] = sum(self.evaluator.evaluate(f, self.delta.environment((a,), b)) for a in satisfiers)
        for case in (1, 2):
            for j, b in enumerate(self.B):
                for i in range(len(self.delta)):
                    positive = self.trace.holds(i, j)
                    if case == 1 and positive and counts[i, j] <= small:
                        narrowed = _narrow(psi, _instance(self.delta, i, b))
                    elif case == 2 and not positive and len(satisfiers) - counts[i, j] <= small:
                        narrowed = _narrow(psi, Not(_instance(self.delta, i, b)))
                    else:
                        continue
                    logger.debug("Case %d at depth %d with parameter %s of formula %d", case, depth, b, i)
                    self.uses.append(ParamUse(tuple(b), j, i, depth, case))
                    return self.define(narrowed, d - 1, depth + 1)
        threshold = 2 ** d
        if not np.array_equal(counts >= threshold, self.trace.matrix):
            raise DefinerError("counting dichotomy fails at depth %d" % depth)
        logger.debug("Counting case at depth %d with threshold %d", depth, threshold)
        return tuple(Exists(self.x, conjoin([psi, f]), threshold) for f in self.delta), "counting", depth


def define_type(structure, psi, delta, c, B, d, evaluator=None):
    """
    Define tp_Δ(c/B) with at most d parameters from B beyond those of ψ.

    Args:
        structure (FiniteStructure): The structure.
        psi (Formula): A formula in the object variable of Δ with at most 2^(d+1)-1 satisfiers, c among them.
        delta (FormulaSet): The formulas, with a single object variable.
        c (int): The element whose type is defined.
        B (ParamSet): The parameters.
        d (int): The parameter budget.
        evaluator (Evaluator): An evaluator of the structure to reuse.

    Returns:
        DefinerResult: The verified formulas with parameter provenance and replay transcript.

    Raises:
        DefinerError: On a precondition failure, naming the offending cardinality and bound.

    """
    if d < 0:
        raise DefinerError("The parameter budget must be nonnegative")
    if len(delta.x) != 1:
        raise DefinerError("The definer needs a single object variable")
    x = delta.x[0]
    extra = free_variables(psi) - {x}
    if extra:
        raise DefinerError("psi has free variables besides %s: %s" % (x, ", ".join(sorted(extra))))
    evaluator = evaluator or Evaluator(structure)
    trace = realize_type(structure, delta, c, B, evaluator=evaluator)
    definer = _Definer(evaluator, delta, int(c), B, trace)
    formulas, terminal, depth = definer.define(psi, d, 0)
    if depth > d:
        raise AssertionError("recursion depth %d exceeds d=%d" % (depth, d))
    transcript = tuple(tuple(evaluator.evaluate(f, dict(zip(delta.y, b))) for f in formulas) for b in B)
    expected = tuple(tuple(trace.holds(i, j) for i in range(len(delta))) for j in range(len(B)))
    if transcript != expected:
        raise DefinerError("the constructed definition fails its replay")
    allowed = param_count(psi) + d * len(delta.y)
    for f in formulas:
        if param_count(f) > allowed:
            raise DefinerError("definition uses %d parameters, more than %d" % (param_count(f), allowed))
    logger.debug("Type of %d defined with %d parameters (%s)", c, len(definer.uses), terminal)
    return DefinerResult(formulas, tuple(definer.uses), depth, terminal, delta, B, transcript)


def lemma31_define(structure, psi, phi, c, B, d, x="x", y=("y",), evaluator=None):
    """Define tp_φ(c/B) for a single formula φ(x;y). See define_type."""
    return define_type(structure, psi, FormulaSet([phi], x=(x,), y=y), c, B, d, evaluator=evaluator)


@dataclasses.dataclass(frozen=True, eq=False)
class TypeCertificate:
    """How one type over B was shown definable: "syntactic", "semantic" or "uncertified" """
    trace: object
    kind: str
    class_size: int
    result: Optional[DefinerResult] = None
    witness: Optional[Tuple] = None

    def get_description(self, labels=None, order="<"):
        description = {"realizers": list(self.trace.realizers), "positive": sorted(self.trace.positive_parameters()),
                       "kind": self.kind, "class_size": self.class_size}
        if self.result is not None:
            description["definition"] = self.result.get_description(labels=labels, order=order)
        if self.witness is not None:
            description["witness"] = [list(b) for b in self.witness]
        return description


@dataclasses.dataclass(frozen=True, eq=False)
class VcdCertificate:
    width: int
    d: int
    delta: object
    B: object
    entries: Tuple[TypeCertificate, ...]

    @property
    def certified(self):
        return all(e.kind != "uncertified" for e in self.entries)

    @property
    def fallback_rate(self):
        if not self.entries:
            return 0.0
        return sum(e.kind == "semantic" for e in self.entries) / len(self.entries)

    def uncertified(self):
        return [e for e in self.entries if e.kind == "uncertified"]

    def get_description(self, labels=None, order="<"):
        return {"width": self.width, "d": self.d, "B": self.B.get_description(),
                "delta": self.delta.get_description(labels=labels, order=order),
                "certified": self.certified, "fallback_rate": self.fallback_rate,
                "types": [e.get_description(labels=labels, order=order) for e in self.entries]}


def vcd_certificate(p, B, include_eq=False, d=None, jobs=None, partition=None):
    """
    Certify that every realized {x<y}-type over B of a finite poset is definable with d = ⌊log2 width⌋ parameters.

    Each type gets a syntactic certificate (an isolating formula for its ∅-class fed to define_type) or, when no
    exact isolating formula is available, a semantic one (a nonempty Def-set at length d).

    Args:
        p (PosetView): The poset.
        B (ParamSet): Parameters, single elements.
        include_eq (bool): Add x = y to Δ.
        d (int): Force the parameter count instead of deriving it from the width.
        jobs (int): Worker threads for Def-set computations.
        partition (ZeroTypePartition): The ∅-type classes, if already computed.

    Returns:
        VcdCertificate: One certificate per realized type.

    """
    structure = p.structure
    w = width(p)
    if d is None:
        d = max(w.bit_length() - 1, 0)
    order = p.order_relation
    x, y = Var("x"), Var("y")
    formulas = [Atom(order, (x, y))] + ([Equals(x, y)] if include_eq else [])
    delta = FormulaSet(formulas)
    evaluator = Evaluator(structure)
    partition = partition or zero_type_partition(p)
    cache = StabilizerCache(structure, B)
    isolators = {}
    bound = 2 ** (d + 1) - 1
    entries = []
    for trace in enumerate_types(structure, delta, B, evaluator=evaluator):
        c = trace.realizers[0]
        cls = partition.class_of(c)
        certificate = None
        if len(cls) <= bound:
            if cls not in isolators:
                isolators[cls] = isolating_formula(p, cls)
            isolator = isolators[cls]
            if isolator.exact:
                try:
                    result = define_type(structure, isolator.formula, delta, c, B, d, evaluator=evaluator)
                    certificate = TypeCertificate(trace, "syntactic", len(cls), result=result)
                except DefinerError as e:
                    logger.warning("Syntactic certificate failed for type of %d: %s", c, e)
        if certificate is None:
            admissible = def_tuples(structure, trace, d, jobs=jobs, cache=cache)
            if admissible:
                certificate = TypeCertificate(trace, "semantic", len(cls), witness=min(admissible))
            else:
                certificate = TypeCertificate(trace, "uncertified", len(cls))
        entries.append(certificate)
    report = VcdCertificate(w, d, delta, B, tuple(entries))
    logger.info("Width %d, d=%d: %d types, fallback rate %.2f, %d uncertified", w, d, len(entries),
                report.fallback_rate, len(report.uncertified()))
    return report
