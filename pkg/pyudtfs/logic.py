"""
Module with first-order formulas over finite structures: AST, a parser and printer for a small DSL, and an evaluator

The DSL grammar is::

    formula := iff
    iff     := imp ("<->" imp)*
    imp     := or ("->" or)*                      (right-associative)
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "!" unary | quant | atom | "(" formula ")"
    quant   := ("exists" | "forall") ["[>=" INT "]"] VAR "." unary
    atom    := REL "(" term {"," term} ")" | term ("<" | "=") term
    term    := VAR | "@" (INT | LABEL)

``<`` is sugar for the order relation of the structure and ``@`` introduces an element constant (a parameter).
"""
import dataclasses
import itertools
import logging
import re
from typing import Tuple

from .config import get_settings, ResourceLimitError

logger = logging.getLogger(__name__)


class FormulaSyntaxError(ValueError):
    """The source text does not follow the DSL grammar, or refers to an unknown relation"""

    def __init__(self, message, position):
        self.position = position
        super().__init__("parse error at offset %d: %s" % (position, message))


class EvaluationError(ValueError):
    """A formula cannot be evaluated in the given structure and environment"""


# Terms

@dataclasses.dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("Variable names must be nonempty")


@dataclasses.dataclass(frozen=True)
class Const:
    element: int


# Formulas

class Formula:
    """Base class of formula nodes"""
    precedence = 5


@dataclasses.dataclass(frozen=True)
class Atom(Formula):
    relation: str
    terms: Tuple


@dataclasses.dataclass(frozen=True)
class Equals(Formula):
    left: object
    right: object


@dataclasses.dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclasses.dataclass(frozen=True)
class And(Formula):
    parts: Tuple
    precedence = 4


@dataclasses.dataclass(frozen=True)
class Or(Formula):
    parts: Tuple
    precedence = 3


@dataclasses.dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula
    precedence = 2


@dataclasses.dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula
    precedence = 1


@dataclasses.dataclass(frozen=True)
class Exists(Formula):
    """Existential quantifier; with at_least=k it is the counting quantifier "at least k witnesses" """
    var: str
    body: Formula
    at_least: int = 1

    def __post_init__(self):
        if self.at_least < 0:
            raise ValueError("Counting bounds must be nonnegative")


@dataclasses.dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


def conjoin(parts):
    """Conjunction of a nonempty list of formulas (the formula itself if there is only one)"""
    parts = tuple(parts)
    if not parts:
        raise ValueError("Empty conjunction")
    return parts[0] if len(parts) == 1 else And(parts)


def disjoin(parts):
    """Disjunction of a nonempty list of formulas (the formula itself if there is only one)"""
    parts = tuple(parts)
    if not parts:
        raise ValueError("Empty disjunction")
    return parts[0] if len(parts) == 1 else Or(parts)


def different(a, b):
    return Not(Equals(a, b))


def _children(f):
    if isinstance(f, (Not, Exists, Forall)):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Implies, Iff)):
        return f.left, f.right
    return ()


def _terms(f):
    if isinstance(f, Atom):
        return f.terms
    if isinstance(f, Equals):
        return f.left, f.right
    return ()


def free_variables(f):
    """Set of the names of the free variables of a formula"""
    if isinstance(f, (Exists, Forall)):
        return free_variables(f.body) - {f.var}
    names = {t.name for t in _terms(f) if isinstance(t, Var)}
    for child in _children(f):
        names |= free_variables(child)
    return frozenset(names)


def variables(f):
    """Set of the names of every variable, free or bound, in a formula"""
    names = {t.name for t in _terms(f) if isinstance(t, Var)}
    if isinstance(f, (Exists, Forall)):
        names.add(f.var)
    for child in _children(f):
        names |= variables(child)
    return frozenset(names)


def constants(f):
    """Set of the element constants (parameters) of a formula"""
    found = {t.element for t in _terms(f) if isinstance(t, Const)}
    for child in _children(f):
        found |= constants(child)
    return frozenset(found)


def param_count(f):
    """Number of distinct parameters of a formula"""
    return len(constants(f))


def quantifier_depth(f):
    own = 1 if isinstance(f, (Exists, Forall)) else 0
    return own + max((quantifier_depth(c) for c in _children(f)), default=0)


def counting_depth(f):
    """Nesting depth of counting quantifiers with a bound above 1"""
    own = 1 if isinstance(f, Exists) and f.at_least > 1 else 0
    return own + max((counting_depth(c) for c in _children(f)), default=0)


def fresh_variable(base, avoid):
    """A variable name starting with base and not in avoid"""
    if base not in avoid:
        return base
    for i in itertools.count(1):
        candidate = "%s%d" % (base, i)
        if candidate not in avoid:
            return candidate


def substitute(f, mapping):
    """
    Replace free variables by terms, renaming bound variables to avoid capture.

    Args:
        f (Formula): The formula.
        mapping (dict): Mapping from variable name to term (Var or Const).

    Returns:
        Formula: The substituted formula.

    """
    mapping = {k: v for k, v in mapping.items() if k in free_variables(f)}
    if not mapping:
        return f
    if isinstance(f, Atom):
        return Atom(f.relation, tuple(_substitute_term(t, mapping) for t in f.terms))
    if isinstance(f, Equals):
        return Equals(_substitute_term(f.left, mapping), _substitute_term(f.right, mapping))
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, Iff):
        return Iff(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, (Exists, Forall)):
        incoming = {t.name for t in mapping.values() if isinstance(t, Var)}
        var, body = f.var, f.body
        if var in incoming:
            renamed = fresh_variable(var, variables(body) | incoming | set(mapping))
            body = substitute(body, {var: Var(renamed)})
            var = renamed
        body = substitute(body, mapping)
        if isinstance(f, Exists):
            return Exists(var, body, f.at_least)
        return Forall(var, body)
    raise TypeError("Unknown formula node %r" % (f,))


def _substitute_term(t, mapping):
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    return t


def expand_counting(f):
    """
    Rewrite every counting quantifier exists[>=k] into k plain existential quantifiers with pairwise distinct
    witnesses.

    Args:
        f (Formula): A formula possibly containing counting quantifiers.

    Returns:
        Formula: An equivalent formula without counting quantifiers.

    """
    return _expand(f, set(variables(f)))


def _expand(f, used):
    if isinstance(f, Exists):
        body = _expand(f.body, used)
        if f.at_least == 0:
            raise ValueError("exists[>=0] is vacuous and has no first-order expansion")
        if f.at_least == 1:
            return Exists(f.var, body)
        witnesses = []
        for i in range(1, f.at_least + 1):
            name = fresh_variable("%s_%d" % (f.var, i), used)
            used.add(name)
            witnesses.append(name)
        parts = [substitute(body, {f.var: Var(w)}) for w in witnesses]
        parts += [different(Var(a), Var(b)) for a, b in itertools.combinations(witnesses, 2)]
        result = conjoin(parts)
        for w in reversed(witnesses):
            result = Exists(w, result)
        return result
    if isinstance(f, Forall):
        return Forall(f.var, _expand(f.body, used))
    if isinstance(f, Not):
        return Not(_expand(f.body, used))
    if isinstance(f, And):
        return And(tuple(_expand(p, used) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_expand(p, used) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(_expand(f.left, used), _expand(f.right, used))
    if isinstance(f, Iff):
        return Iff(_expand(f.left, used), _expand(f.right, used))
    return f


# Printing

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def format_formula(f, labels=None, order="<"):
    """
    Print a formula in the DSL, in canonical form.

    Args:
        f (Formula): The formula.
        labels (dict): Optional mapping from element index to label, used for constants.
        order (str): Name of the relation printed with the infix "<".

    Returns:
        str: The DSL text.

    """
    return _Printer(labels or {}, order).format(f)


class _Printer:
    def __init__(self, labels, order):
        self.labels = labels
        self.order = order

    def term(self, t):
        if isinstance(t, Var):
            return t.name
        label = self.labels.get(t.element)
        if label is not None and _IDENTIFIER.match(label) and label not in _KEYWORDS:
            return "@" + label
        return "@%d" % t.element

    def wrap(self, f, parenthesize):
        text = self.format(f)
        return "(" + text + ")" if parenthesize else text

    def format(self, f):
        if isinstance(f, Atom):
            if f.relation == self.order and len(f.terms) == 2:
                return "%s < %s" % (self.term(f.terms[0]), self.term(f.terms[1]))
            return "%s(%s)" % (f.relation, ", ".join(self.term(t) for t in f.terms))
        if isinstance(f, Equals):
            return "%s = %s" % (self.term(f.left), self.term(f.right))
        if isinstance(f, Not):
            return "!" + self.wrap(f.body, f.body.precedence < 5)
        if isinstance(f, (And, Or)):
            joiner = " & " if isinstance(f, And) else " | "
            return joiner.join(self.wrap(p, p.precedence <= f.precedence) for p in f.parts)
        if isinstance(f, Implies):
            return "%s -> %s" % (self.wrap(f.left, f.left.precedence <= 2), self.wrap(f.right, f.right.precedence < 2))
        if isinstance(f, Iff):
            return "%s <-> %s" % (self.format(f.left), self.wrap(f.right, f.right.precedence <= 1))
        if isinstance(f, Exists):
            bound = "[>=%d]" % f.at_least if f.at_least != 1 else ""
            return "exists%s %s. %s" % (bound, f.var, self.wrap(f.body, f.body.precedence < 5))
        if isinstance(f, Forall):
            return "forall %s. %s" % (f.var, self.wrap(f.body, f.body.precedence < 5))
        raise TypeError("Unknown formula node %r" % (f,))


# Parsing

_KEYWORDS = {"exists", "forall"}
_TOKEN = re.compile(r"\s*(?:(?P<op><->|->|>=|[!&|().,<=\[\]@])|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(src):
    tokens = []
    position = 0
    while True:
        match = _TOKEN.match(src, position)
        if match is None or match.end() == position:
            rest = src[position:]
            if rest.strip():
                offset = position + len(rest) - len(rest.lstrip())
                raise FormulaSyntaxError("unexpected character %r" % src[offset], offset)
            tokens.append(("eof", None, len(src)))
            return tokens
        start = match.start(match.lastgroup)
        tokens.append((match.lastgroup, match.group(match.lastgroup), start))
        position = match.end()


class _Parser:
    def __init__(self, src, signature, order, labels):
        self.tokens = _tokenize(src)
        self.index = 0
        self.arities = dict(signature)
        self.order = order
        self.labels = labels

    @property
    def current(self):
        return self.tokens[self.index]

    def error(self, message):
        raise FormulaSyntaxError(message, self.current[2])

    def accept(self, value):
        kind, text, _ = self.current
        if kind == "op" and text == value:
            self.index += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            self.error("expected %r" % value)

    def parse(self):
        f = self.formula()
        if self.current[0] != "eof":
            self.error("unexpected %r" % self.current[1])
        return f

    def formula(self):
        f = self.implication()
        while self.accept("<->"):
            f = Iff(f, self.implication())
        return f

    def implication(self):
        f = self.disjunction()
        if self.accept("->"):
            return Implies(f, self.implication())
        return f

    def disjunction(self):
        parts = [self.conjunction()]
        while self.accept("|"):
            parts.append(self.conjunction())
        return disjoin(parts)

    def conjunction(self):
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.unary())
        return conjoin(parts)

    def unary(self):
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        kind, text, _ = self.current
        if kind == "ident" and text in _KEYWORDS:
            return self.quantifier()
        return self.atom()

    def quantifier(self):
        keyword = self.current[1]
        self.index += 1
        at_least = 1
        if self.accept("["):
            if keyword != "exists":
                self.error("counting bounds only apply to exists")
            self.expect(">=")
            kind, text, _ = self.current
            if kind != "int":
                self.error("expected a counting bound")
            self.index += 1
            at_least = int(text)
            self.expect("]")
        var = self.variable()
        self.expect(".")
        body = self.unary()
        return Exists(var, body, at_least) if keyword == "exists" else Forall(var, body)

    def variable(self):
        kind, text, _ = self.current
        if kind != "ident" or text in _KEYWORDS:
            self.error("expected a variable")
        self.index += 1
        return text

    def atom(self):
        kind, text, position = self.current
        if kind == "ident" and self.tokens[self.index + 1][1] == "(" and self.tokens[self.index + 1][0] == "op":
            if text not in self.arities:
                raise FormulaSyntaxError("unknown relation %s" % text, position)
            self.index += 2
            terms = [self.term()]
            while self.accept(","):
                terms.append(self.term())
            self.expect(")")
            if len(terms) != self.arities[text]:
                raise FormulaSyntaxError("relation %s has arity %d, not %d" % (text, self.arities[text], len(terms)),
                                         position)
            return Atom(text, tuple(terms))
        left = self.term()
        if self.accept("<"):
            if self.arities.get(self.order) != 2:
                raise FormulaSyntaxError("no binary order relation %s in the signature" % self.order, position)
            return Atom(self.order, (left, self.term()))
        if self.accept("="):
            return Equals(left, self.term())
        self.error("expected '<' or '='")

    def term(self):
        if self.accept("@"):
            kind, text, position = self.current
            if kind == "int":
                self.index += 1
                return Const(int(text))
            if kind == "ident":
                self.index += 1
                if text not in self.labels:
                    raise FormulaSyntaxError("unknown element label %s" % text, position)
                return Const(self.labels[text])
            self.error("expected an element index or label")
        kind, text, _ = self.current
        if kind == "ident" and text not in _KEYWORDS:
            self.index += 1
            return Var(text)
        self.error("expected a term")


def parse_formula(src, signature, order="<", labels=None):
    """
    Parse a formula of the DSL.

    Args:
        src (str): The source text.
        signature: A list of (name, arity) pairs, or a FiniteStructure (whose labels are then also used).
        order (str): Name of the relation written with the infix "<".
        labels (dict): Optional mapping from label to element index for "@label" constants.

    Returns:
        Formula: The AST.

    """
    if hasattr(signature, "signature"):
        if labels is None:
            labels = {v: k for k, v in signature.labels.items()}
        signature = signature.signature
    return _Parser(src, signature, order, labels or {}).parse()


# Evaluation

class Evaluator:
    """Tarskian evaluation of formulas in one structure, memoized per (subformula, relevant assignment)"""

    def __init__(self, structure, depth_cap=None, memo_cap=None):
        self.structure = structure
        self.depth_cap = depth_cap if depth_cap is not None else get_settings().quantifier_depth_cap
        self.memo_cap = memo_cap if memo_cap is not None else get_settings().memo_cap
        self.clear()

    def clear(self):
        """Forget every memoized value"""
        self._free = {}
        self._keep = {}
        self._memo = {}
        self._checked = set()

    @property
    def memoized(self):
        return len(self._memo)

    def free(self, f):
        key = id(f)
        if key not in self._free:
            self._keep[key] = f
            self._free[key] = tuple(sorted(free_variables(f)))
        return self._free[key]

    def evaluate(self, f, env):
        """
        Truth value of a formula under an assignment of its free variables.

        Args:
            f (Formula): The formula.
            env (dict): Mapping from variable name to element.

        Returns:
            bool: Whether the structure satisfies the formula.

        """
        if len(self._memo) > self.memo_cap:
            logger.debug("Evaluator memo over %d entries, starting over", self.memo_cap)
            self.clear()
        if id(f) not in self._checked:
            self._keep[id(f)] = f
            depth = quantifier_depth(f)
            if depth > self.depth_cap:
                raise ResourceLimitError("quantifier_depth_cap", self.depth_cap, "formula has depth %d" % depth)
            self._checked.add(id(f))
        missing = [v for v in self.free(f) if v not in env]
        if missing:
            raise EvaluationError("unbound free variable %s" % missing[0])
        return self._eval(f, env)

    def _term(self, t, env):
        if isinstance(t, Var):
            return env[t.name]
        if not 0 <= t.element < self.structure.universe_size:
            raise EvaluationError("constant @%d out of range" % t.element)
        return t.element

    def _eval(self, f, env):
        key = (id(f),) + tuple(env[v] for v in self.free(f))
        value = self._memo.get(key)
        if value is None:
            value = self._compute(f, env)
            self._memo[key] = value
        return value

    def _compute(self, f, env):
        if isinstance(f, Atom):
            return self.structure.holds(f.relation, [self._term(t, env) for t in f.terms])
        if isinstance(f, Equals):
            return self._term(f.left, env) == self._term(f.right, env)
        if isinstance(f, Not):
            return not self._eval(f.body, env)
        if isinstance(f, And):
            return all(self._eval(p, env) for p in f.parts)
        if isinstance(f, Or):
            return any(self._eval(p, env) for p in f.parts)
        if isinstance(f, Implies):
            return (not self._eval(f.left, env)) or self._eval(f.right, env)
        if isinstance(f, Iff):
            return self._eval(f.left, env) == self._eval(f.right, env)
        if isinstance(f, Exists):
            if f.at_least == 0:
                return True
            inner = dict(env)
            found = 0
            for a in range(self.structure.universe_size):
                inner[f.var] = a
                if self._eval(f.body, inner):
                    found += 1
                    if found >= f.at_least:
                        return True
            return False
        if isinstance(f, Forall):
            inner = dict(env)
            for a in range(self.structure.universe_size):
                inner[f.var] = a
                if not self._eval(f.body, inner):
                    return False
            return True
        raise TypeError("Unknown formula node %r" % (f,))

    def satisfier_set(self, f, free_var):
        """Set of elements a such that f holds with free_var assigned to a"""
        extra = free_variables(f) - {free_var}
        if extra:
            raise EvaluationError("satisfier sets need exactly one free variable; also free: %s" %
                                  ", ".join(sorted(extra)))
        return frozenset(a for a in range(self.structure.universe_size) if self.evaluate(f, {free_var: a}))


def evaluate(structure, f, env):
    """Truth value of a formula in a structure under an assignment of its free variables"""
    return Evaluator(structure).evaluate(f, env)


def satisfier_set(structure, f, free_var):
    """Set of elements a such that f holds with free_var assigned to a"""
    return Evaluator(structure).satisfier_set(f, free_var)


class FormulaSet:
    """An ordered list of partitioned formulas sharing the object variables x and the parameter variables y"""

    def __init__(self, formulas, x=("x",), y=("y",)):
        self.formulas = tuple(formulas)
        self.x = tuple(x)
        self.y = tuple(y)
        allowed = set(self.x) | set(self.y)
        if len(allowed) != len(self.x) + len(self.y):
            raise ValueError("Object and parameter variables must be distinct")
        for f in self.formulas:
            extra = free_variables(f) - allowed
            if extra:
                raise ValueError("Free variables %s are neither object nor parameter variables" %
                                 ", ".join(sorted(extra)))

    @classmethod
    def parse(cls, sources, signature, order="<", labels=None, x=("x",), y=("y",)):
        """Build the set from DSL sources"""
        return cls([parse_formula(s, signature, order=order, labels=labels) for s in sources], x=x, y=y)

    def __len__(self):
        return len(self.formulas)

    def __iter__(self):
        return iter(self.formulas)

    def __getitem__(self, item):
        return self.formulas[item]

    def environment(self, a, b):
        """Assignment of the object tuple a and the parameter tuple b"""
        if len(a) != len(self.x) or len(b) != len(self.y):
            raise ValueError("Expected |x| = %d and |y| = %d" % (len(self.x), len(self.y)))
        env = dict(zip(self.x, a))
        env.update(zip(self.y, b))
        return env

    def get_description(self, labels=None, order="<"):
        return {"x": list(self.x), "y": list(self.y),
                "formulas": [format_formula(f, labels=labels, order=order) for f in self.formulas]}
