"""pyudtfs - Package to explore uniform definability of types over finite sets in finite posets"""

__version__ = '0.1.0'

import pandas as pd

from . import config, model, gallery, logic, symmetry, typespace, definability, definer


class Workbench:
    """Measurements and certificates for one finite poset, caching the expensive intermediate results"""

    def __init__(self, poset, jobs=None):
        """

        Args:
            poset (model.PosetView): The poset to study.
            jobs (int): Worker threads for Def-set computations. Defaults to the configured value.

        """
        self.poset = poset
        self.structure = poset.structure
        self.jobs = jobs
        self.evaluator = logic.Evaluator(self.structure)

        self._width = None
        self._partition = None
        self._groups = {}
        self._caches = {}

    @classmethod
    def from_description(cls, description, order="<", jobs=None):
        """Build the workbench from a model file description"""
        return cls(model.validate_poset(model.structure_from_description(description), order), jobs=jobs)

    @property
    def order(self):
        return self.poset.order_relation

    def width(self):
        """Width of the poset"""
        if self._width is None:
            self._width = model.width(self.poset)
        return self._width

    def maximum_antichain(self):
        return model.maximum_antichain(self.poset)

    def zero_types(self):
        """The ∅-type partition"""
        if self._partition is None:
            self._partition = definer.zero_type_partition(self.poset)
        return self._partition

    def automorphisms(self, fixed=()):
        """The automorphisms fixing some elements pointwise"""
        key = tuple(sorted(set(fixed)))
        if key not in self._groups:
            self._groups[key] = symmetry.automorphism_group(self.structure, key)
        return self._groups[key]

    def check_antichains(self):
        return definer.check_lemma33(self.poset, partition=self.zero_types())

    def parse(self, source):
        """Parse a formula in the DSL, with the element labels of the poset"""
        return logic.parse_formula(source, self.structure, order=self.order)

    def formula_set(self, sources, x=("x",), y=("y",)):
        return logic.FormulaSet.parse(sources, self.structure, order=self.order, x=x, y=y)

    def format(self, formula):
        return logic.format_formula(formula, labels=self.structure.labels, order=self.order)

    def types(self, delta, B, over=None):
        """Realized Δ-types over B"""
        return typespace.enumerate_types(self.structure, delta, B, over=over, evaluator=self.evaluator)

    def type_of(self, delta, a, B):
        return typespace.realize_type(self.structure, delta, a, B, evaluator=self.evaluator)

    def _cache(self, B):
        key = B.entries
        if key not in self._caches:
            self._caches[key] = definability.StabilizerCache(self.structure, B)
        return self._caches[key]

    def is_definable_over(self, trace, params):
        return definability.is_definable_over(self.structure, trace, params, cache=self._cache(trace.B))

    def def_tuples(self, trace, d):
        return definability.def_tuples(self.structure, trace, d, jobs=self.jobs, cache=self._cache(trace.B))

    def scheme_bound(self, traces, d):
        """Def-sets of some types and the least load of any assignment of types to admissible tuples"""
        return definability.min_scheme_count([(t, self.def_tuples(t, d)) for t in traces], d)

    def down_set_family(self, B=None):
        """Satisfier sets of x < b for the elements b of B (default: the whole universe), labeled by b"""
        elements = range(self.poset.universe_size) if B is None else B.elements
        return [self.poset.down_set(b) for b in elements], list(elements)

    def breadth(self, B=None):
        family, labels = self.down_set_family(B)
        return definability.breadth(family, labels=labels)

    def vcd_certificate(self, B, include_eq=False, d=None):
        return definer.vcd_certificate(self.poset, B, include_eq=include_eq, d=d, jobs=self.jobs,
                                       partition=self.zero_types())

    def get_pandas(self):
        """
        Get a pandas dataframe describing the elements of the poset

        Returns:
            pandas.DataFrame: Label, down-set size, up-set size and ∅-type class index of every element.

        """
        partition = self.zero_types()
        class_index = {a: k for k, cls in enumerate(partition.classes) for a in cls}
        return pd.DataFrame({"label": [self.structure.label(a) for a in range(self.poset.universe_size)],
                             "down": self.poset.down_set_sizes(),
                             "up": self.poset.up_set_sizes(),
                             "zero_type": [class_index[a] for a in range(self.poset.universe_size)]})
