"""
Module with the verification suites: each claim is checked on generated posets and reports what it measured
"""
import dataclasses
import logging
import time
from typing import Dict, List

import numpy as np

from . import definability, definer, gallery, model, symmetry
from .logic import FormulaSet
from .typespace import ParamSet, enumerate_types, realize_type

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class ClaimResult:
    name: str
    description: str
    passed: bool = True
    measured: Dict = dataclasses.field(default_factory=dict)
    failures: List = dataclasses.field(default_factory=list)
    seconds: float = 0.0

    def fail(self, detail):
        self.passed = False
        self.failures.append(detail)

    def get_description(self):
        return {"name": self.name, "description": self.description, "passed": self.passed,
                "measured": self.measured, "failures": self.failures}


def _delta_less():
    return FormulaSet.parse(["x < y"], [("<", 2)])


def _delta_below():
    return FormulaSet.parse(["y < x"], [("<", 2)])


def _grid(n, k=3):
    spec = gallery.GridOrderSpec(n, k)
    return spec, gallery.make_grid_order(spec)


def _random_poset(rng, width, size):
    return gallery.random_width_poset(width, size, seed=int(rng.integers(2 ** 31)))


def _random_params(rng, n, size):
    size = min(size, n)
    return ParamSet.of_elements(sorted(int(e) for e in rng.choice(n, size=size, replace=False)))


def check_widths(result, quick, rng, jobs=None):
    for n in (1, 2) if quick else (1, 2, 3):
        for k in (2, 3) if quick else (2, 3, 4, 5):
            w = model.width(_grid(n, k)[1].poset)
            result.measured["grid(%d,%d)" % (n, k)] = w
            if w != k:
                result.fail("grid(%d,%d) has width %d" % (n, k, w))
    for d in (1, 2) if quick else (1, 2, 3):
        hypercube = gallery.make_hypercube_poset(gallery.HypercubePosetSpec(d))
        w = model.width(hypercube.poset)
        result.measured["hypercube(%d)" % d] = w
        if w != 2 ** (d + 1):
            result.fail("hypercube(%d) has width %d" % (d, w))
    for _ in range(3 if quick else 10):
        p = _random_poset(rng, int(rng.integers(1, 4)), int(rng.integers(4, 10)))
        if model.width(p) != model.brute_force_width(p):
            result.fail("width search disagrees with subset enumeration")


def _grid_def_sets(n, jobs=None):
    spec, grid = _grid(n)
    structure = grid.poset.structure
    B = ParamSet.of_elements(grid.B)
    traces = enumerate_types(structure, _delta_below(), B, over=grid.A)
    return spec, grid, traces, definability.def_sets(structure, traces, 1, jobs=jobs)


def check_grid_definability(result, quick, rng, jobs=None):
    for n in (2,) if quick else (2, 3, 4):
        spec, grid, traces, sets = _grid_def_sets(n, jobs=jobs)
        expected = frozenset([((spec.element(2 * n, 0),),)])
        for trace, admissible in sets:
            if admissible != expected:
                result.fail("grid(%d): Def-set of the type of %s is %s" % (n, trace.realizers, sorted(admissible)))
        cache = definability.StabilizerCache(grid.poset.structure, traces[0].B)
        for i in (1, 2):
            verdict = definability.is_definable_over(grid.poset.structure, traces[0], [(spec.element(0, i),)],
                                                     cache=cache)
            if verdict.verdict or not verdict.replay(grid.poset.structure):
                result.fail("grid(%d): no replayable certificate against copy %d" % (n, i))
        result.measured["grid(%d) types" % n] = len(traces)


def check_grid_scheme_growth(result, quick, rng, jobs=None):
    previous = 0
    for n in (2, 3) if quick else (2, 3, 4):
        _, _, traces, sets = _grid_def_sets(n, jobs=jobs)
        bound = definability.min_scheme_count(sets, 1).lower_bound
        result.measured["grid(%d)" % n] = bound
        if bound != 2 * n - 1 or bound < n + 1 or bound <= previous:
            result.fail("grid(%d): scheme bound %s" % (n, bound))
        previous = bound


def _exact_class(rng, p, partition, d):
    candidates = [c for c in partition.classes if len(c) <= 2 ** (d + 1) - 1]
    if not candidates:
        return None
    cls = candidates[int(rng.integers(len(candidates)))]
    isolator = definer.isolating_formula(p, cls)
    return (cls, isolator) if isolator.exact else None


def check_recursive_definer(result, quick, rng, jobs=None):
    target = 20 if quick else 100
    done = attempts = 0
    delta = _delta_less()
    while done < target and attempts < 10 * target:
        attempts += 1
        d = int(rng.integers(0, 4))
        size = int(rng.integers(3, 13))
        p = _random_poset(rng, int(rng.integers(1, min(size, 7) + 1)), size)
        found = _exact_class(rng, p, definer.zero_type_partition(p), d)
        if found is None:
            continue
        cls, isolator = found
        c = int(rng.choice(cls))
        B = _random_params(rng, size, int(rng.integers(0, 9)))
        try:
            defined = definer.define_type(p.structure, isolator.formula, delta, c, B, d)
        except definer.DefinerError as e:
            result.fail("definer failed on a valid input: %s" % e)
            continue
        if defined.parameter_count > d:
            result.fail("definer used %d > %d parameters" % (defined.parameter_count, d))
        done += 1
    result.measured["inputs"] = done
    if done < target:
        result.fail("only %d valid inputs generated" % done)


def _gallery():
    posets = [model.chain(5)]
    for n in (1, 2):
        posets.append(_grid(n)[1].poset)
    for d in (1, 2):
        posets.append(gallery.make_hypercube_poset(gallery.HypercubePosetSpec(d)).poset)
    return posets


def check_antichain_classes(result, quick, rng, jobs=None):
    posets = _gallery() + [_random_poset(rng, int(rng.integers(1, 5)), int(rng.integers(4, 13)))
                           for _ in range(40 if quick else 200)]
    for p in posets:
        check = definer.check_lemma33(p)
        if not check:
            result.fail(check.get_description())
    result.measured["posets"] = len(posets)


def check_vcd(result, quick, rng, jobs=None):
    semantic = total = 0
    for _ in range(8 if quick else 25):
        size = int(rng.integers(7, 15))
        p = _random_poset(rng, int(rng.integers(1, 8)), size)
        B = _random_params(rng, size, int(rng.integers(1, 7)))
        report = definer.vcd_certificate(p, B, jobs=jobs)
        if not report.certified or report.d != model.width(p).bit_length() - 1:
            result.fail(report.get_description())
        semantic += sum(e.kind == "semantic" for e in report.entries)
        total += len(report.entries)
    result.measured["types"] = total
    result.measured["fallback_rate"] = semantic / total if total else 0.0


def _hypercube_trace(d):
    spec = gallery.HypercubePosetSpec(d)
    hypercube = gallery.make_hypercube_poset(spec)
    B = ParamSet.of_elements(hypercube.H)
    return hypercube, realize_type(hypercube.poset.structure, _delta_less(), 0, B)


def check_hypercube_tightness(result, quick, rng, jobs=None):
    for d in (1, 2) if quick else (1, 2, 3):
        hypercube, trace = _hypercube_trace(d)
        structure = hypercube.poset.structure
        cache = definability.StabilizerCache(structure, trace.B)
        short = definability.def_tuples(structure, trace, d, jobs=jobs, cache=cache)
        long = definability.def_tuples(structure, trace, d + 1, jobs=jobs, cache=cache)
        verdict = definability.is_definable_over(structure, trace, trace.B.entries[:d], cache=cache)
        result.measured["hypercube(%d)" % d] = {"short": len(short), "long": len(long)}
        if short or not long or verdict.verdict or not verdict.replay(structure):
            result.fail("hypercube(%d): Def-sets of sizes %d and %d" % (d, len(short), len(long)))


def check_no_uniform_d(result, quick, rng, jobs=None):
    for d in (1, 2) if quick else (1, 2, 3):
        hypercube = gallery.make_hypercube_poset(gallery.HypercubePosetSpec(d))
        report = definer.vcd_certificate(hypercube.poset, ParamSet.of_elements(hypercube.H), d=d, jobs=jobs)
        result.measured["hypercube(%d)" % d] = len(report.uncertified())
        if report.certified:
            result.fail("hypercube(%d) is certified with %d parameters" % (d, d))


def check_breadth(result, quick, rng, jobs=None):
    delta = FormulaSet.parse(["x < z", "x = z"], [("<", 2)], y=("z",))
    for _ in range(4 if quick else 12):
        n = int(rng.integers(2, 4))
        size = int(rng.integers(n, 11))
        p = _random_poset(rng, n, size)
        family = [p.down_set(b) for b in range(size)]
        report = definability.breadth(family)
        result.measured.setdefault("breadths", []).append(report.breadth)
        if report.breadth is None or report.breadth > n or not report.replay():
            result.fail("breadth %s for width %d" % (report.breadth, n))
        if not definability.sample_collapse(family, n, n + 2, rng):
            result.fail("an intersection of %d down-sets does not collapse" % (n + 2))
        B = ParamSet.of_elements(range(size))
        for trace in enumerate_types(p.structure, delta, B):
            defined = definability.breadth_define(p.structure, delta, B, trace, n)
            if not defined.agrees:
                result.fail("breadth definition of the type of %s fails" % (trace.realizers,))


def check_engine_soundness(result, quick, rng, jobs=None):
    for _ in range(8 if quick else 30):
        p = _random_poset(rng, int(rng.integers(1, 4)), int(rng.integers(3, 8)))
        group = symmetry.automorphism_group(p.structure)
        brute = symmetry.brute_force_automorphisms(p.structure)
        brute_orbits = symmetry.orbit_partition(p.universe_size, brute).orbits
        if group.order != len(brute) or group.orbits().orbits != brute_orbits:
            result.fail("group of order %d, %d automorphisms by enumeration" % (group.order, len(brute)))
    delta = _delta_less()
    found = 0
    queries = 100 if quick else 500
    for _ in range(queries):
        size = int(rng.integers(3, 9))
        p = _random_poset(rng, int(rng.integers(1, 4)), size)
        B = _random_params(rng, size, int(rng.integers(1, size + 1)))
        trace = realize_type(p.structure, delta, int(rng.integers(size)), B)
        params = [B[int(j)] for j in rng.integers(len(B), size=int(rng.integers(0, 3)))]
        formulas = definability.bounded_formula_search(p.structure, trace, params, 2)
        if formulas is not None:
            found += 1
            if not definability.is_definable_over(p.structure, trace, params).verdict:
                result.fail("formula found where the orbit criterion forbids one")
    result.measured["formulas_found"] = found
    result.measured["queries"] = queries


CLAIMS = [
    ("widths", "Widths of the grid orders and hypercube posets", check_widths),
    ("grid-definability", "Grid types are definable over the midpoint of copy 0 and nothing else", check_grid_definability),
    ("grid-scheme-growth", "The scheme bound of the grid orders is 2n-1 and grows with n", check_grid_scheme_growth),
    ("recursive-definer", "The recursive definer replays with at most d parameters", check_recursive_definer),
    ("antichain-classes", "Every ∅-type class of a finite poset is an antichain", check_antichain_classes),
    ("vcd-width", "Posets of width below 2^(d+1) have every type definable with d parameters", check_vcd),
    ("hypercube-tightness", "Hypercube types need exactly d+1 parameters", check_hypercube_tightness),
    ("no-uniform-d", "No single d certifies every hypercube poset", check_no_uniform_d),
    ("breadth", "Down-set families of width-n posets have breadth at most n", check_breadth),
    ("engine-soundness", "Automorphism search and formula search agree with their oracles", check_engine_soundness),
]

SUITES = ("paper", "quick")


def run_suite(name, seed=0, jobs=None):
    """
    Run every claim of a suite.

    Args:
        name (str): "paper" for the full parameters, "quick" for reduced ones.
        seed (int): Seed of the random instances.
        jobs (int): Worker threads of the Def-set computations. Defaults to the configured value.

    Returns:
        list of ClaimResult: One result per claim.

    """
    if name not in SUITES:
        raise ValueError("Unknown suite %s (expected one of %s)" % (name, ", ".join(SUITES)))
    results = []
    for claim, description, check in CLAIMS:
        result = ClaimResult(claim, description)
        start = time.perf_counter()
        check(result, name == "quick", np.random.default_rng(seed), jobs=jobs)
        result.seconds = time.perf_counter() - start
        logger.info("%s: %s (%.1f s)", claim, "pass" if result.passed else "FAIL", result.seconds)
        results.append(result)
    return results
