#!/usr/bin/env python3
"""Def-sets of the hypercube posets around the parameter bound"""
import itertools

import pandas as pd

import pyudtfs
from pyudtfs.typespace import ParamSet

rows = []
for d in (1, 2, 3):
    hypercube = pyudtfs.gallery.make_hypercube_poset(pyudtfs.gallery.HypercubePosetSpec(d))
    wb = pyudtfs.Workbench(hypercube.poset)
    B = ParamSet.of_elements(hypercube.H)
    trace = wb.type_of(wb.formula_set(["x < y"]), hypercube.P[0], B)
    short = wb.def_tuples(trace, d)
    long = wb.def_tuples(trace, d + 1)
    # Every tuple of length d has a replayable automorphism separating two half-spaces
    verdicts = [wb.is_definable_over(trace, params) for params in itertools.product(B.entries, repeat=d)]
    replayed = all(not v.verdict and v.replay(wb.structure) for v in verdicts)
    natural = wb.vcd_certificate(B)
    forced = wb.vcd_certificate(B, d=d)
    rows.append({"d": d, "width": wb.width(), "def_d": len(short), "def_d+1": len(long), "replayed": replayed,
                 "natural_d": natural.d, "certified": natural.certified,
                 "uncertified_with_d": len(forced.uncertified())})

print(pd.DataFrame(rows).to_string(index=False))
