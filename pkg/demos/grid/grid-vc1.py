#!/usr/bin/env python3
"""Scheme bound of the grid orders: one parameter suffices for each type, but not uniformly"""
import pandas as pd

import pyudtfs
from pyudtfs.typespace import ParamSet

rows = []
for n in range(2, 6):
    spec = pyudtfs.gallery.GridOrderSpec(n)
    grid = pyudtfs.gallery.make_grid_order(spec)
    wb = pyudtfs.Workbench(grid.poset)
    # The types of x over B for the formula y < x, realized in the open upper half of copy 0
    delta = wb.formula_set(["y < x"])
    traces = wb.types(delta, ParamSet.of_elements(grid.B), over=grid.A)
    bound = wb.scheme_bound(traces, 1)
    rows.append({"n": n, "width": wb.width(), "types": len(traces), "scheme_bound": bound.lower_bound,
                 "parameter": grid.poset.structure.label(spec.element(2 * n, 0)),
                 "def_set_sizes": sorted({len(s) for _, s in bound.def_sets})})

print(pd.DataFrame(rows).to_string(index=False))
