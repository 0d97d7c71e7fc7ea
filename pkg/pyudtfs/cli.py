"""
Command-line interface of the workbench

Usage examples::

    pyudtfs gen grid --n 2 --k 3 -o grid.json
    pyudtfs analyze grid.json --width --zerotypes
    pyudtfs definability grid.json --B designated:B --d 1 --json
    pyudtfs lemma31 grid.json --psi "!exists z. z < x" --phi "x < y" --c g0_0 --B designated:B --d 1
    pyudtfs verify quick
"""
import argparse
import dataclasses
import hashlib
import itertools
import json
import logging
import sys
import time

import pandas as pd
import yaml

from . import Workbench, __version__, config, definer, gallery, model, suite
from .typespace import ParamSet

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class RunReport:
    """Output of a command. Findings and certificates only depend on the inputs and the seed."""
    command: str
    inputs: dict
    findings: dict
    certificates: list = dataclasses.field(default_factory=list)
    seed: int = 0
    wall_time: float = 0.0

    def get_description(self):
        return dataclasses.asdict(self)


def _hash(data):
    return hashlib.sha256(data if isinstance(data, bytes) else data.encode("utf-8")).hexdigest()


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2, default=_default)


def _default(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError("Cannot serialize %r" % (obj,))


def load_model(path):
    """Read a model file (JSON or YAML), returning its description and the sha256 of its contents"""
    with open(path, "rt") as f:
        text = f.read()
    description = yaml.safe_load(text)
    if not isinstance(description, dict):
        raise ValueError("%s is not a model file" % path)
    return description, _hash(text)


def _workbench(description, args):
    return Workbench.from_description(description, order=args.order, jobs=args.jobs)


def _elements(text, structure, description):
    """Elements from a comma-separated list of indices or labels, or designated:<name>"""
    text = (text or "").strip()
    if text.startswith("designated:"):
        name = text.split(":", 1)[1]
        designated = description.get("sets") or {}
        if name not in designated:
            raise ValueError("The model has no designated set %s" % name)
        return [int(e) for e in designated[name]]
    elements = []
    for token in filter(None, (t.strip() for t in text.split(","))):
        element = int(token) if token.isdigit() else structure.index(token)
        if not 0 <= element < structure.universe_size:
            raise ValueError("Element %s is out of the universe" % token)
        elements.append(element)
    return elements


def _element(text, structure):
    text = text.strip()
    element = int(text) if text.isdigit() else structure.index(text)
    if not 0 <= element < structure.universe_size:
        raise ValueError("Element %s is out of the universe" % text)
    return element


def cmd_gen(args):
    """Generate a poset and write its model file"""
    if args.family == "grid":
        spec = gallery.GridOrderSpec(args.n, args.k)
        poset, first, second = gallery.make_grid_order(spec)
        designated = {"B": first, "A": second}
    elif args.family == "hypercube":
        spec = gallery.HypercubePosetSpec(args.d)
        poset, first, second = gallery.make_hypercube_poset(spec)
        designated = {"P": first, "H": second}
    else:
        poset = gallery.random_width_poset(args.width, args.size, seed=args.seed)
        spec = None
        designated = {}
    description = poset.structure.get_description()
    description["sets"] = designated
    description["generator"] = spec.get_description() if spec is not None else \
        {"family": "random", "width": args.width, "size": args.size, "seed": args.seed}
    text = _dump(description)
    if args.output:
        with open(args.output, "wt") as f:
            f.write(text + "\n")
        logger.info("%d elements written to %s", poset.universe_size, args.output)
    findings = {"universe": poset.universe_size, "width": model.width(poset), "output": args.output}
    return RunReport("gen", {"generator": _hash(_dump(description["generator"]))}, findings, seed=args.seed), \
        None if args.output else text


def cmd_analyze(args):
    """Measure width, breadth, ∅-types and automorphisms of a poset"""
    description, digest = load_model(args.file)
    wb = _workbench(description, args)
    wanted = [m for m in ("width", "breadth", "zerotypes", "aut") if getattr(args, m)] or \
        ["width", "breadth", "zerotypes", "aut"]
    findings, certificates = {}, []
    if "width" in wanted:
        findings["width"] = wb.width()
        certificates.append({"maximum_antichain": wb.maximum_antichain()})
    if "breadth" in wanted:
        B = ParamSet.of_elements(_elements(args.B, wb.structure, description)) if args.B else None
        report = wb.breadth(B)
        findings["breadth"] = report.breadth if report.breadth is not None else "undefined"
        certificates.append({"breadth": report.get_description()})
    if "zerotypes" in wanted:
        partition = wb.zero_types()
        findings["zero_types"] = len(partition.classes)
        findings["antichain_classes"] = bool(wb.check_antichains())
        certificates.append({"zero_types": partition.get_description()})
    if "aut" in wanted:
        group = wb.automorphisms()
        findings["automorphisms"] = group.order
        certificates.append({"automorphisms": group.get_description()})
    table = wb.get_pandas() if "zerotypes" in wanted else None
    return RunReport("analyze", {"file": digest}, findings, certificates, seed=args.seed), table


def _certificate(wb, trace, admissible, d):
    """A positive verdict on the least admissible tuple, or a conflict on the first tuple of length d"""
    if admissible:
        params = min(admissible)
    else:
        params = next(itertools.product(trace.B.entries, repeat=d), ())
    verdict = wb.is_definable_over(trace, params)
    description = trace.get_description(labels=wb.structure.labels, order=wb.order)
    description["def_set"] = sorted([list(b) for b in t] for t in admissible)
    description["certificate"] = verdict.get_description()
    return description


def cmd_definability(args):
    """Def-sets of the realized types over B and the scheme bound"""
    description, digest = load_model(args.file)
    wb = _workbench(description, args)
    delta = wb.formula_set(args.delta or ["x < y"])
    B = ParamSet.of_elements(_elements(args.B, wb.structure, description))
    if args.type_of is not None:
        traces = [wb.type_of(delta, _element(args.type_of, wb.structure), B)]
    else:
        traces = wb.types(delta, B)
    bound = wb.scheme_bound(traces, args.d)
    certificates = [_certificate(wb, t, s, args.d) for t, s in bound.def_sets]
    findings = {"d": args.d, "types": len(traces),
                "lower_bound": "inf" if not bound.feasible else bound.lower_bound,
                "distinct_parameter_sets": bound.distinct_sets,
                "def_set_sizes": [len(s) for _, s in bound.def_sets]}
    certificates.append({"scheme_bound": bound.get_description()})
    inputs = {"file": digest, "delta": _hash("\n".join(args.delta or ["x < y"])), "B": _hash(args.B or "")}
    table = pd.DataFrame({"realizers": [",".join(wb.structure.label(a) for a in t.realizers) for t, _ in
                                        bound.def_sets],
                          "positive": [len(t.positive) for t, _ in bound.def_sets],
                          "def_set": [len(s) for _, s in bound.def_sets]})
    return RunReport("definability", inputs, findings, certificates, seed=args.seed), table


def cmd_verify(args):
    """Run a verification suite"""
    results = suite.run_suite(args.suite, seed=args.seed, jobs=args.jobs)
    findings = {"suite": args.suite, "passed": all(r.passed for r in results),
                "claims": {r.name: r.passed for r in results}}
    certificates = [r.get_description() for r in results]
    table = pd.DataFrame({"claim": [r.name for r in results], "passed": [r.passed for r in results],
                          "seconds": [round(r.seconds, 2) for r in results]})
    return RunReport("verify", {"suite": _hash(args.suite)}, findings, certificates, seed=args.seed), table


def cmd_lemma31(args):
    """Construct and verify a defining formula with the recursive definer"""
    description, digest = load_model(args.file)
    wb = _workbench(description, args)
    psi = wb.parse(args.psi)
    phi = wb.parse(args.phi)
    c = _element(args.c, wb.structure)
    B = ParamSet.of_elements(_elements(args.B, wb.structure, description))
    result = definer.lemma31_define(wb.structure, psi, phi, c, B, args.d, evaluator=wb.evaluator)
    findings = {"formula": wb.format(result.formula), "parameters": result.parameter_count,
                "terminal": result.terminal, "depth": result.depth}
    certificates = [result.get_description(labels=wb.structure.labels, order=wb.order)]
    inputs = {"file": digest, "psi": _hash(args.psi), "phi": _hash(args.phi), "B": _hash(args.B or "")}
    table = pd.DataFrame({"b": [wb.structure.label(b[0]) for b in B],
                          "verdict": [v[0] for v in result.transcript]})
    return RunReport("lemma31", inputs, findings, certificates, seed=args.seed), table


def build_parser():
    parser = argparse.ArgumentParser(prog="pyudtfs", description="Definability of types over finite sets in posets")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print the full report as JSON")
    common.add_argument("--jobs", type=int, default=None, help="Worker threads")
    common.add_argument("--seed", type=int, default=0, help="Seed of random choices")
    common.add_argument("--order", default="<", help="Name of the order relation")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="Generate a poset")
    gen.add_argument("family", choices=["grid", "hypercube", "random"])
    gen.add_argument("--n", type=int, default=1)
    gen.add_argument("--k", type=int, default=3)
    gen.add_argument("--d", type=int, default=1)
    gen.add_argument("--width", type=int, default=2)
    gen.add_argument("--size", type=int, default=8)
    gen.add_argument("-o", "--output", default=None, help="Model file to write (default: standard output)")
    gen.set_defaults(handler=cmd_gen)

    analyze = commands.add_parser("analyze", parents=[common], help="Measure a poset")
    analyze.add_argument("file")
    for measure in ("width", "breadth", "zerotypes", "aut"):
        analyze.add_argument("--" + measure, action="store_true")
    analyze.add_argument("--B", default=None, help="Parameters of the breadth family (default: every element)")
    analyze.set_defaults(handler=cmd_analyze)

    definability_parser = commands.add_parser("definability", parents=[common], help="Def-sets and scheme bound")
    definability_parser.add_argument("file")
    definability_parser.add_argument("--delta", action="append", help="A formula in x and y (repeatable)")
    definability_parser.add_argument("--B", default="", help="Comma-separated elements, or designated:<name>")
    definability_parser.add_argument("--d", type=int, default=1)
    definability_parser.add_argument("--type-of", default=None, help="Only the type of this element")
    definability_parser.set_defaults(handler=cmd_definability)

    verify = commands.add_parser("verify", parents=[common], help="Run a verification suite")
    verify.add_argument("suite", choices=suite.SUITES)
    verify.set_defaults(handler=cmd_verify)

    lemma31 = commands.add_parser("lemma31", parents=[common], help="Recursive defining formula")
    lemma31.add_argument("file")
    lemma31.add_argument("--psi", required=True)
    lemma31.add_argument("--phi", required=True)
    lemma31.add_argument("--c", required=True)
    lemma31.add_argument("--B", default="")
    lemma31.add_argument("--d", type=int, required=True)
    lemma31.set_defaults(handler=cmd_lemma31)
    return parser


def main(argv=None):
    """Entry point. Returns 0 on success, 1 when a verified claim fails and 2 on usage or input errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    config.setup_logging(default_level=logging.DEBUG if args.verbose else logging.WARNING)
    start = time.perf_counter()
    try:
        report, extra = args.handler(args)
    except (ValueError, OSError, config.ResourceLimitError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    report.wall_time = time.perf_counter() - start
    if args.json:
        print(_dump(report.get_description()))
    else:
        if isinstance(extra, str):
            print(extra)
        for key, value in report.findings.items():
            print("%s: %s" % (key, value))
        if isinstance(extra, pd.DataFrame):
            print(extra.to_string(index=False))
    if args.command == "verify" and not report.findings["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
