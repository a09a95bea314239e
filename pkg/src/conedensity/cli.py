"""Command-line front end.

Subcommands:
  densify    approximate a 1-Lipschitz complex by a two-layer tower of cones
  verify     replay every certificate embedded in a document
  distance   interleaving distance between two complexes
  decompose  barcode of a stalk complex, with a replayable change of basis
  irdim      chain + approximate an entire corpus from one vertex-cone family

Exit codes: 0 success, 2 certificate failure, 3 undecided at the search cap,
4 invalid input.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from . import docio
from .barcode import CertificateError, LeveledComplex, barcode_of, cone_model, gabriel_decompose
from .density import ConeGenerator, DensityError, NonLipschitzError, densify, solo_approximator_check
from .docio import DocumentError
from .graph import GraphError, GraphPoint, MetricGraph
from .interleave import distance_bounds, distance_exact
from .rat import fmt, q
from .tame import TameError
from .twisted import ComplexError, TwistedComplex

EXIT_OK = 0
EXIT_CERT = 2
EXIT_UNDECIDED = 3
EXIT_INPUT = 4

# stages of the pipeline where failure means the input was bad, not the math
_INPUT_STAGES = ("input", "refine", "cover")


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fail(code: int, message: str) -> "_Exit":
    return _Exit(code, message)


def _read_doc(path: str) -> dict:
    try:
        text = Path(path).read_bytes()
    except OSError as exc:
        raise _fail(EXIT_INPUT, f"{path}: {exc}")
    try:
        return docio.loads(text)
    except DocumentError as exc:
        raise _fail(EXIT_INPUT, f"{path}: {exc}")


def _write_doc(path: str, doc: dict) -> None:
    try:
        Path(path).write_text(docio.dumps(doc), encoding="utf-8")
    except OSError as exc:
        raise _fail(EXIT_INPUT, f"{path}: {exc}")


def _parse_eps(text: str) -> Fraction:
    try:
        value = q(text)
    except ValueError as exc:
        raise _fail(EXIT_INPUT, f"--epsilon: {exc}")
    if not isinstance(value, Fraction) or value <= 0:
        raise _fail(EXIT_INPUT, "--epsilon must be a positive rational")
    return value


def _load_complex(path: str, graph: Optional[MetricGraph] = None) -> TwistedComplex:
    doc = _read_doc(path)
    try:
        cx = docio.parse_cx(doc)
    except DocumentError as exc:
        raise _fail(EXIT_INPUT, f"{path}: {exc}")
    if graph is not None and cx.graph != graph:
        raise _fail(EXIT_INPUT, f"{path}: embedded graph disagrees with --graph")
    return cx


def _parse_point(text: str, g: MetricGraph) -> GraphPoint:
    if text in g.vertices:
        return GraphPoint.V(text)
    if text.startswith("e") and ":" in text:
        head, _, off = text[1:].partition(":")
        try:
            e = int(head)
            offset = q(off)
        except ValueError:
            raise _fail(EXIT_INPUT, f"--point: cannot parse {text!r}")
        if not 0 <= e < len(g.edges):
            raise _fail(EXIT_INPUT, f"--point: edge {e} does not exist")
        if not isinstance(offset, Fraction) or not 0 <= offset <= g.edges[e][2]:
            raise _fail(EXIT_INPUT, f"--point: offset {off} outside edge {e}")
        return g.point(e, offset)
    raise _fail(EXIT_INPUT,
                f"--point: {text!r} is neither a vertex name nor eIDX:OFFSET")


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def _cmd_densify(args) -> int:
    graph = None
    if args.graph:
        try:
            graph = docio.parse_graph(_read_doc(args.graph))
        except DocumentError as exc:
            raise _fail(EXIT_INPUT, f"{args.graph}: {exc}")
    cx = _load_complex(args.sheaf, graph)
    eps = _parse_eps(args.epsilon)
    try:
        rep = densify(cx, eps, cap=args.cap, threads=args.threads)
    except NonLipschitzError as exc:
        raise _fail(EXIT_INPUT, str(exc))
    except DensityError as exc:
        code = EXIT_INPUT if exc.stage in _INPUT_STAGES else EXIT_CERT
        raise _fail(code, str(exc))
    command = (f"conedensity densify --sheaf {args.sheaf} "
               f"--epsilon {fmt(eps)}")
    if args.graph:
        command = (f"conedensity densify --graph {args.graph} "
                   f"--sheaf {args.sheaf} --epsilon {fmt(eps)}")
    doc = docio.density_report_doc(rep, command)
    if args.out:
        _write_doc(args.out, doc)
    print(f"densify: {cx.n()} generators -> {rep.output.n()} cones "
          f"in {rep.layer_count} layers")
    print(f"certified {fmt(rep.certified)} <= budget {fmt(rep.budget)}; "
          f"measured [{fmt(rep.measured.lower)}, {fmt(rep.measured.upper)}]")
    if args.out:
        print(f"report written to {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    doc = _read_doc(args.report)
    try:
        checked = docio.replay_document(doc)
    except DocumentError as exc:
        raise _fail(EXIT_INPUT, f"{args.report}: {exc}")
    except CertificateError as exc:
        raise _fail(EXIT_CERT, f"{args.report}: {exc}")
    for label in checked:
        print(f"ok {label}")
    print(f"verify: {len(checked)} checks replayed")
    return EXIT_OK


def _cmd_distance(args) -> int:
    F = _load_complex(args.a)
    G = _load_complex(args.b)
    if F.graph != G.graph:
        raise _fail(EXIT_INPUT, "the two complexes live on different graphs")
    if args.bounds:
        points = [GraphPoint.V(v) for v in F.graph.vertices]
        rep = distance_bounds(F, G, cap=args.cap, stalk_points=points,
                              probe_budget=args.samples)
    else:
        rep = distance_exact(F, G, cap=args.cap)
    if args.out:
        mode = "--bounds" if args.bounds else "--exact"
        command = f"conedensity distance {args.a} {args.b} {mode}"
        _write_doc(args.out, docio.distance_report_doc(F, G, rep, command))
    if rep.exact:
        print(f"distance: {fmt(rep.upper)}")
        return EXIT_OK
    print(f"distance in [{fmt(rep.lower)}, {fmt(rep.upper)}] "
          f"({rep.undecided} cells undecided at cap {args.cap})")
    return EXIT_OK if args.bounds else EXIT_UNDECIDED


def _cmd_decompose(args) -> int:
    cx = _load_complex(args.sheaf)
    point = _parse_point(args.point, cx.graph)
    lc, kept = LeveledComplex.from_stalk(cx, point)
    try:
        gab = gabriel_decompose(lc)
    except (CertificateError, ComplexError) as exc:
        raise _fail(EXIT_CERT, str(exc))
    gab.verify()
    model = cone_model(cx.graph, point, gab.barcode)
    round_trip = barcode_of(model, point)
    if round_trip.bars != gab.barcode.bars:
        raise _fail(EXIT_CERT, "cone model does not reproduce the barcode")
    doc = {
        "schema": docio.schema_tag("report"),
        "kind": "decompose",
        "version": docio.TOOL_VERSION,
        "replay": f"conedensity decompose --sheaf {args.sheaf} --point {args.point}",
        "point": docio.point_payload(point),
        "stalk_generators": kept,
        "barcode": docio.barcode_payload(gab.barcode),
        "model": docio.cx_payload(model),
        "decompositions": [{"label": "stalk", "decomposition":
                            docio.gabriel_payload(gab)}],
    }
    if args.out:
        _write_doc(args.out, doc)
    for bar in gab.barcode.bars:
        print(f"deg {bar.degree}: [{fmt(bar.birth)}, {fmt(bar.death)})")
    if not gab.barcode.bars:
        print("empty barcode (stalk is contractible or empty)")
    print(f"decompose: {len(kept)} stalk generators, "
          f"{len(gab.barcode.bars)} bars, model round-trip ok")
    return EXIT_OK


def _cmd_irdim(args) -> int:
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise _fail(EXIT_INPUT, f"{args.corpus}: not a directory")
    paths = sorted(p for p in corpus_dir.iterdir() if p.suffix == ".json")
    if not paths:
        raise _fail(EXIT_INPUT, f"{args.corpus}: no .json documents")
    corpus: List[TwistedComplex] = []
    for p in paths:
        cx = _load_complex(str(p))
        if corpus and cx.graph != corpus[0].graph:
            raise _fail(EXIT_INPUT, f"{p}: corpus complexes must share one graph")
        corpus.append(cx)
    graph = corpus[0].graph
    eps = _parse_eps(args.epsilon)
    degrees = sorted({gen.degree for cx in corpus for gen in cx.gens})
    family = tuple(ConeGenerator(GraphPoint.V(v), Fraction(0), d)
                   for d in degrees for v in graph.vertices)
    rep = solo_approximator_check(graph, family, corpus, eps, cap=args.cap)
    print(f"family: {len(family)} vertex cones over degrees {degrees}")
    print(f"chains: {len(rep.chains)} pairs joined, "
          f"max step {fmt(rep.max_step)} < {fmt(2 * eps)}")
    for p, item in zip(paths, rep.approximations):
        print(f"{p.name}: certified {fmt(item.certified)} "
              f"<= {fmt(item.budget)}, {item.layer_count} layers")
    if args.out:
        doc = {
            "schema": docio.schema_tag("report"),
            "kind": "irdim",
            "version": docio.TOOL_VERSION,
            "replay": (f"conedensity irdim --corpus {args.corpus} "
                       f"--epsilon {fmt(eps)}"),
            "epsilon": fmt(eps),
            "family": [{**docio.point_payload(g.basepoint),
                        "level": fmt(g.level), "degree": g.degree}
                       for g in family],
            "chains": [{"steps": len(c.steps), "max_step": fmt(c.max_step)}
                       for c in rep.chains],
            "items": [{"file": p.name, "certified": fmt(item.certified),
                       "budget": fmt(item.budget),
                       "layers": [len(layer) for layer in item.layers],
                       "certificate": docio.certificate_payload(item.certificate)}
                      for p, item in zip(paths, rep.approximations)],
            "failures": list(rep.failures),
        }
        _write_doc(args.out, doc)
    if rep.failures:
        for line in rep.failures:
            print(f"FAIL {line}")
        return EXIT_CERT
    print(f"irdim: every item reached in 2 layers at epsilon {fmt(eps)}")
    return EXIT_OK


# ----------------------------------------------------------------------
# argument plumbing
# ----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conedensity",
        description="Certified approximation of sheaf-like complexes on "
                    "metric graphs by towers of distance cones.")
    parser.add_argument("--version", action="version",
                        version=f"conedensity {docio.TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--threads", type=int, default=1,
                       help="parallel workers for per-piece stages")
        p.add_argument("--cap", type=int, default=1 << 16,
                       help="representative enumeration cap per search cell")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized helpers (reproducibility)")

    p = sub.add_parser("densify", help="approximate by a two-layer cone tower")
    p.add_argument("--graph", help="graph document (optional cross-check)")
    p.add_argument("--sheaf", required=True, help="complex document")
    p.add_argument("--epsilon", required=True, help="mesh, e.g. 1/4")
    p.add_argument("--out", help="write a replayable report here")
    common(p)
    p.set_defaults(run=_cmd_densify)

    p = sub.add_parser("verify", help="replay certificates in a document")
    p.add_argument("report", help="report, record, or certificate document")
    common(p)
    p.set_defaults(run=_cmd_verify)

    p = sub.add_parser("distance", help="interleaving distance")
    p.add_argument("a", help="first complex document")
    p.add_argument("b", help="second complex document")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true",
                      help="demand an exact value (exit 3 if capped)")
    mode.add_argument("--bounds", action="store_true",
                      help="report bounds under a probe budget")
    p.add_argument("--samples", type=int, default=None,
                   help="probe budget for --bounds")
    p.add_argument("--out", help="write the distance report here")
    common(p)
    p.set_defaults(run=_cmd_distance)

    p = sub.add_parser("decompose", help="barcode of a stalk complex")
    p.add_argument("--sheaf", required=True, help="complex document")
    p.add_argument("--point", required=True,
                   help="vertex name or eIDX:OFFSET, e.g. v0 or e2:1/3")
    p.add_argument("--out", help="write the decomposition report here")
    common(p)
    p.set_defaults(run=_cmd_decompose)

    p = sub.add_parser("irdim", help="corpus reachability from vertex cones")
    p.add_argument("--corpus", required=True, help="directory of complex documents")
    p.add_argument("--epsilon", required=True, help="mesh, e.g. 1/8")
    p.add_argument("--out", help="write the corpus report here")
    common(p)
    p.set_defaults(run=_cmd_irdim)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        random.seed(args.seed)
    try:
        return args.run(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GraphError, TameError, ComplexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CertificateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERT


if __name__ == "__main__":
    sys.exit(main())
