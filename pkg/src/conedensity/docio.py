"""Canonical JSON documents for every value the tool exchanges.

Each document is a JSON object with a ``schema`` tag (``conedensity/<kind>@1``)
and a payload.  Serialization is canonical — sorted keys, rationals as
``"p/q"`` strings, ``"inf"`` for the infinite sentinel — so identical values
produce byte-identical documents and certificates can be replayed bit-exactly
from the file alone: certificate documents embed their source and target
complexes.  Parse errors carry the JSON-pointer-style path of the offending
element.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from . import gf2
from .barcode import Bar, Barcode, GabrielCertificate, LeveledComplex
from .graph import GraphError, GraphPoint, MetricGraph
from .interleave import Certificate, DistanceReport
from .rat import INF, Val, fmt, q
from .tame import EdgeProfile, TameError, TameFunction
from .twisted import ChainMap, ComplexError, Generator, TwistedComplex

SCHEMA_PREFIX = "conedensity/"
SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"

KINDS = ("graph", "tamefn", "cx", "barcode", "cert", "record", "report")


class DocumentError(ValueError):
    """A malformed document; `path` points at the offending element."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"


def schema_tag(kind: str) -> str:
    return f"{SCHEMA_PREFIX}{kind}@{SCHEMA_VERSION}"


def dumps(doc: dict) -> str:
    """Canonical serialization: sorted keys, fixed separators, one trailing
    newline.  Byte-identical for equal documents."""
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def loads(text) -> dict:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError("", f"not UTF-8: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("", f"not JSON: {exc}")
    if not isinstance(doc, dict):
        raise DocumentError("", "top-level value must be an object")
    return doc


# ----------------------------------------------------------------------
# low-level field access with path tracking
# ----------------------------------------------------------------------


def _get(payload: dict, key: str, path: str) -> Any:
    if not isinstance(payload, dict):
        raise DocumentError(path, "expected an object")
    if key not in payload:
        raise DocumentError(path, f"missing field {key!r}")
    return payload[key]


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise DocumentError(path, "expected an array")
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise DocumentError(path, "expected a string")
    return value


def _int(value: Any, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise DocumentError(path, "expected an integer")
    return value


def _rat(value: Any, path: str) -> Val:
    if isinstance(value, bool) or isinstance(value, float):
        raise DocumentError(path, "numbers must be rational strings, not floats")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise DocumentError(path, "expected a rational string")
    try:
        return q(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(path, f"not a rational: {exc}")


def _finite(value: Any, path: str) -> Fraction:
    r = _rat(value, path)
    if not isinstance(r, Fraction):
        raise DocumentError(path, "must be finite")
    return r


def _check_schema(doc: dict, kind: str) -> dict:
    tag = _str(_get(doc, "schema", ""), "/schema")
    if tag != schema_tag(kind):
        raise DocumentError("/schema", f"expected {schema_tag(kind)!r}, got {tag!r}")
    return doc


# ----------------------------------------------------------------------
# graphs and graph points
# ----------------------------------------------------------------------


def graph_payload(g: MetricGraph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [{"a": u, "b": v, "len": fmt(L)} for u, v, L in g.edges],
    }


def parse_graph_payload(payload: Any, path: str) -> MetricGraph:
    verts = _list(_get(payload, "vertices", path), f"{path}/vertices")
    names = [_str(v, f"{path}/vertices/{i}") for i, v in enumerate(verts)]
    edges = []
    for i, e in enumerate(_list(_get(payload, "edges", path), f"{path}/edges")):
        ep = f"{path}/edges/{i}"
        u = _str(_get(e, "a", ep), f"{ep}/a")
        v = _str(_get(e, "b", ep), f"{ep}/b")
        L = _finite(_get(e, "len", ep), f"{ep}/len")
        if L <= 0:
            raise DocumentError(f"{ep}/len", "edge length must be positive")
        edges.append((u, v, L))
    try:
        return MetricGraph(tuple(names), tuple(edges))
    except GraphError as exc:
        raise DocumentError(path, str(exc))


def graph_doc(g: MetricGraph) -> dict:
    return {"schema": schema_tag("graph"), **graph_payload(g)}


def parse_graph(doc: dict) -> MetricGraph:
    return parse_graph_payload(_check_schema(doc, "graph"), "")


def point_payload(p: GraphPoint) -> dict:
    if p.kind == "v":
        return {"at": "vertex", "vertex": p.vertex}
    return {"at": "edge", "edge": p.edge, "offset": fmt(p.offset)}


def parse_point_payload(payload: Any, g: MetricGraph, path: str) -> GraphPoint:
    kind = _str(_get(payload, "at", path), f"{path}/at")
    if kind == "vertex":
        name = _str(_get(payload, "vertex", path), f"{path}/vertex")
        if name not in g.vertices:
            raise DocumentError(f"{path}/vertex", f"unknown vertex {name!r}")
        return GraphPoint.V(name)
    if kind == "edge":
        e = _int(_get(payload, "edge", path), f"{path}/edge")
        if not 0 <= e < len(g.edges):
            raise DocumentError(f"{path}/edge", f"edge {e} does not exist")
        off = _finite(_get(payload, "offset", path), f"{path}/offset")
        if not 0 <= off <= g.edges[e][2]:
            raise DocumentError(f"{path}/offset", "offset outside the edge")
        return g.point(e, off)
    raise DocumentError(f"{path}/at", "must be 'vertex' or 'edge'")


# ----------------------------------------------------------------------
# tame functions
# ----------------------------------------------------------------------


def fn_payload(f: TameFunction) -> dict:
    profiles = []
    for pr in f.profiles:
        profiles.append({
            "breaks": [[fmt(x), fmt(v)] for x, v in pr.breaks],
            "gaps": [None if gap is None else [fmt(gap[0]), fmt(gap[1])]
                     for gap in pr.gaps],
        })
    return {
        "vertex_values": [fmt(v) for v in f.vertex_values],
        "profiles": profiles,
    }


def parse_fn_payload(payload: Any, g: MetricGraph, path: str) -> TameFunction:
    vals = _list(_get(payload, "vertex_values", path), f"{path}/vertex_values")
    if len(vals) != len(g.vertices):
        raise DocumentError(f"{path}/vertex_values",
                            f"expected {len(g.vertices)} values, got {len(vals)}")
    vv = tuple(_rat(v, f"{path}/vertex_values/{i}") for i, v in enumerate(vals))
    profs = _list(_get(payload, "profiles", path), f"{path}/profiles")
    if len(profs) != len(g.edges):
        raise DocumentError(f"{path}/profiles",
                            f"expected {len(g.edges)} profiles, got {len(profs)}")
    profiles = []
    for e, pp in enumerate(profs):
        pe = f"{path}/profiles/{e}"
        breaks = []
        for k, br in enumerate(_list(_get(pp, "breaks", pe), f"{pe}/breaks")):
            bp = f"{pe}/breaks/{k}"
            br = _list(br, bp)
            if len(br) != 2:
                raise DocumentError(bp, "expected [offset, value]")
            breaks.append((_finite(br[0], f"{bp}/0"), _finite(br[1], f"{bp}/1")))
        gaps = []
        for k, gp in enumerate(_list(_get(pp, "gaps", pe), f"{pe}/gaps")):
            gp_path = f"{pe}/gaps/{k}"
            if gp is None:
                gaps.append(None)
                continue
            gp = _list(gp, gp_path)
            if len(gp) != 2:
                raise DocumentError(gp_path, "expected [limit_lo, limit_hi] or null")
            gaps.append((_finite(gp[0], f"{gp_path}/0"),
                         _finite(gp[1], f"{gp_path}/1")))
        if len(gaps) != len(breaks) + 1:
            raise DocumentError(f"{pe}/gaps",
                                f"expected {len(breaks) + 1} gaps, got {len(gaps)}")
        profiles.append(EdgeProfile(tuple(breaks), tuple(gaps)))
    fn = TameFunction(g, vv, tuple(profiles))
    try:
        fn.validate()
    except TameError as exc:
        raise DocumentError(path, str(exc))
    return fn


def tamefn_doc(f: TameFunction) -> dict:
    return {"schema": schema_tag("tamefn"), "graph": graph_payload(f.graph),
            "fn": fn_payload(f)}


def parse_tamefn(doc: dict) -> TameFunction:
    _check_schema(doc, "tamefn")
    g = parse_graph_payload(_get(doc, "graph", ""), "/graph")
    return parse_fn_payload(_get(doc, "fn", ""), g, "/fn")


# ----------------------------------------------------------------------
# twisted complexes
# ----------------------------------------------------------------------


def cx_payload(cx: TwistedComplex) -> dict:
    return {
        "graph": graph_payload(cx.graph),
        "generators": [{"degree": gen.degree, "fn": fn_payload(gen.fn)}
                       for gen in cx.gens],
        "differential": [sorted(gf2.bits(col)) for col in cx.diff],
    }


def parse_cx_payload(payload: Any, path: str) -> TwistedComplex:
    g = parse_graph_payload(_get(payload, "graph", path), f"{path}/graph")
    gens = []
    for k, gp in enumerate(_list(_get(payload, "generators", path),
                                 f"{path}/generators")):
        gpath = f"{path}/generators/{k}"
        deg = _int(_get(gp, "degree", gpath), f"{gpath}/degree")
        fn = parse_fn_payload(_get(gp, "fn", gpath), g, f"{gpath}/fn")
        gens.append(Generator(fn, deg))
    cols = []
    diff = _list(_get(payload, "differential", path), f"{path}/differential")
    if len(diff) != len(gens):
        raise DocumentError(f"{path}/differential",
                            f"expected {len(gens)} columns, got {len(diff)}")
    for j, col in enumerate(diff):
        cpath = f"{path}/differential/{j}"
        mask = 0
        for k, i in enumerate(_list(col, cpath)):
            i = _int(i, f"{cpath}/{k}")
            if not 0 <= i < len(gens):
                raise DocumentError(f"{cpath}/{k}",
                                    f"references missing generator {i}")
            mask |= 1 << i
        cols.append(mask)
    cx = TwistedComplex(g, tuple(gens), tuple(cols))
    try:
        cx.validate()
    except ComplexError as exc:
        raise DocumentError(path, str(exc))
    return cx


def cx_doc(cx: TwistedComplex) -> dict:
    return {"schema": schema_tag("cx"), **cx_payload(cx)}


def parse_cx(doc: dict) -> TwistedComplex:
    return parse_cx_payload(_check_schema(doc, "cx"), "")


# ----------------------------------------------------------------------
# barcodes
# ----------------------------------------------------------------------


def barcode_payload(bc: Barcode) -> dict:
    return {"bars": [{"degree": b.degree, "birth": fmt(b.birth),
                      "death": fmt(b.death)} for b in bc.bars]}


def parse_barcode_payload(payload: Any, path: str) -> Barcode:
    bars = []
    for k, bp in enumerate(_list(_get(payload, "bars", path), f"{path}/bars")):
        bpath = f"{path}/bars/{k}"
        deg = _int(_get(bp, "degree", bpath), f"{bpath}/degree")
        birth = _finite(_get(bp, "birth", bpath), f"{bpath}/birth")
        death = _rat(_get(bp, "death", bpath), f"{bpath}/death")
        if death != INF and death <= birth:
            raise DocumentError(f"{bpath}/death", "death must exceed birth")
        bars.append(Bar(deg, birth, death))
    return Barcode.make(bars)


def barcode_doc(bc: Barcode) -> dict:
    return {"schema": schema_tag("barcode"), **barcode_payload(bc)}


def parse_barcode(doc: dict) -> Barcode:
    return parse_barcode_payload(_check_schema(doc, "barcode"), "")


# ----------------------------------------------------------------------
# chain maps and certificates
# ----------------------------------------------------------------------


def _map_payload(m: ChainMap) -> dict:
    return {"cols": [sorted(gf2.bits(col)) for col in m.cols], "shift": m.shift}


def _parse_cols(payload: Any, n_src: int, n_dst: int, path: str) -> Tuple[int, ...]:
    cols = []
    lst = _list(_get(payload, "cols", path), f"{path}/cols")
    if len(lst) != n_src:
        raise DocumentError(f"{path}/cols",
                            f"expected {n_src} columns, got {len(lst)}")
    for j, col in enumerate(lst):
        cpath = f"{path}/cols/{j}"
        mask = 0
        for k, i in enumerate(_list(col, cpath)):
            i = _int(i, f"{cpath}/{k}")
            if not 0 <= i < n_dst:
                raise DocumentError(f"{cpath}/{k}",
                                    f"references missing generator {i}")
            mask |= 1 << i
        cols.append(mask)
    return tuple(cols)


def certificate_payload(cert: Certificate) -> dict:
    return {
        "a": fmt(cert.a),
        "b": fmt(cert.b),
        "source": cx_payload(cert.source),
        "target": cx_payload(cert.target),
        "u": _map_payload(cert.u),
        "v": _map_payload(cert.v),
        "h_src": _map_payload(cert.h_src),
        "h_dst": _map_payload(cert.h_dst),
    }


def parse_certificate_payload(payload: Any, path: str) -> Certificate:
    a = _finite(_get(payload, "a", path), f"{path}/a")
    b = _finite(_get(payload, "b", path), f"{path}/b")
    src = parse_cx_payload(_get(payload, "source", path), f"{path}/source")
    dst = parse_cx_payload(_get(payload, "target", path), f"{path}/target")
    s = a + b

    def load_map(key: str, m_src: TwistedComplex, m_dst: TwistedComplex,
                 shift_expected: int) -> ChainMap:
        mp = _get(payload, key, path)
        mpath = f"{path}/{key}"
        shift = _int(_get(mp, "shift", mpath), f"{mpath}/shift")
        if shift != shift_expected:
            raise DocumentError(f"{mpath}/shift",
                                f"expected shift {shift_expected}, got {shift}")
        cols = _parse_cols(mp, m_src.n(), m_dst.n(), mpath)
        return ChainMap(m_src, m_dst, cols, shift=shift)

    u = load_map("u", src, dst.translate(a), 0)
    v = load_map("v", dst, src.translate(b), 0)
    h_src = load_map("h_src", src, src.translate(s), -1)
    h_dst = load_map("h_dst", dst, dst.translate(s), -1)
    return Certificate(a, b, u, v, h_src, h_dst)


def certificate_doc(cert: Certificate) -> dict:
    return {"schema": schema_tag("cert"), **certificate_payload(cert)}


def parse_certificate(doc: dict) -> Certificate:
    return parse_certificate_payload(_check_schema(doc, "cert"), "")


# ----------------------------------------------------------------------
# replayable decompositions
# ----------------------------------------------------------------------


def gabriel_payload(gab: GabrielCertificate) -> dict:
    return {
        "levels": [fmt(x) for x in gab.source.levels],
        "degrees": list(gab.source.degrees),
        "cols": [sorted(gf2.bits(c)) for c in gab.source.cols],
        "order": list(gab.order),
        "canonical_cols": [sorted(gf2.bits(c)) for c in gab.canonical.cols],
        "psi": [sorted(gf2.bits(c)) for c in gab.psi],
        "barcode": barcode_payload(gab.barcode),
    }


def parse_gabriel_payload(payload: Any, path: str) -> GabrielCertificate:
    levels = tuple(_finite(x, f"{path}/levels/{i}") for i, x in
                   enumerate(_list(_get(payload, "levels", path), f"{path}/levels")))
    degrees = tuple(_int(x, f"{path}/degrees/{i}") for i, x in
                    enumerate(_list(_get(payload, "degrees", path), f"{path}/degrees")))
    n = len(levels)

    def masks(key: str, count: int) -> Tuple[int, ...]:
        out = []
        lst = _list(_get(payload, key, path), f"{path}/{key}")
        if len(lst) != count:
            raise DocumentError(f"{path}/{key}", f"expected {count} entries")
        for j, col in enumerate(lst):
            mask = 0
            for k, i in enumerate(_list(col, f"{path}/{key}/{j}")):
                i = _int(i, f"{path}/{key}/{j}/{k}")
                if not 0 <= i < n:
                    raise DocumentError(f"{path}/{key}/{j}/{k}",
                                        f"references missing generator {i}")
                mask |= 1 << i
            out.append(mask)
        return tuple(out)

    cols = masks("cols", n)
    order_lst = _list(_get(payload, "order", path), f"{path}/order")
    order = tuple(_int(x, f"{path}/order/{i}") for i, x in enumerate(order_lst))
    if sorted(order) != list(range(n)):
        raise DocumentError(f"{path}/order", "not a permutation")
    can_cols = masks("canonical_cols", n)
    psi = masks("psi", n)
    src = LeveledComplex(levels, degrees, cols)
    lv = tuple(levels[j] for j in order)
    dg = tuple(degrees[j] for j in order)
    canonical = LeveledComplex(lv, dg, can_cols)
    barcode = parse_barcode_payload(_get(payload, "barcode", path),
                                    f"{path}/barcode")
    return GabrielCertificate(source=src, order=order, canonical=canonical,
                              psi=psi, barcode=barcode)


# ----------------------------------------------------------------------
# records: labeled bundles of replayable evidence
# ----------------------------------------------------------------------


def record_doc(kind: str, certificates: Sequence[Tuple[str, Certificate]],
               decompositions: Sequence[Tuple[str, GabrielCertificate]] = (),
               extra: Optional[dict] = None) -> dict:
    doc = {
        "schema": schema_tag("record"),
        "kind": kind,
        "certificates": [{"label": lbl, "certificate": certificate_payload(c)}
                         for lbl, c in certificates],
        "decompositions": [{"label": lbl, "decomposition": gabriel_payload(g)}
                           for lbl, g in decompositions],
    }
    if extra:
        doc["extra"] = extra
    return doc


def parse_record(doc: dict) -> Tuple[str, List[Tuple[str, Certificate]],
                                     List[Tuple[str, GabrielCertificate]]]:
    _check_schema(doc, "record")
    kind = _str(_get(doc, "kind", ""), "/kind")
    certs = []
    for k, item in enumerate(_list(_get(doc, "certificates", ""),
                                   "/certificates")):
        p = f"/certificates/{k}"
        lbl = _str(_get(item, "label", p), f"{p}/label")
        certs.append((lbl, parse_certificate_payload(
            _get(item, "certificate", p), f"{p}/certificate")))
    decomps = []
    for k, item in enumerate(_list(doc.get("decompositions", []),
                                   "/decompositions")):
        p = f"/decompositions/{k}"
        lbl = _str(_get(item, "label", p), f"{p}/label")
        decomps.append((lbl, parse_gabriel_payload(
            _get(item, "decomposition", p), f"{p}/decomposition")))
    return kind, certs, decomps


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------


def _attempts_payload(attempts) -> list:
    return [[fmt(a), fmt(b), status] for a, b, status in attempts]


def distance_report_doc(source: TwistedComplex, target: TwistedComplex,
                        rep: DistanceReport, command: str) -> dict:
    payload: Dict[str, Any] = {
        "schema": schema_tag("report"),
        "kind": "distance",
        "version": TOOL_VERSION,
        "replay": command,
        "source": cx_payload(source),
        "target": cx_payload(target),
        "lower": fmt(rep.lower),
        "upper": fmt(rep.upper),
        "exact": rep.exact,
        "evaluations": _attempts_payload(rep.evaluations),
        "undecided": rep.undecided,
    }
    if rep.certificate is not None:
        payload["certificate"] = certificate_payload(rep.certificate)
    return payload


def density_report_doc(rep, command: str) -> dict:
    """Serialize a DensityReport with every replayable certificate embedded."""
    stalk = []
    for label, group in (("star", rep.star_models), ("overlap", rep.overlap_models)):
        for k, sr in enumerate(group):
            stalk.append({
                "layer": label,
                "index": k,
                "center": point_payload(sr.center),
                "radius": fmt(sr.radius),
                "barcode": barcode_payload(sr.barcode),
                "attempts": _attempts_payload(sr.attempts),
                "certificate": certificate_payload(sr.certificate),
                "decomposition": gabriel_payload(sr.gabriel),
            })
    doc: Dict[str, Any] = {
        "schema": schema_tag("report"),
        "kind": "densify",
        "version": TOOL_VERSION,
        "replay": command,
        "epsilon": fmt(rep.epsilon),
        "input": cx_payload(rep.source),
        "output": cx_payload(rep.output),
        "generators": [{**point_payload(g.basepoint), "level": fmt(g.level),
                        "degree": g.degree} for g in rep.generators],
        "layers": [list(layer) for layer in rep.layers],
        "certified": fmt(rep.certified),
        "budget": fmt(rep.budget),
        "certificate": certificate_payload(rep.certificate),
        "measured": {
            "lower": fmt(rep.measured.lower),
            "upper": fmt(rep.measured.upper),
            "exact": rep.measured.exact,
        },
        "stages": {
            "refine": {
                "mesh": fmt(rep.epsilon),
                "vertices": len(rep.refined.graph.vertices),
                "edges": len(rep.refined.graph.edges),
            },
            "cover": {
                "stars": 0 if rep.cover is None else len(rep.cover.stars),
                "pairs": 0 if rep.cover is None else len(rep.cover.pairs),
                "nerve_kept": list(rep.nerve_kept),
            },
            "cech": {
                "checked_points": ([] if rep.tower is None else
                                   [point_payload(p) for p in rep.tower.checked_points]),
            },
            "stalk": stalk,
            "anchor": {"attempts": _attempts_payload(rep.anchor_attempts)},
        },
    }
    return doc


def parse_report(doc: dict) -> dict:
    """Validate the envelope of a report document and return it unchanged."""
    _check_schema(doc, "report")
    kind = _str(_get(doc, "kind", ""), "/kind")
    if kind not in ("distance", "densify", "decompose", "irdim"):
        raise DocumentError("/kind", f"unknown report kind {kind!r}")
    return doc


# ----------------------------------------------------------------------
# replay: verify everything a document carries
# ----------------------------------------------------------------------


def replay_document(doc: dict) -> List[str]:
    """Re-verify every certificate and decomposition embedded in a document.

    Returns the labels of the checks that ran; raises CertificateError (or a
    subclass) on the first failure, DocumentError on malformed input.
    """
    tag = _str(_get(doc, "schema", ""), "/schema")
    checked: List[str] = []
    if tag == schema_tag("cert"):
        cert = parse_certificate(doc)
        cert.verify()
        checked.append("certificate")
        return checked
    if tag == schema_tag("record"):
        kind, certs, decomps = parse_record(doc)
        for lbl, cert in certs:
            cert.verify()
            checked.append(lbl)
        for lbl, gab in decomps:
            gab.verify()
            checked.append(lbl)
        return checked
    if tag == schema_tag("report"):
        doc = parse_report(doc)
        kind = doc["kind"]
        if "certificate" in doc:
            cert = parse_certificate_payload(doc["certificate"], "/certificate")
            cert.verify()
            checked.append("main certificate")
            if kind == "densify":
                total = cert.total()
                certified = _finite(_get(doc, "certified", ""), "/certified")
                if total != certified:
                    raise DocumentError("/certified",
                                        f"certificate totals {fmt(total)}")
                budget = _finite(_get(doc, "budget", ""), "/budget")
                if total > budget:
                    raise DocumentError("/certified", "certificate exceeds budget")
                checked.append("budget")
        for k, item in enumerate(doc.get("items", [])):
            p = f"/items/{k}"
            if not isinstance(item, dict) or "certificate" not in item:
                continue
            cert = parse_certificate_payload(item["certificate"],
                                             f"{p}/certificate")
            cert.verify()
            checked.append(f"item[{k}]")
        stages = doc.get("stages", {})
        for k, item in enumerate(stages.get("stalk", [])):
            p = f"/stages/stalk/{k}"
            cert = parse_certificate_payload(_get(item, "certificate", p),
                                             f"{p}/certificate")
            cert.verify()
            gab = parse_gabriel_payload(_get(item, "decomposition", p),
                                        f"{p}/decomposition")
            gab.verify()
            bc = parse_barcode_payload(_get(item, "barcode", p), f"{p}/barcode")
            if bc.bars != gab.barcode.bars:
                raise DocumentError(f"{p}/barcode",
                                    "barcode does not match the decomposition")
            checked.append(f"stalk[{k}]")
        for k, item in enumerate(doc.get("decompositions", [])):
            p = f"/decompositions/{k}"
            gab = parse_gabriel_payload(_get(item, "decomposition", p),
                                        f"{p}/decomposition")
            gab.verify()
            checked.append(f"decomposition[{k}]")
        return checked
    raise DocumentError("/schema", f"cannot replay schema {tag!r}")
