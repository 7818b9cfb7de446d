"""JSON file formats and CSV output.

Graph files::

    {"vertices": [...],
     "internal": [{"id", "from", "to", "length"}, ...],
     "external": [{"id", "at"}, ...],
     "matrices": {v: {"order": [edge ids], "entries": [[...], ...]}}}

Matrix entries are ``[re, im]`` pairs or bare numbers.  Floats are written
with ``repr`` so every value reads back bit-exactly.
"""

from __future__ import annotations

import csv
import io as _io
import json
import re
from pathlib import Path

import numpy as np

from .chain import VertexChain
from .errors import GraphError
from .graph import MetricGraph, build_graph
from .scattering import BoundaryConditions, local_bc
from .transition import TransitionCollection


def parse_entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise GraphError(f"complex entry must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return parse_complex(x)
    return complex(float(x), 0.0)


def parse_matrix(rows) -> np.ndarray:
    return np.array([[parse_entry(x) for x in row] for row in rows], dtype=complex)


def encode_entry(z: complex):
    z = complex(z)
    return [z.real, z.imag] if z.imag else z.real


def encode_matrix(m) -> list:
    return [[encode_entry(z) for z in row] for row in np.asarray(m)]


def parse_complex(s: str) -> complex:
    """Parse ``a``, ``a+bi``, ``bi``, ``-i`` or the prefix form ``i1.0``."""
    t = s.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?)[ij]([0-9.]+(?:[eE][+-]?\d+)?)", t)
    if m:
        val = float(m.group(2))
        return complex(0.0, -val if m.group(1) == "-" else val)
    t = t.replace("i", "j")
    # bare unit: "j", "-j", "2+j"
    t = re.sub(r"(^|[+-])j$", r"\g<1>1j", t)
    try:
        return complex(t)
    except ValueError:
        raise ValueError(f"cannot parse complex number {s!r}") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or np.isnan(z.imag) else '-'}{abs(z.imag)!r}i"


# -- graphs --------------------------------------------------------------


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def graph_from_record(rec) -> tuple[MetricGraph, TransitionCollection | None]:
    g = build_graph(rec)
    mats = rec.get("matrices")
    if mats is None:
        return g, None
    blocks = {}
    for v, blk in mats.items():
        order = blk.get("order") or list(g.star(v).edges)
        blocks[v] = (order, parse_matrix(blk["entries"]))
    return g, TransitionCollection.from_ordered(g, blocks)


def load_graph(path) -> tuple[MetricGraph, TransitionCollection | None]:
    return graph_from_record(read_json(path))


def graph_record(g: MetricGraph, mc: TransitionCollection | None = None) -> dict:
    rec = {
        "vertices": list(g.vertices),
        "internal": [{"id": i.id, "from": i.initial, "to": i.terminal, "length": i.length} for i in g.internal],
        "external": [{"id": e.id, "at": e.vertex} for e in g.external],
    }
    if not g.require_connected:
        rec["allow_disconnected"] = True
    if mc is not None:
        rec["matrices"] = {
            v: {"order": list(g.star(v).edges), "entries": encode_matrix(mc[v])} for v in g.vertices
        }
    return rec


def dumps(rec) -> str:
    return json.dumps(rec, indent=2, ensure_ascii=False) + "\n"


def save_graph(path, g, mc=None):
    Path(path).write_text(dumps(graph_record(g, mc)), encoding="utf-8")


# -- chains --------------------------------------------------------------


def chain_from_record(rec) -> VertexChain:
    try:
        vertices = list(rec["vertices"])
        lines = [(str(r["id"]), str(r["from"]), str(r["to"])) for r in rec.get("internal", [])]
        Pblk = rec["P"]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed chain description: {exc}") from None
    order = list(Pblk.get("order", vertices))
    P = np.array([[float(x) for x in row] for row in Pblk["entries"]])
    if sorted(order) != sorted(vertices):
        raise GraphError("P order is not a permutation of the vertices")
    perm = [order.index(v) for v in vertices]
    return VertexChain(vertices, lines, P[np.ix_(perm, perm)])


def chain_record(chain: VertexChain) -> dict:
    return {
        "vertices": list(chain.vertices),
        "internal": [{"id": l.id, "from": l.u, "to": l.w} for l in chain.lines],
        "P": {"order": list(chain.vertices), "entries": [[float(x) for x in row] for row in chain.P]},
    }


def load_chain(path) -> VertexChain:
    return chain_from_record(read_json(path))


# -- boundary conditions and penalties ----------------------------------


def bc_from_record(g: MetricGraph, rec) -> BoundaryConditions:
    """``{v: {"order", "A", "B"}}`` (optionally under a ``"bc"`` key)."""
    rec = rec.get("bc", rec)
    blocks = {}
    for v in g.vertices:
        blk = rec[v]
        order = list(blk.get("order") or g.star(v).edges)
        perm = [order.index(j) for j in g.star(v).edges]
        A = parse_matrix(blk["A"])[np.ix_(perm, perm)]
        B = parse_matrix(blk["B"])[np.ix_(perm, perm)]
        blocks[v] = (A, B)
    return local_bc(g, blocks)


def penalties_from_record(g: MetricGraph, rec):
    """``{"a": {line: value}, "b": {line: value}}``; ``a`` defaults to the lengths."""
    a = g.lengths.copy()
    b = a.copy()
    for key, vec in (("a", a), ("b", b)):
        for j, val in rec.get(key, {}).items():
            vec[g.internal_index[j]] = float(val)
    if "b" not in rec:
        b = a.copy()
    return a, b


# -- CSV -----------------------------------------------------------------


def fmt(x: float) -> str:
    """17 significant digits; reads back to the same double."""
    return format(float(x), ".17g")


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()
