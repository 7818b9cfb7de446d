"""Vertex Markov chains and the edge model.

A nearest-neighbour chain ``P`` on a compact graph becomes an edge model by
puncturing one vertex ``v_inf``: its lines turn into external lines at the
neighbours, and a walker at ``v`` leaves along the line towards ``v'`` with
probability ``P(v', v)`` whatever line it came in on (equal columns).
Conversely an equal-columns edge model defines a chain on ``V + {v_inf}``
that re-enters the graph uniformly over the external lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ColumnsNotEqual,
    DanglingReference,
    DisconnectedGraph,
    IsolatedRemainder,
    MultiEdge,
    NotNormalized,
    NotStochastic,
    TadpoleEdge,
    UnknownVertex,
)
from .graph import ExternalLine, InternalLine, MetricGraph
from .transition import TransitionCollection, classify

TOL = 1e-12


@dataclass(frozen=True)
class ChainLine:
    id: str
    u: str
    w: str


class VertexChain:
    """Column-stochastic nearest-neighbour chain: ``P[v', v]`` is the
    probability of stepping from ``v`` to ``v'``."""

    def __init__(self, vertices, lines, P, *, check: bool = True):
        self.vertices = tuple(vertices)
        self.lines = tuple(sorted((ChainLine(*l) if not isinstance(l, ChainLine) else l for l in lines),
                                  key=lambda l: l.id))
        self.P = np.array(P, dtype=float)
        self.index = {v: n for n, v in enumerate(self.vertices)}
        n = len(self.vertices)
        if self.P.shape != (n, n):
            raise ValueError(f"P has shape {self.P.shape}, expected {(n, n)}")
        pairs = set()
        for l in self.lines:
            for v in (l.u, l.w):
                if v not in self.index:
                    raise DanglingReference(f"line {l.id!r} references unknown vertex {v!r}")
            if l.u == l.w:
                raise TadpoleEdge(f"line {l.id!r} is a tadpole")
            key = frozenset((l.u, l.w))
            if key in pairs:
                raise MultiEdge(f"more than one line joins {l.u!r} and {l.w!r}")
            pairs.add(key)
        self._pairs = pairs
        if check:
            self.validate()

    def adjacent(self, u, w) -> bool:
        return frozenset((u, w)) in self._pairs

    def neighbours(self, v):
        out = []
        for l in self.lines:
            if l.u == v:
                out.append((l, l.w))
            elif l.w == v:
                out.append((l, l.u))
        return out

    def validate(self):
        if np.any(self.P < -TOL):
            raise NotStochastic("P has negative entries")
        sums = self.P.sum(axis=0)
        if not np.allclose(sums, 1.0, rtol=0, atol=1e-12):
            raise NotStochastic(f"columns of P do not sum to 1: {sums}")
        for a, v in enumerate(self.vertices):
            for b, vp in enumerate(self.vertices):
                if self.P[b, a] != 0 and not self.adjacent(v, vp):
                    raise NotStochastic(f"P({vp!r}, {v!r}) > 0 but the vertices are not adjacent")

    def p(self, vp, v) -> float:
        return self.P[self.index[vp], self.index[v]]


def chain_to_edge_model(chain: VertexChain, v_inf: str, lengths: dict | None = None):
    """Puncture ``chain`` at ``v_inf``.

    Returns ``(graph, collection)``.  Lines at ``v_inf`` keep their ids as
    external lines; internal lines get length 1 unless ``lengths`` says
    otherwise.  The remainder may fall apart into several components; each
    must keep at least one external line.
    """
    if v_inf not in chain.index:
        raise UnknownVertex(f"unknown vertex {v_inf!r}")
    lengths = lengths or {}
    verts = [v for v in chain.vertices if v != v_inf]
    if not verts:
        raise IsolatedRemainder("puncturing leaves no vertices")
    internal, external = [], []
    for l in chain.lines:
        if v_inf in (l.u, l.w):
            other = l.w if l.u == v_inf else l.u
            external.append(ExternalLine(l.id, other))
        else:
            internal.append(InternalLine(l.id, l.u, l.w, float(lengths.get(l.id, 1.0))))
    if not external:
        raise IsolatedRemainder(f"{v_inf!r} has no neighbours")
    try:
        g = MetricGraph(verts, internal, external, require_connected=False)
    except DisconnectedGraph as exc:
        raise IsolatedRemainder(str(exc)) from None
    except DanglingReference as exc:
        raise IsolatedRemainder(str(exc)) from None
    mats = {}
    for v in g.vertices:
        star = g.star(v)
        col = np.empty(star.degree)
        for r, j in enumerate(star.edges):
            if g.is_external(j):
                col[r] = chain.p(v_inf, v)
            else:
                col[r] = chain.p(g.other_end(j, v), v)
        mats[v] = np.repeat(col[:, None], star.degree, axis=1)
    return g, TransitionCollection(g, mats)


def edge_model_to_chain(g: MetricGraph, mc: TransitionCollection, v_inf: str = "v_inf") -> VertexChain:
    """Vertex chain of an equal-columns edge model.

    External lines become lines to the new vertex ``v_inf``, from which the
    chain re-enters uniformly: ``P(v', v_inf) = 1/|E|``.
    """
    if v_inf in g.vertices:
        raise ValueError(f"{v_inf!r} is already a vertex")
    if not classify(mc).columns_equal:
        raise ColumnsNotEqual("transition matrices must have equal columns")
    for v in g.vertices:
        s = mc[v][:, 0].sum()
        if abs(s - 1) > TOL or np.any(np.abs(mc[v].imag) > TOL) or np.any(mc[v].real < -TOL):
            raise NotNormalized(f"column of M({v!r}) is not a probability vector (sum {s})")
    seen = set()
    for i in g.internal:
        key = frozenset((i.initial, i.terminal))
        if key in seen:
            raise MultiEdge(f"more than one internal line joins {i.initial!r} and {i.terminal!r}")
        seen.add(key)
    at = [e.vertex for e in g.external]
    if len(set(at)) != len(at):
        raise MultiEdge("a vertex carries more than one external line")
    vertices = tuple(g.vertices) + (v_inf,)
    idx = {v: n for n, v in enumerate(vertices)}
    P = np.zeros((len(vertices),) * 2)
    for v in g.vertices:
        star = g.star(v)
        col = mc[v][:, 0].real
        for r, j in enumerate(star.edges):
            target = v_inf if g.is_external(j) else g.other_end(j, v)
            P[idx[target], idx[v]] = col[r]
    for e in g.external:
        P[idx[e.vertex], idx[v_inf]] = 1.0 / len(g.external)
    lines = [ChainLine(i.id, i.initial, i.terminal) for i in g.internal]
    lines += [ChainLine(e.id, e.vertex, v_inf) for e in g.external]
    return VertexChain(vertices, lines, P)
