"""Finite non-compact metric graphs and walks on them.

A graph has vertices, directed internal lines ``i = (initial, terminal)``
with a positive length, and external lines (half-lines) attached to a
single vertex.  Ids are opaque strings.  Every per-vertex quantity is
indexed by the *canonical star order*: external lines first, then internal
lines, each group sorted by id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DanglingReference,
    DisconnectedGraph,
    DuplicateId,
    GraphError,
    NoExternalLines,
    NonpositiveLength,
    NotAWalk,
    TadpoleEdge,
    UnknownEdge,
)


@dataclass(frozen=True)
class InternalLine:
    id: str
    initial: str
    terminal: str
    length: float = 1.0


@dataclass(frozen=True)
class ExternalLine:
    id: str
    vertex: str


@dataclass(frozen=True)
class Star:
    """Edges incident with one vertex, in canonical star order."""

    vertex: str
    edges: tuple[str, ...]
    minus: frozenset[str]
    plus: frozenset[str]
    external: frozenset[str]

    @property
    def degree(self) -> int:
        return len(self.edges)

    def index(self, edge: str) -> int:
        return self.edges.index(edge)


class MetricGraph:
    """Immutable, validated non-compact metric graph.

    Parameters
    ----------
    vertices : iterable of str
    internal : iterable of InternalLine
    external : iterable of ExternalLine
    require_connected : bool
        When False, a disconnected graph is accepted as long as every
        component carries at least one external line.  Punctured vertex
        chains can fall apart this way; all closed-form formulas remain
        valid component-wise.
    """

    def __init__(
        self,
        vertices: Iterable[str],
        internal: Iterable[InternalLine],
        external: Iterable[ExternalLine],
        *,
        require_connected: bool = True,
    ):
        vertices = [str(v) for v in vertices]
        if len(set(vertices)) != len(vertices):
            raise DuplicateId("duplicate vertex id")
        internal = sorted(internal, key=lambda i: i.id)
        external = sorted(external, key=lambda e: e.id)
        ids = [i.id for i in internal] + [e.id for e in external]
        seen = set()
        for j in ids:
            if j in seen:
                raise DuplicateId(f"duplicate edge id {j!r}")
            seen.add(j)
        vset = set(vertices)
        for i in internal:
            for v in (i.initial, i.terminal):
                if v not in vset:
                    raise DanglingReference(f"internal line {i.id!r} references unknown vertex {v!r}")
            if i.initial == i.terminal:
                raise TadpoleEdge(f"internal line {i.id!r} is a tadpole at {i.initial!r}")
            a = float(i.length)
            if not math.isfinite(a) or a <= 0:
                raise NonpositiveLength(f"internal line {i.id!r} has length {i.length!r}")
        for e in external:
            if e.vertex not in vset:
                raise DanglingReference(f"external line {e.id!r} references unknown vertex {e.vertex!r}")
        if not external:
            raise NoExternalLines("graph needs at least one external line")

        self.vertices: tuple[str, ...] = tuple(sorted(vertices))
        self.internal: tuple[InternalLine, ...] = tuple(
            InternalLine(i.id, i.initial, i.terminal, float(i.length)) for i in internal
        )
        self.external: tuple[ExternalLine, ...] = tuple(external)
        self.require_connected = require_connected
        self._internal_by_id = {i.id: i for i in self.internal}
        self._external_by_id = {e.id: e for e in self.external}
        self.internal_ids: tuple[str, ...] = tuple(i.id for i in self.internal)
        self.external_ids: tuple[str, ...] = tuple(e.id for e in self.external)
        self.internal_index = {j: k for k, j in enumerate(self.internal_ids)}
        self.external_index = {j: k for k, j in enumerate(self.external_ids)}

        stars = {}
        for v in self.vertices:
            ext = [e.id for e in self.external if e.vertex == v]
            minus = [i.id for i in self.internal if i.initial == v]
            plus = [i.id for i in self.internal if i.terminal == v]
            edges = tuple(ext) + tuple(sorted(minus + plus))
            if not edges:
                raise DanglingReference(f"vertex {v!r} is not incident with any edge")
            stars[v] = Star(v, edges, frozenset(minus), frozenset(plus), frozenset(ext))
        self._stars = stars
        self._check_components()

    def _check_components(self):
        parent = {v: v for v in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for i in self.internal:
            parent[find(i.initial)] = find(i.terminal)
        roots = {find(v) for v in self.vertices}
        if len(roots) == 1:
            return
        if self.require_connected:
            raise DisconnectedGraph(f"graph has {len(roots)} connected components")
        with_external = {find(e.vertex) for e in self.external}
        bare = roots - with_external
        if bare:
            raise DisconnectedGraph(
                f"component containing {sorted(bare)[0]!r} has no external line"
            )

    # -- queries ---------------------------------------------------------

    @property
    def lengths(self) -> np.ndarray:
        """Lengths ``a_i`` in internal-id order."""
        return np.array([i.length for i in self.internal], dtype=float)

    @property
    def a_min(self) -> float:
        if not self.internal:
            return math.inf
        return min(i.length for i in self.internal)

    def star(self, v: str) -> Star:
        return self._stars[v]

    def degree(self, v: str) -> int:
        return self._stars[v].degree

    def is_external(self, j: str) -> bool:
        return j in self._external_by_id

    def is_internal(self, j: str) -> bool:
        return j in self._internal_by_id

    def internal_line(self, j: str) -> InternalLine:
        try:
            return self._internal_by_id[j]
        except KeyError:
            raise UnknownEdge(f"unknown internal line {j!r}") from None

    def attachment(self, e: str) -> str:
        """Vertex of an external line."""
        try:
            return self._external_by_id[e].vertex
        except KeyError:
            raise UnknownEdge(f"unknown external line {e!r}") from None

    def endpoints(self, j: str) -> tuple[str, ...]:
        if j in self._internal_by_id:
            i = self._internal_by_id[j]
            return (i.initial, i.terminal)
        if j in self._external_by_id:
            return (self._external_by_id[j].vertex,)
        raise UnknownEdge(f"unknown edge {j!r}")

    def other_end(self, i: str, v: str) -> str:
        line = self.internal_line(i)
        if line.initial == v:
            return line.terminal
        if line.terminal == v:
            return line.initial
        raise NotAWalk(f"internal line {i!r} is not incident with {v!r}")

    def with_lengths(self, lengths: Sequence[float] | Mapping[str, float]) -> "MetricGraph":
        """Copy of the graph with new internal lengths (same topology)."""
        if isinstance(lengths, Mapping):
            new = [lengths.get(i.id, i.length) for i in self.internal]
        else:
            new = list(lengths)
            if len(new) != len(self.internal):
                raise GraphError("length vector does not match the internal lines")
        internal = [InternalLine(i.id, i.initial, i.terminal, float(a)) for i, a in zip(self.internal, new)]
        return MetricGraph(self.vertices, internal, self.external, require_connected=self.require_connected)

    def __repr__(self):
        return (
            f"MetricGraph(|V|={len(self.vertices)}, |I|={len(self.internal)}, "
            f"|E|={len(self.external)})"
        )

    def __eq__(self, other):
        if not isinstance(other, MetricGraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.internal == other.internal
            and self.external == other.external
        )

    def __hash__(self):
        return hash((self.vertices, self.internal, self.external))


def build_graph(spec: Mapping) -> MetricGraph:
    """Build a graph from a description record.

    The record uses the file layout: ``vertices`` (list of ids), ``internal``
    (list of ``{id, from, to, length}``) and ``external`` (list of
    ``{id, at}``).  A ``matrices`` key, if present, is ignored here.
    """
    try:
        vertices = list(spec["vertices"])
        internal = [
            InternalLine(str(r["id"]), str(r["from"]), str(r["to"]), float(r.get("length", 1.0)))
            for r in spec.get("internal", [])
        ]
        external = [ExternalLine(str(r["id"]), str(r["at"])) for r in spec["external"]]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph description: {exc}") from None
    return MetricGraph(
        vertices,
        internal,
        external,
        require_connected=not spec.get("allow_disconnected", False),
    )


# -- walks ---------------------------------------------------------------


@dataclass(frozen=True)
class Walk:
    """A walk ``{source, i_1, ..., i_N, sink}`` with its derived data.

    ``score`` is aligned with ``MetricGraph.internal_ids``.
    """

    source: str
    edges: tuple[str, ...]
    sink: str
    vertices: tuple[str, ...]
    score: tuple[int, ...]
    metric_length: float

    @property
    def comb_length(self) -> int:
        return len(self.edges)

    @property
    def is_trivial(self) -> bool:
        return not self.edges

    def score_map(self, g: MetricGraph) -> dict[str, int]:
        return dict(zip(g.internal_ids, self.score))


def vertex_sequence(g: MetricGraph, w: Sequence[str]) -> list[str]:
    """Unique vertex sequence ``v_0..v_N`` of the edge sequence ``w``.

    ``w`` is the full sequence ``[e', i_1, ..., i_N, e]``.  Raises
    :class:`NotAWalk` if no consistent sequence exists.
    """
    if len(w) < 2:
        raise NotAWalk("a walk needs a source and a sink")
    source, *inner, sink = w
    for j in (source, sink):
        if not g.is_external(j):
            raise NotAWalk(f"{j!r} is not an external line")
    for j in inner:
        if not g.is_internal(j):
            raise NotAWalk(f"{j!r} is not an internal line")
    v = g.attachment(source)
    seq = [v]
    for i in inner:
        line = g.internal_line(i)
        if v == line.initial:
            v = line.terminal
        elif v == line.terminal:
            v = line.initial
        else:
            raise NotAWalk(f"line {i!r} does not continue from vertex {v!r}")
        seq.append(v)
    if g.attachment(sink) != v:
        raise NotAWalk(f"walk ends at {v!r} but {sink!r} is attached at {g.attachment(sink)!r}")
    return seq


def make_walk(g: MetricGraph, source: str, edges: Sequence[str], sink: str) -> Walk:
    edges = tuple(edges)
    vs = vertex_sequence(g, (source, *edges, sink))
    score = [0] * len(g.internal)
    for i in edges:
        score[g.internal_index[i]] += 1
    length = float(sum(g.internal_line(i).length for i in edges))
    return Walk(source, edges, sink, tuple(vs), tuple(score), length)


def reverse(g: MetricGraph, w: Walk) -> Walk:
    return make_walk(g, w.sink, w.edges[::-1], w.source)
