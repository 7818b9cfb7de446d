"""Per-vertex transition matrices and the global matrix on boundary slots.

``M(v)[j1, j2]`` is the amplitude for a walker arriving at ``v`` along
``j2`` to leave along ``j1`` (columns are *incoming* edges).  Rows and
columns follow the canonical star order of ``v``.

The boundary space has one slot per external line followed by two slots
per internal line, one at its initial vertex and one at its terminal vertex
(blocks sorted by edge id).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ShapeMismatch, UnknownVertex
from .graph import MetricGraph

EXTERNAL, MINUS, PLUS = "E", "-", "+"


@dataclass(frozen=True)
class Flags:
    stochastic: bool
    combinatorial: bool
    symmetric: bool
    hermitian: bool
    columns_equal: bool


class TransitionCollection:
    """Immutable collection ``{M(v)}`` of complex matrices on a graph."""

    def __init__(self, g: MetricGraph, matrices: Mapping[str, object]):
        self.graph = g
        mats = {}
        for v in g.vertices:
            if v not in matrices:
                raise ShapeMismatch(f"no transition matrix for vertex {v!r}")
            m = np.array(matrices[v], dtype=complex)
            d = g.degree(v)
            if m.shape != (d, d):
                raise ShapeMismatch(f"M({v!r}) has shape {m.shape}, expected {(d, d)}")
            m.setflags(write=False)
            mats[v] = m
        extra = set(matrices) - set(g.vertices)
        if extra:
            raise UnknownVertex(f"matrices given for unknown vertices {sorted(extra)}")
        self._mats = mats

    @classmethod
    def from_entries(cls, g: MetricGraph, entries: Mapping[str, Mapping[tuple[str, str], complex]]):
        """Build from sparse ``{v: {(j_out, j_in): value}}``; missing entries are 0."""
        mats = {}
        for v in g.vertices:
            star = g.star(v)
            m = np.zeros((star.degree, star.degree), dtype=complex)
            for (j1, j2), val in entries.get(v, {}).items():
                m[star.index(j1), star.index(j2)] = val
            mats[v] = m
        unknown = set(entries) - set(g.vertices)
        if unknown:
            raise UnknownVertex(f"entries given for unknown vertices {sorted(unknown)}")
        return cls(g, mats)

    @classmethod
    def from_ordered(cls, g: MetricGraph, blocks: Mapping[str, tuple[Sequence[str], object]]):
        """Build from ``{v: (order, matrix)}`` with an arbitrary edge order per vertex.

        ``order`` must be a permutation of the star of ``v``; the matrix is
        re-permuted into canonical star order.
        """
        mats = {}
        for v, (order, m) in blocks.items():
            if v not in g.vertices:
                raise UnknownVertex(f"unknown vertex {v!r}")
            star = g.star(v)
            order = list(order)
            if sorted(order) != sorted(star.edges) or len(order) != star.degree:
                raise ShapeMismatch(f"order for {v!r} is not a permutation of its star {list(star.edges)}")
            m = np.array(m, dtype=complex)
            if m.shape != (star.degree, star.degree):
                raise ShapeMismatch(f"M({v!r}) has shape {m.shape}, expected {(star.degree,) * 2}")
            perm = [order.index(j) for j in star.edges]
            mats[v] = m[np.ix_(perm, perm)]
        return cls(g, mats)

    @classmethod
    def constant(cls, g: MetricGraph, value: complex = 0.0):
        return cls(g, {v: np.full((g.degree(v),) * 2, value, dtype=complex) for v in g.vertices})

    def __getitem__(self, v: str) -> np.ndarray:
        return self._mats[v]

    def __iter__(self):
        return iter(self._mats)

    def items(self):
        return self._mats.items()

    def entry(self, v: str, j_out: str, j_in: str) -> complex:
        star = self.graph.star(v)
        return self._mats[v][star.index(j_out), star.index(j_in)]

    def replace(self, v: str, m) -> "TransitionCollection":
        mats = dict(self._mats)
        mats[v] = m
        return TransitionCollection(self.graph, mats)

    def map(self, f: Callable[[str, np.ndarray], np.ndarray]) -> "TransitionCollection":
        return TransitionCollection(self.graph, {v: f(v, m) for v, m in self._mats.items()})

    def on_graph(self, g: MetricGraph) -> "TransitionCollection":
        """Same matrices on a graph with identical topology (e.g. new lengths)."""
        return TransitionCollection(g, self._mats)

    @property
    def flags(self) -> Flags:
        return classify(self)

    def is_real(self) -> bool:
        return all(not np.any(m.imag) for m in self._mats.values())


def classify(mc: TransitionCollection, tol: float = 1e-12) -> Flags:
    mats = [mc[v] for v in mc]
    stochastic = all(
        np.all(np.abs(m.imag) <= tol)
        and np.all(m.real >= -tol)
        and np.allclose(m.real.sum(axis=0), 1.0, rtol=0, atol=tol)
        for m in mats
    )
    combinatorial = all(np.all((m == 0) | (m == 1)) for m in mats)
    symmetric = all(np.allclose(m, m.T, rtol=0, atol=tol) for m in mats)
    hermitian = all(np.allclose(m, m.conj().T, rtol=0, atol=tol) for m in mats)
    columns_equal = all(np.allclose(m, m[:, :1], rtol=0, atol=tol) for m in mats)
    return Flags(stochastic, combinatorial, symmetric, hermitian, columns_equal)


def matrix_norm_max(mc: TransitionCollection) -> float:
    """``max_v ||M(v)||`` in the operator 2-norm."""
    return max(float(np.linalg.norm(mc[v], 2)) for v in mc)


# -- the boundary space --------------------------------------------------


@dataclass(frozen=True)
class Slot:
    edge: str
    kind: str  # EXTERNAL, MINUS or PLUS
    vertex: str


def slots(g: MetricGraph) -> list[Slot]:
    """Basis of the boundary space: externals, initial ends, terminal ends."""
    out = [Slot(e.id, EXTERNAL, e.vertex) for e in g.external]
    out += [Slot(i.id, MINUS, i.initial) for i in g.internal]
    out += [Slot(i.id, PLUS, i.terminal) for i in g.internal]
    return out


def slot_of(g: MetricGraph, edge: str, v: str) -> int:
    """Index of the slot where ``edge`` meets vertex ``v``."""
    nE, nI = len(g.external), len(g.internal)
    if g.is_external(edge):
        return g.external_index[edge]
    line = g.internal_line(edge)
    k = g.internal_index[edge]
    if line.initial == v:
        return nE + k
    if line.terminal == v:
        return nE + nI + k
    raise ShapeMismatch(f"edge {edge!r} is not incident with {v!r}")


def vertex_slots(g: MetricGraph, v: str) -> list[int]:
    """Global slot indices of the star of ``v`` in canonical order."""
    return [slot_of(g, j, v) for j in g.star(v).edges]


def dimension(g: MetricGraph) -> int:
    return len(g.external) + 2 * len(g.internal)


def scatter_blocks(g: MetricGraph, blocks: Mapping[str, np.ndarray]) -> np.ndarray:
    """Place per-vertex ``deg(v) x deg(v)`` blocks into a ``d x d`` matrix."""
    d = dimension(g)
    out = np.zeros((d, d), dtype=complex)
    for v in g.vertices:
        idx = vertex_slots(g, v)
        out[np.ix_(idx, idx)] = blocks[v]
    return out


@dataclass(frozen=True)
class BigM:
    matrix: np.ndarray
    slots: tuple[Slot, ...]
    n_external: int
    n_internal: int

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def assemble_big_m(g: MetricGraph, mc: TransitionCollection) -> BigM:
    if mc.graph is not g and (mc.graph.vertices != g.vertices or mc.graph.internal_ids != g.internal_ids):
        raise ShapeMismatch("transition collection belongs to a different graph")
    for v in g.vertices:
        if mc[v].shape != (g.degree(v),) * 2:
            raise ShapeMismatch(f"M({v!r}) does not match deg({v!r})")
    m = scatter_blocks(g, {v: mc[v] for v in g.vertices})
    m.setflags(write=False)
    return BigM(m, tuple(slots(g)), len(g.external), len(g.internal))
