"""Brute-force walk enumeration and the truncated walk series.

This module is the ground truth the closed forms are checked against, so it
never merges walks: every walk is generated, weighted and summed on its own.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import NoInternalLines, UnknownEdge, WalkgenError
from .graph import MetricGraph, Walk, make_walk
from .transition import TransitionCollection, matrix_norm_max, vertex_slots

# Hard cap on simultaneously tracked partial walks in series_T.
MAX_FRONTIER = 4_000_000


@dataclass
class WalkSeriesResult:
    value: np.ndarray
    nmax: int
    tail_bound: float
    walk_count: int
    external_ids: tuple[str, ...]
    terms: np.ndarray | None = None  # contribution of each comb length, shape (nmax+1, E, E)

    def __getitem__(self, pair):
        e, ep = pair
        return self.value[self.external_ids.index(e), self.external_ids.index(ep)]


def enumerate_walks(g: MetricGraph, source: str, sink: str, nmax: int) -> list[Walk]:
    """All walks from ``source`` to ``sink`` with at most ``nmax`` traversals.

    Ordered by combinatorial length, then lexicographically by edge sequence.
    """
    for e in (source, sink):
        if not g.is_external(e):
            raise UnknownEdge(f"{e!r} is not an external line")
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    target = g.attachment(sink)
    found: list[tuple[str, ...]] = []

    def dfs(v, path):
        if v == target:
            found.append(tuple(path))
        if len(path) == nmax:
            return
        for j in g.star(v).edges:
            if g.is_internal(j):
                path.append(j)
                dfs(g.other_end(j, v), path)
                path.pop()

    dfs(g.attachment(source), [])
    found.sort(key=lambda p: (len(p), p))
    return [make_walk(g, source, p, sink) for p in found]


def walk_weight(g: MetricGraph, mc: TransitionCollection, w: Walk) -> complex:
    """Product of transition amplitudes along ``w`` (no length penalty)."""
    seq = (w.source, *w.edges, w.sink)
    out = 1.0 + 0j
    for k, v in enumerate(w.vertices):
        out *= mc.entry(v, seq[k + 1], seq[k])
    return out


def walk_penalty(g: MetricGraph, w: Walk, a, b=None) -> float:
    """Sum of direction-dependent penalties along ``w``.

    A traversal from the initial to the terminal vertex costs ``a[i]``; the
    opposite direction costs ``b[i]`` (``b`` defaults to ``a``).
    """
    a = np.asarray(a, dtype=float)
    b = a if b is None else np.asarray(b, dtype=float)
    total = 0.0
    for k, i in enumerate(w.edges):
        line = g.internal_line(i)
        idx = g.internal_index[i]
        total += a[idx] if w.vertices[k] == line.initial else b[idx]
    return total


def score_coefficients(g: MetricGraph, mc: TransitionCollection, source: str, sink: str, nmax: int) -> dict:
    """``{score: sum of weights of walks with that score}`` for ``|score| <= nmax``.

    Scores are tuples aligned with ``g.internal_ids``; a score is present iff
    at least one walk has it.
    """
    out: dict[tuple[int, ...], complex] = defaultdict(complex)
    for w in enumerate_walks(g, source, sink, nmax):
        out[w.score] += walk_weight(g, mc, w)
    return dict(out)


def beta0_bound(g: MetricGraph, mc: TransitionCollection) -> float:
    """Abscissa beyond which the walk series converges absolutely."""
    if not g.internal:
        raise NoInternalLines("no internal lines: the generating function is a finite sum")
    m = matrix_norm_max(mc)
    if m == 0:
        return -math.inf
    return (math.log(m) + math.log(len(g.internal))) / g.a_min


def geometric_tail(m: float, q: float, nmax: int) -> float:
    """``sum_{N > nmax} m^(N+1) q^N`` (infinite unless ``m q < 1``)."""
    r = m * q
    if m == 0 or q == 0:
        return 0.0
    if r >= 1:
        return math.inf
    return m * r ** (nmax + 1) / (1 - r)


def _frontier_sum(g, mc, forward, backward, nmax, relevant_only):
    """Sum walk weights level by level.

    ``forward[i]`` multiplies a traversal of line ``i`` from its initial to
    its terminal vertex, ``backward[i]`` the opposite direction.  Returns the
    per-length contributions (shape ``(nmax+1, E, E)``) and the number of
    complete walks generated.
    """
    nE, nI = len(g.external), len(g.internal)
    d = nE + 2 * nI
    # per incoming slot: outgoing slots at the same vertex with amplitudes
    out_slots = [None] * d
    out_amp = [None] * d
    for v in g.vertices:
        idx = vertex_slots(g, v)
        m = mc[v]
        for c, s in enumerate(idx):
            out_slots[s] = np.array(idx)
            out_amp[s] = m[:, c]
    width = max(len(x) for x in out_slots)
    table_slot = np.full((d, width), -1, dtype=np.int64)
    table_amp = np.zeros((d, width), dtype=complex)
    for s in range(d):
        table_slot[s, : len(out_slots[s])] = out_slots[s]
        table_amp[s, : len(out_amp[s])] = out_amp[s]

    # crossing an internal slot: leaving from the initial end (slot nE+k)
    # arrives at the terminal end (slot nE+nI+k) and vice versa
    partner = np.arange(d)
    factor = np.ones(d, dtype=complex)
    for k in range(nI):
        partner[nE + k] = nE + nI + k
        partner[nE + nI + k] = nE + k
        factor[nE + k] = forward[k]
        factor[nE + nI + k] = backward[k]

    terms = np.zeros((nmax + 1, nE, nE), dtype=complex)
    count = 0
    state = np.arange(nE)  # walker sits at this incoming slot
    source = np.arange(nE)
    weight = np.ones(nE, dtype=complex)
    for n in range(nmax + 1):
        if state.size == 0:
            break
        nxt = table_slot[state]  # (F, width)
        amp = table_amp[state] * weight[:, None]
        valid = nxt >= 0
        exits = valid & (nxt < nE)
        if relevant_only:
            exits &= amp != 0
        count += int(exits.sum())
        np.add.at(terms[n], (nxt[exits], np.broadcast_to(source[:, None], nxt.shape)[exits]), amp[exits])
        if n == nmax:
            break
        cont = valid & (nxt >= nE)
        if relevant_only:
            cont &= amp != 0
        if cont.sum() > MAX_FRONTIER:
            raise WalkgenError(f"walk enumeration exceeds {MAX_FRONTIER} partial walks at length {n + 1}")
        leave = nxt[cont]
        weight = amp[cont] * factor[leave]
        state = partner[leave]
        source = np.broadcast_to(source[:, None], nxt.shape)[cont]
    return terms, count


def series_T(
    g: MetricGraph,
    mc: TransitionCollection,
    beta: complex,
    nmax: int,
    *,
    relevant_only: bool = False,
) -> WalkSeriesResult:
    """Truncated generating function ``sum_w W(w) exp(-beta |w|)``.

    Walks with more than ``nmax`` traversals are dropped; ``tail_bound``
    bounds every entry of the dropped remainder.  With ``relevant_only``
    zero-weight prefixes are pruned (exact, and much faster for sparse
    collections) and ``walk_count`` then counts relevant walks only.
    """
    decay = np.exp(-complex(beta) * g.lengths)
    terms, count = _frontier_sum(g, mc, decay, decay, nmax, relevant_only)
    return WalkSeriesResult(
        terms.sum(axis=0), nmax, _tail(g, mc, beta, nmax), count, g.external_ids, terms
    )


def series_T_directed(g, mc, beta, nmax, a, b, *, relevant_only=False) -> WalkSeriesResult:
    """Walk series with penalty ``a[i]`` initial->terminal and ``b[i]`` back."""
    beta = complex(beta)
    fwd = np.exp(-beta * np.asarray(a, dtype=float))
    bwd = np.exp(-beta * np.asarray(b, dtype=float))
    terms, count = _frontier_sum(g, mc, fwd, bwd, nmax, relevant_only)
    amin = min(np.min(a), np.min(b)) if len(g.internal) else math.inf
    q = len(g.internal) * math.exp(-beta.real * amin) if g.internal else 0.0
    tail = geometric_tail(matrix_norm_max(mc), q, nmax)
    return WalkSeriesResult(terms.sum(axis=0), nmax, tail, count, g.external_ids, terms)


def _tail(g, mc, beta, nmax):
    if not g.internal:
        return 0.0
    q = len(g.internal) * math.exp(-complex(beta).real * g.a_min)
    return geometric_tail(matrix_norm_max(mc), q, nmax)


def boundary_limit(g: MetricGraph, mc: TransitionCollection) -> np.ndarray:
    """Large-``beta`` limit: ``M(v)[e, e']`` for externals sharing ``v``, else 0."""
    nE = len(g.external)
    out = np.zeros((nE, nE), dtype=complex)
    for a, e in enumerate(g.external):
        for b, ep in enumerate(g.external):
            if e.vertex == ep.vertex:
                out[a, b] = mc.entry(e.vertex, e.id, ep.id)
    return out


__all__ = [
    "WalkSeriesResult",
    "beta0_bound",
    "boundary_limit",
    "enumerate_walks",
    "geometric_tail",
    "score_coefficients",
    "series_T",
    "series_T_directed",
    "walk_penalty",
    "walk_weight",
]
