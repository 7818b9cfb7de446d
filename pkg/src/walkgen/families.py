"""Lattice graphs whose relevant walks are classical lattice paths.

Vertices are integer points, joined when their Euclidean distance is at
most ``sqrt(2)``.  A step set ``K`` selects the allowed moves: ``M(v)[j1,
j2] = 1`` iff the walker arrived by a step in ``K`` and leaves by one.  The
external line ``e'`` feeds in along ``(1, 0)`` at the start and ``e`` leads
out along ``(1, 0)`` at the end.
"""

from __future__ import annotations

import numpy as np

from .graph import ExternalLine, InternalLine, MetricGraph
from .transition import TransitionCollection

STEPS = {
    "catalan": {(1, 0), (0, 1)},
    "schroeder": {(1, 0), (0, 1), (1, 1)},
    "dyck": {(1, 1), (1, -1)},
    "motzkin": {(1, 1), (1, -1), (1, 0)},
}

SOURCE, SINK = "e'", "e"


def vid(p) -> str:
    return f"({p[0]},{p[1]})"


def lattice_points(family: str, n: int):
    """Vertex set and the attachment points of ``e'`` and ``e``."""
    if family in ("catalan", "schroeder"):
        pts = [(x1, x2) for x1 in range(n + 1) for x2 in range(x1 + 1)]
        return pts, (0, 0), (n, n)
    pts = [(x1, x2) for x1 in range(n + 1) for x2 in range(n + 1)]
    return pts, (0, 0), (n, 0)


def lattice_graph(family: str, n: int, length: float = 1.0) -> MetricGraph:
    pts, start, end = lattice_points(family, n)
    internal = []
    for p in pts:
        for q in pts:
            if p < q and (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 <= 2:
                internal.append(InternalLine(f"{vid(p)}-{vid(q)}", vid(p), vid(q), length))
    external = [ExternalLine(SOURCE, vid(start)), ExternalLine(SINK, vid(end))]
    return MetricGraph([vid(p) for p in pts], internal, external)


def _point(v: str):
    x1, x2 = v.strip("()").split(",")
    return int(x1), int(x2)


def make_family(family: str, n: int, length: float = 1.0):
    """Lattice graph and 0/1 transition collection of a counting family.

    ``T[e, e'](0)`` counts the catalan, schroeder, dyck or motzkin paths of
    size ``n``.
    """
    family = family.lower().replace("ö", "oe")
    if family not in STEPS:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(STEPS)}")
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    K = STEPS[family]
    g = lattice_graph(family, n, length)
    mats = {}
    for v in g.vertices:
        star = g.star(v)
        here = _point(v)
        chi = []
        for j in star.edges:
            if j == SINK:
                chi.append((1, 0))
            elif j == SOURCE:
                chi.append((-1, 0))
            else:
                there = _point(g.other_end(j, v))
                chi.append((there[0] - here[0], there[1] - here[1]))
        d = star.degree
        m = np.zeros((d, d))
        for r, j1 in enumerate(star.edges):
            out_ok = chi[r] in K
            for c, j2 in enumerate(star.edges):
                in_ok = (-chi[c][0], -chi[c][1]) in K
                if family == "dyck" and j2 == SOURCE:
                    in_ok = True
                if family == "dyck" and j1 == SINK:
                    out_ok_here = True
                else:
                    out_ok_here = out_ok
                m[r, c] = 1.0 if (out_ok_here and in_ok) else 0.0
        mats[v] = m
    return g, TransitionCollection(g, mats)


def expected_count(family: str, n: int) -> int:
    """Reference counts from the classical recurrences."""
    if family == "catalan":
        from math import comb

        return comb(2 * n, n) // (n + 1)
    if family == "schroeder":
        S = [1]
        for m in range(1, n + 1):
            S.append(S[m - 1] + sum(S[k] * S[m - k - 1] for k in range(m)))
        return S[n]
    if family == "motzkin":
        M = [1, 1]
        for m in range(2, n + 1):
            M.append(M[m - 1] + sum(M[k] * M[m - k - 2] for k in range(m - 1)))
        return M[n]
    if family == "dyck":
        if n % 2:
            return 0
        from math import comb

        h = n // 2
        return comb(2 * h, h) // (h + 1)
    raise ValueError(family)
