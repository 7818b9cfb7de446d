"""Random and hand-built instances shared by the test modules."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import strategies as st

from walkgen import ExternalLine, InternalLine, MetricGraph, TransitionCollection, build_graph
from walkgen.chain import VertexChain

SEG_SPEC = {
    "vertices": ["v0", "v1"],
    "internal": [{"id": "i", "from": "v0", "to": "v1", "length": 1.0}],
    "external": [{"id": "e'", "at": "v0"}, {"id": "e", "at": "v1"}],
}


def seg(length=1.0):
    spec = dict(SEG_SPEC)
    spec["internal"] = [{"id": "i", "from": "v0", "to": "v1", "length": length}]
    return build_graph(spec)


def seg_mc(g, t0=1, r0=0, r0p=1, t0p=0, t1=0.5, r1=0.5, t1p=0.5, r1p=0.5):
    """SEG amplitudes: at v0 ``t0: e'->i``, ``r0: e'->e'``, ``r0p: i->i``,
    ``t0p: i->e'``; at v1 ``t1: i->e``, ``r1: i->i``, ``t1p: e->i``,
    ``r1p: e->e``.  Defaults give the stochastic instance (p=1/2, q=1)."""
    return TransitionCollection.from_entries(
        g,
        {
            "v0": {("i", "e'"): t0, ("e'", "e'"): r0, ("i", "i"): r0p, ("e'", "i"): t0p},
            "v1": {("e", "i"): t1, ("i", "i"): r1, ("i", "e"): t1p, ("e", "e"): r1p},
        },
    )


def seg_closed(beta, a=1.0):
    x = math.exp(-beta * a)
    return 0.5 * x / (1 - 0.5 * x * x)


def single_vertex(m):
    g = MetricGraph(["v"], [], [ExternalLine("e", "v"), ExternalLine("e'", "v")])
    return g, TransitionCollection(g, {"v": np.asarray(m, dtype=complex)})


def random_graph(rng, max_vertices=4, max_internal=6, max_external=3, min_internal=1, lengths=(0.5, 2.0),
                 simple=False):
    """Connected graph with random multi-edges, orientations and lengths."""
    nv = int(rng.integers(2, max_vertices + 1))
    verts = [f"v{k}" for k in range(nv)]
    ni = int(rng.integers(max(min_internal, nv - 1), max(max_internal, nv - 1) + 1))
    pairs = []
    # spanning tree first
    order = list(rng.permutation(nv))
    for k in range(1, nv):
        pairs.append((order[k], order[int(rng.integers(0, k))]))
    while len(pairs) < ni:
        u, w = rng.choice(nv, size=2, replace=False)
        if simple and ({u, w} in [set(p) for p in pairs]):
            if len(pairs) >= nv * (nv - 1) // 2:
                break
            continue
        pairs.append((int(u), int(w)))
    internal = []
    for n, (u, w) in enumerate(pairs):
        if rng.random() < 0.5:
            u, w = w, u
        internal.append(InternalLine(f"i{n}", verts[u], verts[w], float(rng.uniform(*lengths))))
    ne = int(rng.integers(1, max_external + 1))
    external = [ExternalLine(f"e{n}", verts[int(rng.integers(0, nv))]) for n in range(ne)]
    return MetricGraph(verts, internal, external)


def random_complex_mc(rng, g, norm_max=1.5):
    mats = {}
    for v in g.vertices:
        d = g.degree(v)
        mats[v] = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    target = float(rng.uniform(0.3, norm_max))
    scale = max(np.linalg.norm(m, 2) for m in mats.values())
    return TransitionCollection(g, {v: m * target / scale for v, m in mats.items()})


def random_hermitian_mc(rng, g, norm=(0.2, 1.2)):
    mats = {}
    for v in g.vertices:
        d = g.degree(v)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = (a + a.conj().T) / 2
        mats[v] = h * float(rng.uniform(*norm)) / np.linalg.norm(h, 2)
    return TransitionCollection(g, mats)


def random_symmetric_mc(rng, g):
    mats = {}
    for v in g.vertices:
        d = g.degree(v)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        mats[v] = 0.4 * (a + a.T) / np.linalg.norm(a + a.T, 2)
    return TransitionCollection(g, mats)


def random_stochastic_mc(rng, g, leak=0.2):
    """Column-stochastic matrices whose external rows carry at least ``leak``
    of the mass where an external line is present."""
    mats = {}
    for v in g.vertices:
        d = g.degree(v)
        m = rng.uniform(0.05, 1.0, size=(d, d))
        m /= m.sum(axis=0, keepdims=True)
        mats[v] = m
    return TransitionCollection(g, mats)


def random_chain(rng, max_vertices=6):
    nv = int(rng.integers(2, max_vertices + 1))
    verts = [f"u{k}" for k in range(nv)]
    edges = set()
    order = list(rng.permutation(nv))
    for k in range(1, nv):
        edges.add(frozenset((order[k], order[int(rng.integers(0, k))])))
    extra = int(rng.integers(0, nv))
    for _ in range(extra):
        u, w = rng.choice(nv, size=2, replace=False)
        edges.add(frozenset((int(u), int(w))))
    lines = []
    for n, e in enumerate(sorted(tuple(sorted(e)) for e in edges)):
        u, w = e
        if rng.random() < 0.5:
            u, w = w, u
        lines.append((f"l{n}", verts[u], verts[w]))
    P = np.zeros((nv, nv))
    for _, u, w in lines:
        a, b = verts.index(u), verts.index(w)
        P[a, b] = rng.uniform(0.1, 1.0)
        P[b, a] = rng.uniform(0.1, 1.0)
    P /= P.sum(axis=0, keepdims=True)
    return VertexChain(verts, lines, P)


def choose_nmax_for_tail(tail_fn, target, nmax_cap=40):
    for n in range(nmax_cap + 1):
        if tail_fn(n) <= target:
            return n
    return None


@st.composite
def graphs(draw, max_vertices=4, max_internal=6):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph(np.random.default_rng(seed), max_vertices, max_internal)


seeds = st.integers(0, 2**32 - 1)


def spread_hermitian(rng, d):
    """Hermitian matrix with eigenvalues of both signs in ``0.4 <= |mu| <= 0.95``.

    Eigenvalues near ``+-1`` make the induced vertex scattering matrices
    transmit; a small-norm Hermitian ``M`` gives almost total reflection.
    """
    q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    mu = rng.uniform(0.4, 0.95, size=d) * np.where(np.arange(d) % 2, -1, 1)
    return (q * mu) @ q.conj().T


def transmitting_seg(rng, k, beta=1.0, max_reflection=0.9):
    """SEG with Hermitian ``M(v)`` whose internal round-trip reflection
    ``|S_v0(k)[i,i] S_v1(k)[i,i]|`` is at most ``max_reflection``.

    The walk coefficients of ``S`` decay like that product, which controls
    the aliasing error of an equispaced quadrature.
    """
    from walkgen.scattering import bc_from_M, vertex_S_collection

    while True:
        g = seg(float(rng.uniform(0.5, 2)))
        mc = TransitionCollection(g, {v: spread_hermitian(rng, 2) for v in g.vertices})
        Sv = vertex_S_collection(g, bc_from_M(mc, beta), k)
        if abs(Sv.entry("v0", "i", "i") * Sv.entry("v1", "i", "i")) <= max_reflection:
            return g, mc
