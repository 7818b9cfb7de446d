import math

import numpy as np
import pytest
from hypothesis import given, settings

from walkgen import build_graph, TransitionCollection
from walkgen.errors import NoInternalLines, UnknownEdge
from walkgen.families import make_family
from walkgen.walks import (
    beta0_bound,
    boundary_limit,
    enumerate_walks,
    geometric_tail,
    score_coefficients,
    series_T,
    walk_penalty,
    walk_weight,
)

from instances import (
    random_complex_mc,
    random_graph,
    random_stochastic_mc,
    random_symmetric_mc,
    seeds,
    seg,
    seg_closed,
    seg_mc,
    single_vertex,
)
from test_graph import ONE_EXT

SYMS = dict(t0=2, r0=3, r0p=5, t0p=7, t1=11, r1=13, t1p=17, r1p=19)


def naive_series(g, mc, beta, nmax):
    """Independent oracle: DFS enumeration, one walk at a time."""
    out = np.zeros((len(g.external),) * 2, dtype=complex)
    for b, ep in enumerate(g.external_ids):
        for a, e in enumerate(g.external_ids):
            for w in enumerate_walks(g, ep, e, nmax):
                out[a, b] += walk_weight(g, mc, w) * np.exp(-beta * w.metric_length)
    return out


def test_enumerate_seg():
    ws = enumerate_walks(seg(), "e'", "e", 3)
    assert [w.edges for w in ws] == [("i",), ("i", "i", "i")]
    assert enumerate_walks(seg(), "e'", "e", 0) == []


def test_enumerate_one_external():
    g = build_graph(ONE_EXT)
    assert [w.edges for w in enumerate_walks(g, "e", "e", 2)] == [(), ("i", "i")]


def test_enumerate_order():
    g = build_graph(
        {
            "vertices": ["a", "b"],
            "internal": [{"id": "q", "from": "a", "to": "b", "length": 1}, {"id": "p", "from": "b", "to": "a", "length": 1}],
            "external": [{"id": "x", "at": "a"}, {"id": "y", "at": "b"}],
        }
    )
    ws = enumerate_walks(g, "x", "y", 3)
    edges = [w.edges for w in ws]
    assert edges == sorted(edges, key=lambda p: (len(p), p))
    assert len(edges) == 2 + 8


def test_unknown_edge():
    with pytest.raises(UnknownEdge):
        enumerate_walks(seg(), "e'", "i", 3)


def test_walk_weights_seg():
    g = seg()
    mc = seg_mc(g, **SYMS)
    w1, w3 = enumerate_walks(g, "e'", "e", 3)
    assert walk_weight(g, mc, w1) == 11 * 2
    assert walk_weight(g, mc, w3) == 11 * 5 * 13 * 2


def test_trivial_walk_weight():
    g, mc = single_vertex([[1, 2], [3, 4]])
    (w,) = enumerate_walks(g, "e'", "e", 0)
    # order (e, e'): M[e, e'] = 2
    assert w.is_trivial and walk_weight(g, mc, w) == 2


def test_series_seg_stochastic():
    g = seg()
    mc = seg_mc(g)
    r = series_T(g, mc, 0.5, 41)
    assert abs(r["e", "e'"] - seg_closed(0.5)) <= r.tail_bound
    # m = sqrt(2) at v0, q = exp(-1/2)
    m, q = math.sqrt(2), math.exp(-0.5)
    assert r.tail_bound == pytest.approx(m * (m * q) ** 42 / (1 - m * q))


def test_series_zero_collection():
    g = seg()
    r = series_T(g, TransitionCollection.constant(g, 0), 0.3, 5)
    assert not r.value.any()
    assert r.walk_count == sum(len(enumerate_walks(g, a, b, 5)) for a in g.external_ids for b in g.external_ids)


def test_series_catalan4():
    g, mc = make_family("catalan", 4)
    r = series_T(g, mc, 0.0, 8, relevant_only=True)
    assert r["e", "e'"] == 14
    assert r["e", "e"] == r["e'", "e"] == r["e'", "e'"] == 0


def test_score_coefficients_seg():
    g = seg()
    mc = seg_mc(g, **SYMS)
    c = score_coefficients(g, mc, "e'", "e", 4)
    assert c == {(1,): 22, (3,): 11 * 5 * 13 * 2}
    c = score_coefficients(g, mc, "e'", "e'", 4)
    # e' meets itself at v0, so the trivial walk is present with weight r0
    assert c[(0,)] == 3
    assert c[(2,)] == 7 * 13 * 2


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_score_count_bound(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, max_vertices=3, max_internal=3)
    counts = {}
    for ep in g.external_ids:
        for e in g.external_ids:
            for w in enumerate_walks(g, ep, e, 5):
                key = (ep, e, w.score)
                counts[key] = counts.get(key, 0) + 1
    for (_, _, n), c in counts.items():
        bound = math.factorial(sum(n)) // math.prod(math.factorial(x) for x in n)
        assert c <= bound


def test_beta0():
    g = seg()
    with pytest.raises(NoInternalLines):
        beta0_bound(*single_vertex(np.eye(2)))
    mc = TransitionCollection(g, {"v0": np.eye(2), "v1": [[0, 1], [1, 0]]})
    assert beta0_bound(g, mc) == 0
    mc = seg_mc(g)
    m = max(np.linalg.svd(mc[v], compute_uv=False)[0] for v in g.vertices)
    assert beta0_bound(g, mc) == pytest.approx(math.log(m))
    for beta in (beta0_bound(g, mc) + 1e-3, 1.0, 3.0):
        assert series_T(g, mc, beta, 10).tail_bound < math.inf


def test_beta0_catalan4():
    # max block norm of the 0/1 Catalan matrices is 2 (rank one, 2x2 ones)
    g, mc = make_family("catalan", 4)
    assert beta0_bound(g, mc) == pytest.approx(math.log(2 * 36), rel=1e-12)


def test_geometric_tail():
    assert geometric_tail(1.0, 0.5, 3) == pytest.approx(sum(0.5**n for n in range(4, 200)))
    assert geometric_tail(2.0, 0.6, 3) == math.inf
    assert geometric_tail(0.0, 5.0, 3) == 0.0


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_frontier_matches_dfs_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, max_vertices=3, max_internal=4)
    mc = random_complex_mc(rng, g)
    beta = complex(rng.uniform(0, 2), rng.uniform(-3, 3))
    fast = series_T(g, mc, beta, 4)
    assert np.allclose(fast.value, naive_series(g, mc, beta, 4), rtol=1e-12, atol=1e-14)
    pruned = series_T(g, mc, beta, 4, relevant_only=True)
    assert np.allclose(fast.value, pruned.value, rtol=1e-12, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_time_reversal_partial_sums(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng)
    mc = random_symmetric_mc(rng, g)
    r = series_T(g, mc, complex(rng.uniform(0, 2), rng.uniform(-2, 2)), 5)
    for n in range(r.terms.shape[0]):
        assert np.allclose(r.terms[n], r.terms[n].T, rtol=1e-12, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_large_beta_limit(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng)
    mc = random_complex_mc(rng, g)
    m = max(np.linalg.norm(mc[v], 2) for v in g.vertices)
    beta = beta0_bound(g, mc) + 3 + rng.uniform(0, 5)
    r = series_T(g, mc, beta, 6)
    nE = len(g.external)
    bound = r.tail_bound + nE**2 * m**2 * math.exp(-beta * g.a_min)
    assert np.abs(r.value - boundary_limit(g, mc)).max() <= bound


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_monotone_in_beta(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng)
    mc = random_stochastic_mc(rng, g)
    b1 = rng.uniform(0, 2)
    b2 = b1 + rng.uniform(0, 2)
    lo = series_T(g, mc, b2, 5).value.real
    hi = series_T(g, mc, b1, 5).value.real
    assert np.all(lo <= hi + 1e-15)


def test_combinatorial_count_equals_relevant_walks():
    g, mc = make_family("schroeder", 2)
    relevant = [
        w for w in enumerate_walks(g, "e'", "e", 8) if walk_weight(g, mc, w) != 0
    ]
    assert len(relevant) == 6
    assert series_T(g, mc, 0.0, 8)["e", "e'"] == 6


def test_walk_penalty_directions():
    g = seg()
    (w,) = enumerate_walks(g, "e'", "e", 1)
    assert walk_penalty(g, w, [1.0], [2.0]) == 1.0
    (w,) = [x for x in enumerate_walks(g, "e'", "e'", 2) if x.edges]
    assert walk_penalty(g, w, [1.0], [2.0]) == 3.0
