import math

import numpy as np
import pytest
from hypothesis import given, settings

from walkgen import eval_T, make_family
from walkgen.errors import NotStochastic, ZeroDenominator, ZeroEntry
from walkgen.families import vid
from walkgen.genfun import Resolvent
from walkgen.stats import (
    aggregate,
    length_report,
    mean_length,
    mean_reflections,
    mean_transitions,
    mean_traversals,
    mean_visits,
    reflections_report,
    simulate,
    transition_table,
    transitions_report,
    traversal_mu_derivative,
    traversals_report,
    visits_report,
)
from walkgen.transition import assemble_big_m
from walkgen.walks import beta0_bound, enumerate_walks, walk_weight

from instances import (
    random_complex_mc,
    random_graph,
    random_stochastic_mc,
    random_symmetric_mc,
    seeds,
    seg,
    seg_mc,
)

# one relevant walk e' -> i -> e, all other routes closed
SINGLE = dict(t0=1, r0=0, r0p=0, t0p=1, t1=1, r1=0, t1p=0, r1p=1)
LEAKY = dict(t0p=0.5, r0p=0.5)


def series_mean(g, mc, beta, e, ep, count, depth=60):
    """Direct walk sum of ``count(w)`` weighted by ``M(w) exp(-beta |w|)``."""
    num = den = 0.0
    for w in enumerate_walks(g, ep, e, depth):
        x = walk_weight(g, mc, w) * math.exp(-beta * w.metric_length)
        num += count(w) * x
        den += x
    return num / den


# -- SEG values -------------------------------------------------------------


def test_seg_means_at_zero():
    g = seg()
    mc = seg_mc(g)
    assert mean_length(g, mc, 0.0, "e", "e'") == pytest.approx(3, abs=1e-9)
    assert mean_visits(g, mc, 0.0, "e", "e'", "v1") == pytest.approx(2, abs=1e-9)
    assert mean_reflections(g, mc, 0.0, "e", "e'", "v1") == pytest.approx(1, abs=1e-9)
    assert mean_reflections(g, mc, 0.0, "e", "e'", "v0") == pytest.approx(1, abs=1e-9)
    assert mean_transitions(g, mc, 0.0, "e", "e'", "v1", "e", "i") == pytest.approx(1, abs=1e-9)
    assert mean_transitions(g, mc, 0.0, "e", "e'", "v1", "i", "i") == pytest.approx(1, abs=1e-9)
    assert mean_traversals(g, mc, 0.0, "i", "e", "e'") == pytest.approx(3, abs=1e-9)
    assert traversals_report(g, mc, 0.0, "i").method == "limit"


@pytest.mark.parametrize("length", [1.0, 2.5])
def test_seg_length_scales(length):
    g = seg(length)
    assert mean_length(g, seg_mc(g), 0.0, "e", "e'") == pytest.approx(3 * length, abs=1e-9)


def test_single_walk():
    g = seg()
    mc = seg_mc(g, **SINGLE)
    for beta in (0.0, 0.7, 3.0):
        assert mean_length(g, mc, beta, "e", "e'") == pytest.approx(1, abs=1e-12)
        assert mean_transitions(g, mc, beta, "e", "e'", "v0", "i", "e'") == pytest.approx(1, abs=1e-12)
        assert mean_visits(g, mc, beta, "e", "e'", "v1") == pytest.approx(1, abs=1e-12)
        assert mean_reflections(g, mc, beta, "e", "e'", "v1") == pytest.approx(0, abs=1e-12)
    for beta in (0.3, 2.0):
        assert mean_traversals(g, mc, beta, "i", "e", "e'") == pytest.approx(1, abs=1e-12)


def test_seg_traversals_match_series():
    g = seg()
    mc = seg_mc(g)
    exact = series_mean(g, mc, 0.2, "e", "e'", lambda w: len(w.edges))
    assert mean_traversals(g, mc, 0.2, "i", "e", "e'") == pytest.approx(exact, abs=1e-8)
    # continuity towards the beta = 0 limit
    assert mean_traversals(g, mc, 1e-3, "i", "e", "e'") == pytest.approx(3, abs=1e-2)


def test_catalan_means():
    g, mc = make_family("catalan", 4)
    assert mean_length(g, mc, 0.0, "e", "e'") == pytest.approx(8, abs=1e-9)
    assert mean_visits(g, mc, 0.0, "e", "e'", vid((0, 0))) == pytest.approx(1, abs=1e-9)


# -- errors -----------------------------------------------------------------


def test_zero_entry():
    g = seg()
    with pytest.raises(ZeroEntry):
        mean_transitions(g, seg_mc(g), 0.0, "e", "e'", "v0", "e'", "e'")


def test_zero_denominator():
    g = seg()
    mc = seg_mc(g)
    # T[e', e'](0) = 0: no walk returns to e'
    with pytest.raises(ZeroDenominator):
        mean_length(g, mc, 0.0, "e'", "e'")
    assert np.isnan(length_report(g, mc, 0.0).values[1, 1])


def test_not_stochastic():
    g = seg()
    with pytest.raises(NotStochastic):
        simulate(g, seg_mc(g, t1=0.9), "e'", samples=10)


# -- finite differences -----------------------------------------------------


def _instance(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, max_vertices=3, max_internal=4)
    mc = random_complex_mc(rng, g)
    beta = beta0_bound(g, mc) + 1 + rng.uniform(0, 1)
    return rng, g, mc, beta


def _T(g, mc, beta):
    return eval_T(g, mc, beta).value


def _fd(f, h):
    return (f(h) - f(-h)) / (2 * h)


def _derivatives(rng, g, mc, beta):
    """Pairs (analytic dT, f) where f(t) is T at perturbation parameter t."""
    v0 = g.vertices[int(rng.integers(len(g.vertices)))]
    star = g.star(v0)
    j0 = star.edges[int(rng.integers(star.degree))]
    k0 = star.edges[int(rng.integers(star.degree))]
    i0 = g.internal_ids[int(rng.integers(len(g.internal)))]
    a0 = g.internal_line(i0).length
    p, q = star.index(j0), star.index(k0)

    def lam(t):
        m = mc[v0].copy()
        m[p, q] *= math.exp(-t)
        return _T(g, mc.replace(v0, m), beta)

    def mu(t):
        lengths = dict(zip(g.internal_ids, g.lengths))
        lengths[i0] = a0 * math.exp(t)
        return _T(g.with_lengths(lengths), mc, beta)

    r = Resolvent(g, assemble_big_m(g, mc), beta)
    return [
        (length_report(g, mc, beta).dT, lambda t: _T(g, mc, beta + t)),
        (transitions_report(g, mc, beta, v0, j0, k0).dT, lam),
        (traversal_mu_derivative(r, g, i0), mu),
    ]


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_finite_difference(seed):
    rng, g, mc, beta = _instance(seed)
    for dT, f in _derivatives(rng, g, mc, beta):
        size = float(np.abs(f(0)).max())
        scale = float(np.abs(dT).max())
        if scale < 1e-3 * size:
            # cancellation floor eps |T| / (h |dT|) exceeds the relative target;
            # check the absolute error only
            assert np.abs(_fd(f, 1e-6) - dT).max() <= 1e-8 * size
            continue
        err = np.abs(_fd(f, 1e-6) - dT).max() / scale
        assert err <= 1e-5
        # order two: halving h quarters the truncation error
        e1 = np.abs(_fd(f, 1e-2) - dT).max() / scale
        e2 = np.abs(_fd(f, 5e-3) - dT).max() / scale
        if e1 > 1e-7:
            assert 3.5 <= e1 / e2 <= 4.5


# -- identities -------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_decomposition(seed):
    rng, g, mc, beta = _instance(seed)
    v0 = g.vertices[0]
    table = transition_table(g, mc, beta, v0)
    visits = visits_report(g, mc, beta, v0).values
    refl = reflections_report(g, mc, beta, v0).values
    ok = ~np.isnan(visits)
    assert np.allclose(table.sum(axis=(0, 1))[ok], visits[ok], rtol=1e-9, atol=1e-9)
    assert np.allclose(table.sum(axis=0).sum(axis=0)[ok], table.sum(axis=1).sum(axis=0)[ok])
    diag = np.trace(table, axis1=0, axis2=1)
    assert np.allclose(diag[ok], refl[ok], rtol=1e-9, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_length_is_weighted_traversals(seed):
    rng, g, mc, beta = _instance(seed)
    length = length_report(g, mc, beta).values
    total = sum(a * traversals_report(g, mc, beta, i).values for i, a in zip(g.internal_ids, g.lengths))
    ok = ~np.isnan(length)
    assert np.allclose(total[ok], length[ok], rtol=1e-8, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_exit_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng)
    mc = random_stochastic_mc(rng, g)
    T = _T(g, mc, 0.0)
    assert np.allclose(T.sum(axis=0), 1.0, atol=1e-10)


# -- aggregates -------------------------------------------------------------


def test_aggregate_single_nonzero_entry():
    g = seg()
    mc = seg_mc(g)
    rep = visits_report(g, mc, 0.0, "v1")
    assert aggregate(rep, "bullet_source", "e'") == pytest.approx(rep.value("e", "e'"), abs=1e-12)
    with pytest.raises(ZeroDenominator):
        aggregate(rep, "bullet_sink", "e'")
    with pytest.raises(ValueError):
        aggregate(rep, "sideways", "e")


def test_aggregate_matches_series():
    g = seg()
    mc = seg_mc(g, **LEAKY)
    rep = visits_report(g, mc, 0.0, "v1")
    num = den = 0.0
    for e in g.external_ids:
        for w in enumerate_walks(g, "e'", e, 60):
            x = walk_weight(g, mc, w)
            num += w.vertices.count("v1") * x
            den += x
    assert aggregate(rep, "bullet_source", "e'") == pytest.approx(num / den, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_aggregate_time_reversal(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng)
    mc = random_symmetric_mc(rng, g)
    rep = visits_report(g, mc, 0.5, g.vertices[0])
    for e in g.external_ids:
        try:
            src = aggregate(rep, "bullet_source", e)
        except ZeroDenominator:
            continue
        assert src == pytest.approx(aggregate(rep, "bullet_sink", e), rel=1e-9, abs=1e-12)


# -- Monte Carlo ------------------------------------------------------------


@pytest.fixture(scope="module")
def seg_sim():
    g = seg()
    return g, simulate(g, seg_mc(g), "e'", samples=100_000, seed=7)


def test_mc_seg(seg_sim):
    g, sim = seg_sim
    assert sim.censored == 0
    assert sim.exit_frequency("e") == (1.0, 0.0)
    for (m, se), exact in [
        (sim.mean_length("e"), 3),
        (sim.mean_visits("e", "v1"), 2),
        (sim.mean_traversals("e", "i"), 3),
    ]:
        assert abs(m - exact) <= 3 * se


def test_mc_leaky_exit_and_genfun():
    g = seg()
    mc = seg_mc(g, **LEAKY)
    sim = simulate(g, mc, "e'", beta=0.4, samples=100_000, seed=3, shards=4)
    for e in g.external_ids:
        f, se = sim.exit_frequency(e)
        assert abs(f - _T(g, mc, 0.0)[g.external_ids.index(e), 1].real) <= 3 * se
        G, se = sim.genfun(e)
        assert abs(G - _T(g, mc, 0.4)[g.external_ids.index(e), 1].real) <= 3 * se
    m, se = sim.mean_length("e")
    assert abs(m - mean_length(g, mc, 0.4, "e", "e'")) <= 3 * se


def test_mc_deterministic_walk():
    g = seg()
    sim = simulate(g, seg_mc(g, **SINGLE), "e'", samples=1000, seed=1)
    assert np.all(sim.raw.length == 1.0) and np.all(sim.raw.exit == 0)
    assert sim.mean_length("e") == (1.0, 0.0)


def test_mc_shards_independent_of_workers():
    g = seg()
    mc = seg_mc(g)
    a = simulate(g, mc, "e'", samples=5000, seed=9, shards=4, workers=1)
    b = simulate(g, mc, "e'", samples=5000, seed=9, shards=4, workers=4)
    assert np.array_equal(a.raw.length, b.raw.length)


def test_mc_censoring():
    g = seg()
    # walk bounces at v0 forever with probability one once it returns
    mc = seg_mc(g, t1=0.5, r1=0.5, t0p=0, r0p=1)
    sim = simulate(g, mc, "e'", samples=2000, seed=2, step_cap=3)
    assert 0 < sim.censored < 2000
    assert sim.censored == int((sim.raw.exit < 0).sum())
