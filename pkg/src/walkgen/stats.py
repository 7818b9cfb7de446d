"""Mean values of random walks from derivatives of the generating function.

Every mean is a logarithmic derivative ``-dT/T`` for a perturbation that
multiplies each occurrence of the counted event by ``exp(-lambda)``.  The
derivative of ``T = P_E R M P_E^T`` with ``R = (I - K)^{-1}`` is

    dT = P_E R (dK R M + dM) P_E^T,

so each mean costs one extra solve with the LU factors of ``I - K``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NotStochastic, ZeroBeta, ZeroDenominator, ZeroEntry
from .genfun import Resolvent
from .graph import MetricGraph
from .transition import TransitionCollection, assemble_big_m, classify, vertex_slots

ZERO_TOL = 1e-13


@dataclass
class MeanReport:
    """Conditional means for every pair ``(e, e')`` (rows: sink ``e``).

    ``T`` and ``dT`` are kept for analytic reports so aggregates can be
    formed without dividing by vanishing entries.  Entries whose ``T``
    vanishes are ``nan``.
    """

    values: np.ndarray
    kind: str
    beta: complex
    method: str
    external_ids: tuple[str, ...]
    T: np.ndarray | None = None
    dT: np.ndarray | None = None
    stderr: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __getitem__(self, pair):
        e, ep = pair
        return self.values[self.external_ids.index(e), self.external_ids.index(ep)]

    def value(self, e, ep):
        i, j = self.external_ids.index(e), self.external_ids.index(ep)
        if self.T is not None and _vanishes(self.T[i, j], self.T):
            raise ZeroDenominator(f"T[{e!r}, {ep!r}] vanishes: no relevant walks")
        v = self.values[i, j]
        return v.real if self.info.get("real") else v


def _vanishes(x, T):
    return abs(x) <= ZERO_TOL * max(1.0, float(np.abs(T).max()))


def _report(r: Resolvent, dT, kind, method, beta, g, **info):
    T = r.T
    vals = np.full(T.shape, np.nan, dtype=complex)
    ok = np.abs(T) > ZERO_TOL * max(1.0, float(np.abs(T).max()))
    vals[ok] = -dT[ok] / T[ok]
    real = bool(np.all(np.abs(vals[ok].imag) <= 1e-12 * np.maximum(1.0, np.abs(vals[ok]))))
    info["real"] = real
    return MeanReport(vals, kind, beta, method, g.external_ids, T.copy(), dT, info=info)


def _block_perturbation(g, big, v0, mask):
    """``dM``: minus the entries of ``M(v0)`` selected by ``mask``."""
    idx = vertex_slots(g, v0)
    dM = np.zeros_like(big)
    sub = np.zeros((len(idx), len(idx)), dtype=complex)
    sub[mask] = big[np.ix_(idx, idx)][mask]
    dM[np.ix_(idx, idx)] = -sub
    return dM


def _perturbed(r: Resolvent, dM):
    return r.derivative(dK=dM @ r.GH, dM=dM)


def length_report(g: MetricGraph, mc: TransitionCollection, beta) -> MeanReport:
    r = Resolvent(g, assemble_big_m(g, mc), beta)
    dT = r.derivative(dK=r.dK_dbeta())
    return _report(r, dT, "length", "analytic", complex(beta), g)


def transitions_report(g, mc, beta, v0, j0, k0) -> MeanReport:
    """Mean number of transitions ``k0 -> j0`` at ``v0``."""
    star = g.star(v0)
    big = assemble_big_m(g, mc).matrix
    mask = np.zeros((star.degree, star.degree), dtype=bool)
    mask[star.index(j0), star.index(k0)] = True
    r = Resolvent(g, big, beta)
    return _report(r, _perturbed(r, _block_perturbation(g, big, v0, mask)), "transition", "analytic",
                   complex(beta), g, at=(v0, j0, k0))


def visits_report(g, mc, beta, v0) -> MeanReport:
    big = assemble_big_m(g, mc).matrix
    d = g.degree(v0)
    r = Resolvent(g, big, beta)
    dM = _block_perturbation(g, big, v0, np.ones((d, d), dtype=bool))
    return _report(r, _perturbed(r, dM), "visits", "analytic", complex(beta), g, at=v0)


def reflections_report(g, mc, beta, v0) -> MeanReport:
    big = assemble_big_m(g, mc).matrix
    d = g.degree(v0)
    r = Resolvent(g, big, beta)
    dM = _block_perturbation(g, big, v0, np.eye(d, dtype=bool))
    return _report(r, _perturbed(r, dM), "reflection", "analytic", complex(beta), g, at=v0)


def _hop_columns(g, i0):
    nE, nI = len(g.external), len(g.internal)
    k = g.internal_index[i0]
    return [nE + k, nE + nI + k]


def traversal_mu_derivative(r: Resolvent, g: MetricGraph, i0: str) -> np.ndarray:
    """``dT/dmu`` for ``a_{i0} -> a_{i0} exp(mu)`` at ``mu = 0``."""
    if r.beta == 0:
        raise ZeroBeta("the length rescaling carries no information at beta = 0")
    a0 = g.internal_line(i0).length
    dK = np.zeros_like(r.K)
    cols = _hop_columns(g, i0)
    dK[:, cols] = -r.beta * a0 * r.K[:, cols]
    return r.derivative(dK=dK)


def traversals_report(g, mc, beta, i0) -> MeanReport:
    """Mean number of traversals of ``i0`` in either direction.

    For ``beta != 0`` this rescales ``a_{i0}`` by ``exp(mu)`` and divides
    ``-dT/dmu / T`` by ``beta a_{i0}``.  At ``beta = 0`` that derivative
    vanishes identically, so each hop across ``i0`` is tagged directly
    instead (the limit ``beta -> 0``).
    """
    r = Resolvent(g, assemble_big_m(g, mc), beta)
    try:
        dT = traversal_mu_derivative(r, g, i0) / (r.beta * g.internal_line(i0).length)
        method = "analytic"
    except ZeroBeta:
        dK = np.zeros_like(r.K)
        cols = _hop_columns(g, i0)
        dK[:, cols] = -r.K[:, cols]
        dT = r.derivative(dK=dK)
        method = "limit"
    return _report(r, dT, "traversals", method, complex(beta), g, edge=i0)


def _scalar(rep: MeanReport, e, ep):
    return rep.value(e, ep)


def mean_length(g, mc, beta, e, ep):
    """Mean metric length ``-T'(beta)/T(beta)`` of walks from ``ep`` to ``e``."""
    return _scalar(length_report(g, mc, beta), e, ep)


def mean_transitions(g, mc, beta, e, ep, v0, j0, k0):
    """Mean number of transitions from incoming ``k0`` to outgoing ``j0`` at ``v0``."""
    if mc.entry(v0, j0, k0) == 0:
        raise ZeroEntry(f"M({v0!r})[{j0!r}, {k0!r}] is zero; the mean is 0 by convention")
    return _scalar(transitions_report(g, mc, beta, v0, j0, k0), e, ep)


def mean_reflections(g, mc, beta, e, ep, v0):
    return _scalar(reflections_report(g, mc, beta, v0), e, ep)


def mean_visits(g, mc, beta, e, ep, v0):
    return _scalar(visits_report(g, mc, beta, v0), e, ep)


def mean_traversals(g, mc, beta, i0, e, ep):
    return _scalar(traversals_report(g, mc, beta, i0), e, ep)


def transition_table(g, mc, beta, v0) -> np.ndarray:
    """``deg x deg x |E| x |E|`` array of all transition means at ``v0``."""
    big = assemble_big_m(g, mc).matrix
    r = Resolvent(g, big, beta)
    d = g.degree(v0)
    nE = len(g.external)
    out = np.zeros((d, d, nE, nE), dtype=complex)
    for j in range(d):
        for k in range(d):
            mask = np.zeros((d, d), dtype=bool)
            mask[j, k] = True
            out[j, k] = _report(r, _perturbed(r, _block_perturbation(g, big, v0, mask)), "", "", beta, g).values
    return out


def aggregate(rep: MeanReport, mode: str, edge: str | None = None):
    """``T``-weighted average of a report over sinks, sources or both.

    ``bullet_source``: walks leaving ``edge`` with any sink;
    ``bullet_sink``: walks ending at ``edge`` from any source;
    ``bullet_both``: all walks.
    """
    if rep.T is None or rep.dT is None:
        raise ValueError("aggregates need an analytic report")
    ids = rep.external_ids
    if mode == "bullet_source":
        num, den = -rep.dT[:, ids.index(edge)].sum(), rep.T[:, ids.index(edge)].sum()
    elif mode == "bullet_sink":
        num, den = -rep.dT[ids.index(edge), :].sum(), rep.T[ids.index(edge), :].sum()
    elif mode == "bullet_both":
        num, den = -rep.dT.sum(), rep.T.sum()
    else:
        raise ValueError(f"unknown aggregate mode {mode!r}")
    if _vanishes(den, rep.T):
        raise ZeroDenominator(f"aggregate weight vanishes for {mode} {edge!r}")
    val = num / den
    return val.real if abs(val.imag) <= 1e-12 * max(1.0, abs(val)) else val


# -- Monte Carlo ---------------------------------------------------------


@dataclass
class Sample:
    """Raw per-walk records of one simulation shard."""

    exit: np.ndarray  # external index, -1 if censored
    length: np.ndarray
    steps: np.ndarray
    visits: np.ndarray  # (n, |V|)
    traversals: np.ndarray  # (n, |I|)

    @staticmethod
    def merge(parts: list["Sample"]) -> "Sample":
        return Sample(*(np.concatenate([getattr(p, f) for p in parts]) for f in
                        ("exit", "length", "steps", "visits", "traversals")))


@dataclass
class SimulationResult:
    source: str
    beta: float
    samples: int
    censored: int
    external_ids: tuple[str, ...]
    vertices: tuple[str, ...]
    internal_ids: tuple[str, ...]
    raw: Sample

    def _exit_mask(self, e):
        return self.raw.exit == self.external_ids.index(e)

    def exit_frequency(self, e):
        """Estimate of ``T[e, source](0)`` with its standard error."""
        x = self._exit_mask(e).astype(float)
        return x.mean(), x.std(ddof=1) / math.sqrt(x.size) if x.size > 1 else 0.0

    def genfun(self, e):
        """Estimate of ``T[e, source](beta) = E[exp(-beta |w|); exit = e]``."""
        x = np.where(self._exit_mask(e), np.exp(-self.beta * self.raw.length), 0.0)
        return x.mean(), x.std(ddof=1) / math.sqrt(x.size) if x.size > 1 else 0.0

    def _conditional(self, x, e):
        """Mean of ``x`` over walks exiting at ``e``, weighted by ``exp(-beta |w|)``."""
        m = self._exit_mask(e)
        if not m.any():
            return math.nan, math.nan
        w = np.exp(-self.beta * self.raw.length[m])
        x = x[m]
        mean = float((w * x).sum() / w.sum())
        if m.sum() < 2:
            return mean, 0.0
        # delta-method standard error of a ratio estimator
        resid = w * (x - mean)
        se = math.sqrt(float((resid**2).sum())) / float(w.sum())
        return mean, se

    def mean_length(self, e):
        return self._conditional(self.raw.length, e)

    def mean_visits(self, e, v):
        return self._conditional(self.raw.visits[:, self.vertices.index(v)].astype(float), e)

    def mean_traversals(self, e, i):
        return self._conditional(self.raw.traversals[:, self.internal_ids.index(i)].astype(float), e)


def _transition_tables(g, mc):
    big = assemble_big_m(g, mc).matrix.real
    d = big.shape[0]
    width = max(g.degree(v) for v in g.vertices)
    slots = np.full((d, width), -1, dtype=np.int64)
    cum = np.ones((d, width))
    owner = np.zeros(d, dtype=np.int64)
    vindex = {v: n for n, v in enumerate(g.vertices)}
    for v in g.vertices:
        idx = vertex_slots(g, v)
        for s in idx:
            owner[s] = vindex[v]
            slots[s, : len(idx)] = idx
            c = np.cumsum(big[idx, s])
            cum[s, : len(idx)] = c
            cum[s, len(idx) - 1] = np.inf  # absorb rounding in the last bin
    return slots, cum, owner


def _simulate_shard(g, mc, source, n, step_cap, rng, tables):
    slots, cum, owner = tables
    nE, nI = len(g.external), len(g.internal)
    lengths = g.lengths
    partner = np.arange(nE + 2 * nI)
    line = np.full(nE + 2 * nI, -1)
    for k in range(nI):
        partner[nE + k], partner[nE + nI + k] = nE + nI + k, nE + k
        line[nE + k] = line[nE + nI + k] = k
    out = Sample(
        np.full(n, -1, dtype=np.int64),
        np.zeros(n),
        np.zeros(n, dtype=np.int64),
        np.zeros((n, len(g.vertices)), dtype=np.int64),
        np.zeros((n, nI), dtype=np.int64),
    )
    active = np.arange(n)
    state = np.full(n, g.external_index[source], dtype=np.int64)
    steps = 0
    while active.size and steps < step_cap:
        np.add.at(out.visits, (active, owner[state]), 1)
        u = rng.random(active.size)
        col = (u[:, None] >= cum[state]).sum(axis=1)
        nxt = slots[state, col]
        done = nxt < nE
        out.exit[active[done]] = nxt[done]
        moving = ~done
        k = line[nxt[moving]]
        who = active[moving]
        out.length[who] += lengths[k]
        np.add.at(out.traversals, (who, k), 1)
        out.steps[who] += 1
        state = partner[nxt[moving]]
        active = who
        steps += 1
    return out


def simulate(
    g: MetricGraph,
    mc: TransitionCollection,
    source: str,
    beta: float = 0.0,
    samples: int = 100_000,
    step_cap: int = 1_000_000,
    seed: int = 0,
    shards: int = 1,
    workers: int | None = None,
) -> SimulationResult:
    """Sample walks of the Markov procedure on edges entering at ``source``.

    At a vertex reached along ``j`` the next edge is ``j'`` with probability
    ``M(v)[j', j]``; the walk ends on an external line.  Walks still running
    after ``step_cap`` traversals are censored.  Shards use independent
    child streams of ``seed`` and are merged in shard order, so the result
    does not depend on ``workers``.
    """
    if not classify(mc).stochastic:
        raise NotStochastic("Monte Carlo needs a stochastic transition collection")
    tables = _transition_tables(g, mc)
    children = np.random.SeedSequence(seed).spawn(shards)
    sizes = [samples // shards + (s < samples % shards) for s in range(shards)]
    if workers is None:
        workers = int(os.environ.get("WALKGEN_THREADS", "1") or 1)

    def run(s):
        return _simulate_shard(g, mc, source, sizes[s], step_cap, np.random.default_rng(children[s]), tables)

    if workers > 1 and shards > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(shards)))
    else:
        parts = [run(s) for s in range(shards)]
    raw = Sample.merge(parts)
    return SimulationResult(
        source, float(beta), samples, int((raw.exit < 0).sum()), g.external_ids, g.vertices, g.internal_ids, raw
    )


__all__ = [
    "MeanReport",
    "SimulationResult",
    "aggregate",
    "length_report",
    "mean_length",
    "mean_reflections",
    "mean_transitions",
    "mean_traversals",
    "mean_visits",
    "reflections_report",
    "simulate",
    "transition_table",
    "transitions_report",
    "traversal_mu_derivative",
    "traversals_report",
    "visits_report",
]
