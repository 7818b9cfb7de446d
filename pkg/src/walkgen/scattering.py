"""Scattering matrices of Laplacians on metric graphs.

On every internal line the solution is ``alpha exp(ikx) + beta exp(-ikx)``
(``x`` measured from the initial vertex), on every external line
``delta_{e,e'} exp(-ikx) + S[e,e'] exp(ikx)``.  Boundary conditions
``A psi + B psi' = 0`` then give one linear system ``Z [S; alpha; beta] =
-(A - ikB) (I 0 0)^T`` with ``Z = A X + ik B Y``.

Local boundary conditions are stored per vertex, which is what the walk
(Fourier) expansion of ``S`` needs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .blocks import x_matrix, y_matrix
from .errors import InconsistentSystem, RankDeficient, SingularPencil, TooManyInternalLines
from .graph import MetricGraph
from .transition import TransitionCollection, dimension, scatter_blocks
from .walks import WalkSeriesResult, enumerate_walks, series_T, walk_weight

RESIDUAL_TOL = 1e-8
SA_TOL = 1e-12


@dataclass
class BoundaryConditions:
    """Boundary data ``(A, B)`` on the boundary space.

    ``blocks`` maps each vertex to its local ``(A_v, B_v)`` in canonical
    star order; it is ``None`` for non-local data given only globally.
    """

    A: np.ndarray
    B: np.ndarray
    provenance: str
    blocks: dict | None = None
    beta: float | None = None

    @property
    def self_adjoint(self) -> bool:
        ab = self.A @ self.B.conj().T
        return bool(np.allclose(ab, ab.conj().T, rtol=0, atol=SA_TOL * max(1.0, np.abs(ab).max())))

    @property
    def max_rank(self) -> bool:
        d = self.A.shape[0]
        return int(np.linalg.matrix_rank(np.hstack([self.A, self.B]))) == d


def _check_rank(A, B, where=""):
    if np.linalg.matrix_rank(np.hstack([A, B])) < A.shape[0]:
        raise RankDeficient(f"(A, B) does not have maximal rank{where}")


def local_bc(g: MetricGraph, blocks: dict, provenance: str = "explicit") -> BoundaryConditions:
    """Assemble vertex-local ``{v: (A_v, B_v)}`` into global block-diagonal data."""
    clean = {}
    for v in g.vertices:
        A, B = (np.asarray(x, dtype=complex) for x in blocks[v])
        d = g.degree(v)
        if A.shape != (d, d) or B.shape != (d, d):
            raise ValueError(f"boundary blocks at {v!r} must be {d}x{d}")
        _check_rank(A, B, f" at vertex {v!r}")
        clean[v] = (A, B)
    A = scatter_blocks(g, {v: ab[0] for v, ab in clean.items()})
    B = scatter_blocks(g, {v: ab[1] for v, ab in clean.items()})
    return BoundaryConditions(A, B, provenance, clean)


def global_bc(A, B) -> BoundaryConditions:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    _check_rank(A, B)
    return BoundaryConditions(A, B, "explicit", None)


def bc_from_M(mc: TransitionCollection, beta: float) -> BoundaryConditions:
    """Boundary conditions whose vertex scattering matrices equal ``M(v)`` at ``k = i beta``.

    ``A_v = (I - M(v))/2`` and ``B_v = -(I + M(v))/(2 beta)``.
    """
    beta = float(beta)
    if not beta > 0:
        raise ValueError("beta must be positive")
    g = mc.graph
    blocks = {}
    for v in g.vertices:
        m = mc[v]
        eye = np.eye(m.shape[0])
        blocks[v] = (0.5 * (eye - m), -(eye + m) / (2 * beta))
    bc = local_bc(g, blocks, "from_M")
    bc.beta = beta
    return bc


def single_vertex_S(A, B, k: complex) -> np.ndarray:
    """``S(k) = -(A + ikB)^{-1} (A - ikB)``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    k = complex(k)
    lhs = A + 1j * k * B
    if lhs.size and 1.0 / np.linalg.cond(lhs) < 1e-14:
        raise SingularPencil(f"A + ikB is singular at k={k}")
    return -np.linalg.solve(lhs, A - 1j * k * B)


def vertex_S_collection(g: MetricGraph, bc: BoundaryConditions, k: complex) -> TransitionCollection:
    """``{S_v(k)}`` as a transition collection (requires local data)."""
    if bc.blocks is None:
        raise ValueError("boundary conditions are not vertex-local")
    return TransitionCollection(g, {v: single_vertex_S(A, B, k) for v, (A, B) in bc.blocks.items()})


@dataclass
class ScatterResult:
    S: np.ndarray
    alpha: np.ndarray
    beta_amp: np.ndarray
    k: complex
    unitarity_defect: float
    residual: float
    method: str = "solve"
    external_ids: tuple[str, ...] = field(default_factory=tuple)

    def __getitem__(self, pair):
        e, ep = pair
        return self.S[self.external_ids.index(e), self.external_ids.index(ep)]


def _z_and_rhs(g, bc, k, a=None):
    k = complex(k)
    X = x_matrix(g, k, a)
    Y = y_matrix(g, k, a)
    Z = bc.A @ X + 1j * k * bc.B @ Y
    nE = len(g.external)
    rhs = -(bc.A - 1j * k * bc.B)[:, :nE]
    return Z, rhs


def _solve_one(Z, rhs):
    """Dense solve, least squares on a singular ``Z``."""
    method = "solve"
    try:
        if 1.0 / np.linalg.cond(Z) < 1e-13:
            raise np.linalg.LinAlgError
        sol = np.linalg.solve(Z, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(Z, rhs, rcond=None)[0]
        method = "lstsq"
    res = float(np.linalg.norm(Z @ sol - rhs))
    scale = float(np.linalg.norm(rhs))
    if res > RESIDUAL_TOL * max(scale, 1.0):
        raise InconsistentSystem(f"scattering system is inconsistent (residual {res:.3g})")
    return sol, method, res


def solve_scattering(g: MetricGraph, bc: BoundaryConditions, k: complex, a=None) -> ScatterResult:
    """Scattering matrix and interior amplitudes at wave number ``k``.

    ``a`` overrides the line lengths (used by the quadrature over lengths).
    """
    k = complex(k)
    if k == 0:
        raise ValueError("k must be nonzero")
    nE, nI = len(g.external), len(g.internal)
    if bc.A.shape != (dimension(g),) * 2:
        raise ValueError("boundary data does not match the graph")
    Z, rhs = _z_and_rhs(g, bc, k, a)
    sol, method, res = _solve_one(Z, rhs)
    S = sol[:nE]
    defect = float(np.linalg.norm(S.conj().T @ S - np.eye(nE), 2))
    return ScatterResult(S, sol[nE : nE + nI], sol[nE + nI :], k, defect, res, method, g.external_ids)


# -- walk expansion ------------------------------------------------------


def _collection(g, src, k):
    if isinstance(src, TransitionCollection):
        return src
    return vertex_S_collection(g, src, k)


def fourier_walk_coefficient(g: MetricGraph, src, k: complex, score) -> np.ndarray:
    """Coefficient of ``exp(ik <n, a>)`` in the expansion of ``S(k)``.

    ``src`` is either boundary data (vertex scattering matrices are formed
    at ``k``) or a ready transition collection.  The coefficient is the sum
    of weights of all walks with score ``n``; it is zero when some
    ``n_i < 0`` or no walk has that score.
    """
    score = tuple(int(x) for x in score)
    if len(score) != len(g.internal):
        raise ValueError("score length does not match the internal lines")
    nE = len(g.external)
    out = np.zeros((nE, nE), dtype=complex)
    if any(x < 0 for x in score):
        return out
    mc = _collection(g, src, k)
    N = sum(score)
    for b, ep in enumerate(g.external_ids):
        for a_, e in enumerate(g.external_ids):
            for w in enumerate_walks(g, ep, e, N):
                if w.score == score:
                    out[a_, b] += walk_weight(g, mc, w)
    return out


def fourier_series_S(g: MetricGraph, bc, k: complex, nmax: int) -> WalkSeriesResult:
    """Partial sum of the walk expansion of ``S(k)`` over ``|n| <= nmax``.

    The tail bound is the geometric bound with ``m = max_v ||S_v(k)||`` and
    ``q = |I| exp(-Im k a_min)``; it is infinite outside the convergence
    regime.
    """
    mc = _collection(g, bc, k)
    return series_T(g, mc, -1j * complex(k), nmax)


def sampled_vertex_norm(g: MetricGraph, bc: BoundaryConditions, ks) -> float:
    """Sampled ``max_k max_v ||S_v(k)||`` over the points ``ks``.

    A heuristic stand-in for the uniform constant over a region of the
    upper half plane; it is a lower bound for the true supremum.
    """
    best = 0.0
    for k in np.atleast_1d(ks):
        mc = vertex_S_collection(g, bc, k)
        best = max(best, max(float(np.linalg.norm(mc[v], 2)) for v in g.vertices))
    return best


def _grid(nI, mesh, period):
    if nI == 0:
        return np.zeros((1, 0))
    axes = [np.arange(mesh) * (period / mesh)] * nI
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, nI)
    return pts


def scattering_on_grid(g: MetricGraph, bc: BoundaryConditions, k: float, lengths: np.ndarray):
    """``S(k; a)`` for every row ``a`` of ``lengths`` (batched solve).

    Nodes where ``Z`` is singular fall back to least squares; if that is
    inconsistent the node is shifted by ``1e-9`` periods and a warning is
    issued.
    """
    k = complex(k)
    nE, nI = len(g.external), len(g.internal)
    d = nE + 2 * nI
    t = np.exp(1j * k * lengths)  # (P, nI)
    P = lengths.shape[0]
    X = np.zeros((P, d, d), dtype=complex)
    Y = np.zeros((P, d, d), dtype=complex)
    r = np.arange(nI)
    for M, sgn in ((X, 1), (Y, -1)):
        M[:, np.arange(nE), np.arange(nE)] = 1
        M[:, nE + r, nE + r] = 1
        M[:, nE + r, nE + nI + r] = sgn
        M[:, nE + nI + r, nE + r] = sgn * t
        M[:, nE + nI + r, nE + nI + r] = 1 / t
    Z = bc.A[None] @ X + 1j * k * bc.B[None] @ Y
    rhs = -(bc.A - 1j * k * bc.B)[:, :nE]
    cond = np.linalg.cond(Z)
    good = np.isfinite(cond) & (cond < 1e13)
    S = np.empty((P, nE, nE), dtype=complex)
    if good.any():
        S[good] = np.linalg.solve(Z[good], np.broadcast_to(rhs, (int(good.sum()), d, nE)))[:, :nE]
    period = 2 * math.pi / k.real if k.real else 1.0
    for p in np.flatnonzero(~good):
        try:
            sol, _, _ = _solve_one(Z[p], rhs)
        except InconsistentSystem:
            warnings.warn(f"singular scattering system at node {p}; perturbing lengths", RuntimeWarning)
            a = lengths[p] + 1e-9 * period
            sol, _, _ = _solve_one(_z_and_rhs(g, bc, k, a)[0], rhs)
        S[p] = sol[:nE]
    return S


def fourier_quadrature(g: MetricGraph, bc: BoundaryConditions, k: float, score, mesh: int = 256) -> np.ndarray:
    """Trapezoid approximation of the Fourier coefficient of ``a -> S(k; a)``.

    Integrates ``S(k; a) exp(-ik <n, a>)`` over one period ``[0, 2 pi/k]``
    per internal line.  The integrand is smooth and periodic, so the plain
    trapezoid rule converges spectrally.
    """
    nI = len(g.internal)
    if nI > 2:
        raise TooManyInternalLines("quadrature is limited to at most 2 internal lines")
    k = float(np.real(k))
    if not k > 0:
        raise ValueError("k must be positive")
    score = np.asarray(score, dtype=float)
    if score.shape != (nI,):
        raise ValueError("score length does not match the internal lines")
    period = 2 * math.pi / k
    pts = _grid(nI, mesh, period)
    S = scattering_on_grid(g, bc, k, pts)
    phase = np.exp(-1j * k * (pts @ score))
    return np.tensordot(phase, S, axes=(0, 0)) / pts.shape[0]
