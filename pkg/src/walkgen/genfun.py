"""Closed-form generating function of walks.

With ``K(beta) = M G H(i beta; a)`` (one hop across an internal line with
decay ``exp(-beta a_i)`` followed by a vertex transition) the generating
function is

    T(beta) = (I 0 0) (I - K(beta))^{-1} M (I 0 0)^T,

one dense solve with ``|E|`` right-hand sides.  Only decaying exponentials
are formed, so large ``Re beta`` never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .blocks import gh_matrix, u_matrix, x_matrix, y_matrix
from .errors import Overflow, SingularD
from .graph import MetricGraph
from .transition import BigM, TransitionCollection, assemble_big_m

RCOND_MIN = 1e-14


@dataclass
class CouplingMatrix:
    matrix: np.ndarray
    beta: complex
    a: np.ndarray
    b: np.ndarray | None = None


@dataclass
class GenFunMatrix:
    """``|E| x |E|`` result with provenance."""

    value: np.ndarray
    method: str
    external_ids: tuple[str, ...]
    rcond: float | None = None
    bound: float | None = None
    info: dict = field(default_factory=dict)

    def __getitem__(self, pair):
        e, ep = pair
        return self.value[self.external_ids.index(e), self.external_ids.index(ep)]

    def __array__(self, dtype=None, copy=None):
        return self.value if dtype is None else self.value.astype(dtype)


def _big(g, m) -> np.ndarray:
    if isinstance(m, TransitionCollection):
        m = assemble_big_m(g, m)
    if isinstance(m, BigM):
        return m.matrix
    return np.asarray(m, dtype=complex)


def coupling(g: MetricGraph, bigM, beta: complex, b=None, a=None) -> CouplingMatrix:
    """``K(beta) = M G Hhat(i beta; a, b)``.  ``a`` defaults to the graph lengths."""
    a = g.lengths if a is None else np.asarray(a, dtype=float)
    m = _big(g, bigM)
    return CouplingMatrix(m @ gh_matrix(g, beta, a, b), complex(beta), a, None if b is None else np.asarray(b, float))


class Resolvent:
    """LU-factored ``I - K`` for one ``beta`` plus the pieces derivatives need."""

    def __init__(self, g: MetricGraph, bigM, beta: complex, a=None, b=None):
        self.g = g
        self.beta = complex(beta)
        self.M = _big(g, bigM)
        self.a = g.lengths if a is None else np.asarray(a, dtype=float)
        self.b = self.a if b is None else np.asarray(b, dtype=float)
        self.GH = gh_matrix(g, self.beta, self.a, self.b)
        self.K = self.M @ self.GH
        d = self.K.shape[0]
        lhs = np.eye(d) - self.K
        self.rcond = 1.0 / np.linalg.cond(lhs) if d else 1.0
        if not np.isfinite(self.rcond) or self.rcond < RCOND_MIN:
            raise SingularD(f"I - K(beta) is singular at beta={beta} (rcond={self.rcond:.3g})", self.rcond)
        self._lu = scipy.linalg.lu_factor(lhs, check_finite=False)
        self.nE = len(g.external)
        self.X = self.solve(self.M[:, : self.nE])  # (I-K)^{-1} M P_E^T

    def solve(self, rhs):
        return scipy.linalg.lu_solve(self._lu, rhs, check_finite=False)

    @property
    def T(self) -> np.ndarray:
        return self.X[: self.nE]

    def derivative(self, dK=None, dM=None) -> np.ndarray:
        """Directional derivative of ``T`` for perturbations ``dK`` of the
        coupling and ``dM`` of ``M``:  ``P_E R (dK X + dM P_E^T)``."""
        rhs = np.zeros_like(self.X)
        if dK is not None:
            rhs = rhs + dK @ self.X
        if dM is not None:
            rhs = rhs + dM[:, : self.nE]
        return self.solve(rhs)[: self.nE]

    def dK_dbeta(self) -> np.ndarray:
        """``dK/dbeta``: each decay ``exp(-beta c)`` picks up ``-c``."""
        nE, nI = self.nE, len(self.g.internal)
        w = np.zeros(self.K.shape[0])
        w[nE : nE + nI] = self.a
        w[nE + nI :] = self.b
        # GH column s holds the decay of the hop leaving slot s
        return -(self.K * w[None, :])


def eval_T(g: MetricGraph, bigM, beta: complex) -> GenFunMatrix:
    """Generating function ``T(beta)`` from the closed form."""
    r = Resolvent(g, bigM, beta)
    return GenFunMatrix(r.T.copy(), "closed", g.external_ids, rcond=r.rcond)


def eval_T_directed(g: MetricGraph, bigM, beta: complex, a, b) -> GenFunMatrix:
    """Directed-penalty generating function.

    A traversal from the initial to the terminal vertex of ``i`` costs
    ``a[i]``, the opposite direction ``b[i]``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("penalty vectors must be strictly positive")
    r = Resolvent(g, bigM, beta, a, b)
    return GenFunMatrix(r.T.copy(), "closed", g.external_ids, rcond=r.rcond, info={"directed": True})


def neumann_T(g: MetricGraph, bigM, beta: complex, terms: int) -> GenFunMatrix:
    """Partial sum ``sum_{n<=terms} P_E K^n M P_E^T`` with a remainder bound.

    The bound ``m q^(N+1)/(1-q)`` uses ``q = ||K||_2`` and ``m = ||M||_2``;
    it is infinite when ``q >= 1``.
    """
    m = _big(g, bigM)
    K = coupling(g, m, beta).matrix
    nE = len(g.external)
    cur = m[:, :nE].copy()
    acc = cur[:nE].copy()
    for _ in range(terms):
        cur = K @ cur
        acc += cur[:nE]
    q = float(np.linalg.norm(K, 2)) if K.size else 0.0
    mn = float(np.linalg.norm(m, 2)) if m.size else 0.0
    bound = 0.0 if q == 0 else (mn * q ** (terms + 1) / (1 - q) if q < 1 else math.inf)
    return GenFunMatrix(acc, "neumann", g.external_ids, bound=bound, info={"q": q, "terms": terms})


def d_matrix(g: MetricGraph, bigM, beta: complex) -> np.ndarray:
    """Full ``D(beta) = (X + Y)/2 - M (X - Y)/2`` at ``k = i beta``.

    Contains ``exp(+beta a_i)``; for inspection only.
    """
    beta = complex(beta)
    if g.internal and beta.real * g.lengths.max() > 700:
        raise Overflow(f"exp(beta a) overflows for beta={beta}")
    m = _big(g, bigM)
    k = 1j * beta
    X, Y = x_matrix(g, k), y_matrix(g, k)
    return 0.5 * (X + Y) - 0.5 * m @ (X - Y)


def u_at_beta(g: MetricGraph, beta: complex) -> np.ndarray:
    return u_matrix(g, 1j * complex(beta))
