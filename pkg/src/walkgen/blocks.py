"""Block matrices on the boundary space ``K = K_E + K_I^- + K_I^+``."""

from __future__ import annotations

import numpy as np


def _sizes(g):
    return len(g.external), len(g.internal)


def x_matrix(g, k: complex, a=None) -> np.ndarray:
    """Boundary values of ``exp(+ikx)``/``exp(-ikx)`` amplitudes."""
    nE, nI = _sizes(g)
    a = g.lengths if a is None else np.asarray(a, dtype=float)
    t = np.exp(1j * k * a)
    out = np.zeros((nE + 2 * nI,) * 2, dtype=complex)
    out[:nE, :nE] = np.eye(nE)
    out[nE : nE + nI, nE : nE + nI] = np.eye(nI)
    out[nE : nE + nI, nE + nI :] = np.eye(nI)
    out[nE + nI :, nE : nE + nI] = np.diag(t)
    out[nE + nI :, nE + nI :] = np.diag(1 / t)
    return out


def y_matrix(g, k: complex, a=None) -> np.ndarray:
    """Boundary derivatives (inward normal, divided by ``ik``)."""
    nE, nI = _sizes(g)
    a = g.lengths if a is None else np.asarray(a, dtype=float)
    t = np.exp(1j * k * a)
    out = np.zeros((nE + 2 * nI,) * 2, dtype=complex)
    out[:nE, :nE] = np.eye(nE)
    out[nE : nE + nI, nE : nE + nI] = np.eye(nI)
    out[nE : nE + nI, nE + nI :] = -np.eye(nI)
    out[nE + nI :, nE : nE + nI] = -np.diag(t)
    out[nE + nI :, nE + nI :] = np.diag(1 / t)
    return out


def u_matrix(g, k: complex, a=None) -> np.ndarray:
    nE, nI = _sizes(g)
    a = g.lengths if a is None else np.asarray(a, dtype=float)
    diag = np.concatenate([np.ones(nE + nI), np.exp(-1j * k * a)])
    return np.diag(diag).astype(complex)


def hop_matrix(g, fwd, bwd) -> np.ndarray:
    """Swap the two ends of every internal line with per-direction factors.

    ``fwd[i]`` multiplies amplitude leaving the initial end (arriving at the
    terminal end), ``bwd[i]`` the opposite direction.  With
    ``fwd = bwd = exp(ik a)`` this is the product ``G H(k; a)``.
    """
    nE, nI = _sizes(g)
    d = nE + 2 * nI
    out = np.zeros((d, d), dtype=complex)
    r = np.arange(nI)
    out[nE + nI + r, nE + r] = fwd
    out[nE + r, nE + nI + r] = bwd
    return out


def gh_matrix(g, beta: complex, a=None, b=None) -> np.ndarray:
    """``G Hhat(i beta; a, b)``: decay ``exp(-beta a)`` on the initial-end
    block, ``exp(-beta b)`` on the terminal-end block."""
    a = g.lengths if a is None else np.asarray(a, dtype=float)
    b = a if b is None else np.asarray(b, dtype=float)
    beta = complex(beta)
    return hop_matrix(g, np.exp(-beta * a), np.exp(-beta * b))


def external_projector(g) -> np.ndarray:
    """``(I 0 0)``: rows of the external block."""
    nE, nI = _sizes(g)
    return np.eye(nE, nE + 2 * nI, dtype=complex)
