"""Scattering on a metric graph and its walk expansion.

Hermitian vertex matrices ``M(v)`` define self-adjoint boundary conditions
for the Laplacian; the resulting scattering matrix ``S(k)`` is unitary for
real ``k`` and equals the walk generating function at ``k = i beta``.  On a
graph with one internal line of length ``a``, ``S`` is periodic in ``a``
with period ``2 pi / k`` and its Fourier coefficients are sums over walks
with a fixed number of traversals.
"""

import numpy as np

from walkgen import TransitionCollection, build_graph, eval_T
from walkgen.scattering import (
    bc_from_M,
    fourier_quadrature,
    fourier_walk_coefficient,
    solve_scattering,
    vertex_S_collection,
)

SEG = {
    "vertices": ["v0", "v1"],
    "internal": [{"id": "i", "from": "v0", "to": "v1", "length": 1.3}],
    "external": [{"id": "e'", "at": "v0"}, {"id": "e", "at": "v1"}],
}


def hermitian(mu, theta):
    q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    return q @ np.diag(mu) @ q.T


def main():
    g = build_graph(SEG)
    mc = TransitionCollection(g, {"v0": hermitian([0.9, -0.6], 0.4), "v1": hermitian([0.7, -0.8], 1.1)})
    bc = bc_from_M(mc, 1.0)
    print(f"boundary conditions self-adjoint: {bc.self_adjoint}")

    print("\nunitarity defect |S* S - I| at real k")
    for k in (0.3, 1.0, 2.7, 6.0):
        print(f"  k={k:3.1f}  {solve_scattering(g, bc, k).unitarity_defect:.1e}")

    S = solve_scattering(g, bc, 1j).S
    T = eval_T(g, mc, 1.0).value
    print(f"\n|S(i) - T(1)| = {np.abs(S - T).max():.1e}")

    k = 1.0
    Sv = vertex_S_collection(g, bc, k)
    r = abs(Sv.entry("v0", "i", "i") * Sv.entry("v1", "i", "i"))
    print(f"\nFourier coefficients at k={k}; round-trip reflection on i is {r:.3f}")
    print("  n   walk sum S[e,e']                 quadrature (mesh 256)            difference")
    for n in range(5):
        w = fourier_walk_coefficient(g, bc, k, (n,))[0, 1]
        q = fourier_quadrature(g, bc, k, (n,), 256)[0, 1]
        print(f"  {n}  {w:.12f}  {q:.12f}  {abs(w - q):.1e}")
    q = fourier_quadrature(g, bc, k, (-1,), 256)
    print(f"  negative score -1: max |coefficient| = {np.abs(q).max():.1e}")


if __name__ == "__main__":
    main()
