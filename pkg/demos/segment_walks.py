"""Random walks on a two-vertex segment.

The graph has one internal line ``i`` between ``v0`` and ``v1`` and an
external line at each end.  A walker enters along ``e'``, crosses to
``v1``, and there either leaves along ``e`` or bounces back with
probability 1/2; at ``v0`` it always bounces.  The generating function is
the geometric series ``x/2 + x^3/4 + ... = (x/2) / (1 - x^2/2)`` with
``x = exp(-beta)``.  Mean values come from derivatives of ``T`` and are
checked against a Monte Carlo run of the same walk.
"""

import math

import numpy as np

from walkgen import TransitionCollection, build_graph, eval_T, series_T, simulate
from walkgen.stats import mean_length, mean_reflections, mean_traversals, mean_visits

SEG = {
    "vertices": ["v0", "v1"],
    "internal": [{"id": "i", "from": "v0", "to": "v1", "length": 1.0}],
    "external": [{"id": "e'", "at": "v0"}, {"id": "e", "at": "v1"}],
}


def main():
    g = build_graph(SEG)
    # star order at v0 is (e', i), at v1 (e, i); columns are incoming edges
    mc = TransitionCollection(g, {"v0": np.array([[0.0, 0.0], [1.0, 1.0]]),
                                  "v1": np.array([[0.5, 0.5], [0.5, 0.5]])})

    print("T[e, e'](beta): closed form, walk series with 41 traversals, hand formula")
    for beta in (0.0, 0.5, 1.0, 2.0):
        x = math.exp(-beta)
        closed = eval_T(g, mc, beta)["e", "e'"].real
        s = series_T(g, mc, beta, 41)
        walked = s["e", "e'"].real
        print(f"  beta={beta:3.1f}  {closed:.15f}  {walked:.15f} (tail <= {s.tail_bound:.1e})"
              f"  {0.5 * x / (1 - 0.5 * x * x):.15f}")

    print("\nmeans over walks from e' to e at beta = 0")
    for label, value, hand in [
        ("length", mean_length(g, mc, 0.0, "e", "e'"), 3),
        ("visits at v1", mean_visits(g, mc, 0.0, "e", "e'", "v1"), 2),
        ("reflections v1", mean_reflections(g, mc, 0.0, "e", "e'", "v1"), 1),
        ("traversals of i", mean_traversals(g, mc, 0.0, "i", "e", "e'"), 3),
    ]:
        print(f"  {label:15s} {value:.12f}   (hand value {hand})")

    sim = simulate(g, mc, "e'", samples=100_000, seed=7)
    print("\nMonte Carlo, 100000 walks")
    for label, (m, se), exact in [("length", sim.mean_length("e"), 3.0),
                                  ("visits at v1", sim.mean_visits("e", "v1"), 2.0)]:
        print(f"  {label:13s} {m:.4f} +- {se:.4f}   z = {(m - exact) / se:+.2f}")


if __name__ == "__main__":
    main()
