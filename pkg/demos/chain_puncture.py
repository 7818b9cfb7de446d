"""From a vertex Markov chain to walks on a graph with leads, and back.

Removing one vertex ``v_inf`` of a nearest-neighbour chain turns its lines
into external lines.  The walker then moves on edges with transition
matrices whose columns are all equal (the next step does not depend on
where it came from).  ``T[e, e'](0)`` is the probability that a walker
entering along ``e'`` first returns to ``v_inf`` along ``e``; the columns
of ``T(0)`` sum to one.  Converting back re-enters the graph uniformly
from ``v_inf``.
"""

import numpy as np

from walkgen import chain_to_edge_model, edge_model_to_chain, eval_T
from walkgen.chain import VertexChain


def main():
    verts = ["v_inf", "a", "b", "c"]
    lines = [("l0", "v_inf", "a"), ("l1", "a", "b"), ("l2", "b", "c"), ("l3", "c", "v_inf"), ("l4", "a", "c")]
    P = np.array([
        [0.0, 0.2, 0.0, 0.5],
        [0.6, 0.0, 0.3, 0.2],
        [0.0, 0.5, 0.0, 0.3],
        [0.4, 0.3, 0.7, 0.0],
    ])
    chain = VertexChain(verts, lines, P)
    g, mc = chain_to_edge_model(chain, "v_inf")
    print(f"punctured graph: vertices {g.vertices}, internal {g.internal_ids}, external {g.external_ids}")
    print("M(a) (rows and columns in star order", g.star("a").edges, "):")
    print(np.real(mc["a"]))

    T = eval_T(g, mc, 0.0).value.real
    print("\nexit probabilities T(0), columns = entry line:")
    print(np.round(T, 6))
    print("column sums:", T.sum(axis=0))

    back = edge_model_to_chain(g, mc, "v_inf")
    order = [back.index[v] for v in verts]
    print("\nrecovered P in the original vertex order:")
    print(back.P[np.ix_(order, order)])
    print("column v_inf is uniform over the", len(g.external), "external lines")


if __name__ == "__main__":
    main()
