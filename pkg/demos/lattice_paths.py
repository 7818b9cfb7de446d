"""Counting lattice paths with walk generating functions.

Each counting family lives on a small lattice graph whose 0/1 transition
matrices only let a walker continue along an allowed step.  The relevant
walks from ``e'`` to ``e`` are then exactly the lattice paths, so
``T[e, e'](0)`` is their number.  With unit line lengths every Catalan path
of size ``n`` has metric length ``2n``, so ``T(beta) = C_n exp(-2 n beta)``.
"""

import math

from walkgen import eval_T, make_family, series_T
from walkgen.families import expected_count


def main():
    print("family      n  closed form  enumeration  recurrence")
    for family, sizes in [("catalan", range(1, 7)), ("schroeder", range(1, 5)),
                          ("motzkin", range(1, 6)), ("dyck", range(1, 7))]:
        for n in sizes:
            g, mc = make_family(family, n)
            closed = eval_T(g, mc, 0.0)["e", "e'"].real
            walked = series_T(g, mc, 0.0, 2 * n, relevant_only=True)
            count = walked["e", "e'"].real
            print(f"{family:10s} {n:2d}  {closed:11.6f}  {count:11.0f}  "
                  f"{expected_count(family, n):10d}   ({walked.walk_count} relevant walks)")

    g, mc = make_family("catalan", 4)
    print("\nCatalan n=4 as a function of beta (all paths have length 8):")
    for beta in (0.0, 0.1, 0.5, 1.0):
        T = eval_T(g, mc, beta)["e", "e'"].real
        print(f"  beta={beta:4.1f}  T={T:.12g}  14 exp(-8 beta)={14 * math.exp(-8 * beta):.12g}")


if __name__ == "__main__":
    main()
