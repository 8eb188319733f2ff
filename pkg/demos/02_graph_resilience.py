"""
Certifying (r, s)-resilience by enumerating every reduced graph.
"""

from resilient_lsq.graph import (DirectedGraph, count_reduced_graphs, degree_witness,
                                 enumerate_reduced_graphs,
                                 is_resilient, kappa_min, roots)

g = DirectedGraph(3, {(0, 1), (1, 0), (1, 2)})
print("roots of 0<->1->2:", roots(g))

for n in (4, 5, 6):
    K = DirectedGraph.complete(n)
    for r, s in ((1, 1), (1, 2)):
        if r + s > n - 1:
            continue
        total = count_reduced_graphs(K, r, s)
        ok = is_resilient(K, r, s)
        kap = kappa_min(K, r, s) if ok else None
        print(f"K_{n} ({r},{s}): {total} reduced graphs, resilient {ok}, kappa {kap}")

# K_5 fails (1, 2) with no pair witness: dropping a vertex and two in-arcs per
# vertex can leave two disjoint 2-cycles, which share no root
K5 = DirectedGraph.complete(5)
print("pair witness on K_5 (1,2):", degree_witness(K5, 1, 2))
bad = [h for h in enumerate_reduced_graphs(K5, 1, 2) if not roots(h)]
print(f"unrooted reduced graphs: {len(bad)}, e.g. arcs {sorted(bad[0].arcs)}")

# a directed cycle is hopeless for any s >= 1
C = DirectedGraph.cycle(5)
print("5-cycle (1,1) witness:", degree_witness(C, 1, 1), "resilient:", is_resilient(C, 1, 1))
