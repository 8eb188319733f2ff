"""
Redundancy of the data: when does dropping agents leave the solution set alone?
"""

import numpy as np

from resilient_lsq.redundancy import (Network, global_solution_set, intersection_of_local_sets,
                                      is_k_redundant, max_redundancy,
                                      verify_intersection_characterization)
from resilient_lsq.scenarios import generic_network, parallel_network

net = generic_network()
print("rows:\n", np.vstack([a.A for a in net.agents]).round(3))
print("solution:", global_solution_set(net).point)
print("max redundancy:", max_redundancy(net))          # any 2 rows pin the point
print("k=4:", is_k_redundant(net, 4))                   # a single row cannot

bs = [a.b.copy() for a in net.agents]
bs[0] += 0.1
noisy = Network.from_arrays([a.A for a in net.agents], bs)
print("after nudging b_0 by 0.1, 1-redundant:", is_k_redundant(noisy, 1))

line = parallel_network()
S = global_solution_set(line)
print("parallel rows: X* passes through", S.point, "along", S.kernel_basis.ravel())
print("X* equals the intersection of local sets:", verify_intersection_characterization(line))
print("intersection point:", intersection_of_local_sets(line).point)
