"""
The hull-intersection filter on small point sets.

With one faulty value among 2*beta + 1 scalars the filter returns the median;
in the plane it returns a point inside every leave-one-out triangle.
"""

import numpy as np

from resilient_lsq.filter import (FilterParams, InboxView, filter_step,
                                  hull_intersection_point, verify_hull_membership)

# scalars: [0, 1] and [1, 10] and [0, 10] meet only at 1
p1 = FilterParams(d=1, beta=1)
print("d=1 intersection of {0, 1, 10}:", hull_intersection_point([[0.0], [1.0], [10.0]], p1, [0.0]))

# a square: the four triangles meet at the centre
p2 = FilterParams(d=2, beta=1)
square = np.array([[0, 0], [2, 0], [0, 2], [2, 2]], dtype=float)
print("square corners ->", hull_intersection_point(square, p2, anchor=[5.0, 5.0]))

# one honest agent with four neighbors, one of them faulty and far away
rng = np.random.default_rng(0)
honest = {j: rng.normal(size=2) for j in range(3)}
x = rng.normal(size=2)
for blowup in (1e1, 1e4, 1e8):
    msgs = dict(honest)
    msgs[3] = np.array([blowup, -blowup])
    v, ys = filter_step(InboxView(x, msgs), p2, return_points=True)
    inside = verify_hull_membership(v, [x] + list(honest.values()))
    print(f"faulty value {blowup:g}: v = {np.round(v, 4)}, in honest hull: {inside}")

# the intersection point ignores the faulty value entirely here
print("points averaged with the own state:", [np.round(y, 4) for y in ys])
