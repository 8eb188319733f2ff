"""
Multi-dimensional resilient consensus step.

For an agent with neighbor values ``x_j``, every subset of
``(d+1)*beta + 1`` neighbors contributes one point that lies in the convex
hull of each of its ``d*beta + 1``-element sub-subsets.  Such a point always
exists (it is a Tverberg point of the subset) and, as long as at most `beta`
of the values are adversarial, it lies in the hull of honest values.  The
agent then averages its own state with all of those points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import CapExceededError, InsufficientNeighborsError, InvalidInputError, NoIntersectionError
from .linalg import LpProblem, lp_solve

DEFAULT_CAP = 10**5
HULL_TOL = 1e-8


@dataclass(frozen=True)
class FilterParams:
    d: int
    beta: int
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.d < 1 or self.beta < 0:
            raise InvalidInputError(f"need d >= 1 and beta >= 0, got d={self.d}, beta={self.beta}")

    @property
    def outer_size(self):
        """Size of each neighbor subset averaged over."""
        return (self.d + 1) * self.beta + 1

    @property
    def inner_size(self):
        """Size of the sub-subsets whose hulls are intersected."""
        return self.d * self.beta + 1

    def work(self, neighbor_count):
        """Number of hulls an agent with `neighbor_count` neighbors touches per step."""
        return count_A_subsets(neighbor_count, self) * comb(self.outer_size, self.inner_size)


@dataclass
class InboxView:
    self_state: np.ndarray
    messages: dict = field(default_factory=dict)

    def __post_init__(self):
        self.self_state = np.asarray(self.self_state, dtype=float).reshape(-1)
        d = self.self_state.shape[0]
        msgs = {}
        for j, v in self.messages.items():
            v = np.asarray(v, dtype=float).reshape(-1)
            if v.shape[0] != d or not np.all(np.isfinite(v)):
                raise InvalidInputError(f"message from {j} is not a finite length-{d} vector")
            msgs[j] = v
        self.messages = msgs

    def shifted(self, c):
        c = np.asarray(c, dtype=float)
        return InboxView(self.self_state + c, {j: v + c for j, v in self.messages.items()})


def count_A_subsets(neighbor_count, params):
    need = params.outer_size
    if neighbor_count < need:
        raise InsufficientNeighborsError(
            f"{neighbor_count} neighbors but (d+1)*beta+1 = {need} are required")
    return comb(neighbor_count, need)


def _interval_intersection(points, params, anchor):
    x = np.sort(points[:, 0])
    # every inner subset of size m - beta; the extreme ones decide the bounds
    lo = x[params.beta] if x.size > params.beta else x[-1]
    hi = x[x.size - 1 - params.beta]
    if lo > hi + HULL_TOL * max(1.0, abs(lo), abs(hi)):
        raise NoIntersectionError(f"empty interval intersection [{lo}, {hi}]")
    return np.array([min(max(anchor[0], lo), hi)])


def _lp_intersection(points, params, anchor):
    q = points - anchor
    # any feasible point lies in the hull of the inner_size points nearest to
    # the anchor, which bounds its distance; scale to that, not to outliers
    dist = np.sort(np.abs(q).max(axis=1))
    scale = dist[params.inner_size - 1]
    if scale == 0.0:
        return anchor.copy()
    q = q / scale
    m, d = q.shape
    subsets = list(itertools.combinations(range(m), params.inner_size))
    k, t = len(subsets), params.inner_size
    nvar = k * t + 2 * d
    A = np.zeros((k * (d + 1), nvar))
    b = np.zeros(k * (d + 1))
    for s, S in enumerate(subsets):
        rows = slice(s * (d + 1), s * (d + 1) + d)
        cols = slice(s * t, (s + 1) * t)
        A[rows, cols] = q[list(S)].T
        A[rows, k * t:k * t + d] = -np.eye(d)
        A[rows, k * t + d:] = np.eye(d)
        A[s * (d + 1) + d, cols] = 1.0
        b[s * (d + 1) + d] = 1.0
    c = np.zeros(nvar)
    c[k * t:] = 1.0
    res = lp_solve(LpProblem(A, b, c=c))
    if res.status != "feasible":
        raise NoIntersectionError("hulls of the inner subsets do not intersect")
    u = res.x[k * t:]
    return anchor + scale * (u[:d] - u[d:])


def hull_intersection_point(points, params, anchor, method="auto"):
    """
    Point common to the convex hulls of all ``d*beta + 1``-subsets of `points`.

    Among such points the one closest to `anchor` in the 1-norm is returned,
    which makes the choice deterministic.

    Parameters
    ----------
    points : array_like, shape ((d+1)*beta + 1, d)
    params : FilterParams
    anchor : array_like, shape (d,)
    method : {"auto", "lp", "interval"}
        ``"auto"`` uses the interval shortcut when ``d == 1``.

    Raises
    ------
    NoIntersectionError
        When the hulls have no common point.
    """
    points = np.asarray(points, dtype=float).reshape(-1, params.d)
    anchor = np.asarray(anchor, dtype=float).reshape(params.d)
    if points.shape[0] != params.outer_size:
        raise InvalidInputError(
            f"expected {params.outer_size} points, got {points.shape[0]}")
    if method == "auto":
        method = "interval" if params.d == 1 else "lp"
    if method == "interval":
        if params.d != 1:
            raise InvalidInputError("interval method only applies to d == 1")
        return _interval_intersection(points, params, anchor)
    return _lp_intersection(points, params, anchor)


def filter_step(inbox, params, return_points=False):
    """
    Average the agent's own state with one hull-intersection point per
    neighbor subset of size ``(d+1)*beta + 1``.

    Neighbor subsets are taken in lexicographic order of sorted neighbor ids
    and each intersection point is anchored at the agent's own state.
    """
    ids = sorted(inbox.messages)
    a_i = count_A_subsets(len(ids), params)
    if params.work(len(ids)) > params.cap:
        raise CapExceededError(
            f"{params.work(len(ids))} hull evaluations exceed the cap of {params.cap}")
    x = inbox.self_state
    total = x.copy()
    ys = []
    for subset in itertools.combinations(ids, params.outer_size):
        pts = np.array([inbox.messages[j] for j in subset])
        y = hull_intersection_point(pts, params, x)
        ys.append(y)
        total += y
    v = total / (1 + a_i)
    return (v, ys) if return_points else v


def eta_bound(neighbor_counts, params):
    """
    Uniform lower bound on the effective consensus weights::

        min_i 1 / ((d*beta + 1) * (1 + a_i) * C((d+1)*beta + 1, d*beta + 1))
    """
    counts = list(neighbor_counts)
    if not counts:
        raise InvalidInputError("no neighbor counts given")
    inner = comb(params.outer_size, params.inner_size)
    worst = max(count_A_subsets(m, params) for m in counts)
    return 1.0 / (params.inner_size * (1 + worst) * inner)


def hull_distance(v, points):
    """1-norm distance from `v` to the convex hull of `points` (via LP)."""
    v = np.asarray(v, dtype=float).reshape(-1)
    P = np.asarray(points, dtype=float).reshape(-1, v.shape[0]) - v
    m, d = P.shape
    if m == 0:
        raise InvalidInputError("need at least one point")
    scale = np.abs(P).max()
    if scale == 0.0:
        return 0.0
    P = P / scale
    A = np.zeros((d + 1, m + 2 * d))
    A[:d, :m] = P.T
    A[:d, m:m + d] = -np.eye(d)
    A[:d, m + d:] = np.eye(d)
    A[d, :m] = 1.0
    b = np.zeros(d + 1)
    b[d] = 1.0
    c = np.zeros(m + 2 * d)
    c[m:] = 1.0
    res = lp_solve(LpProblem(A, b, c=c))
    return scale * float(res.objective)


def verify_hull_membership(v, honest_points, tol=HULL_TOL):
    """Whether `v` lies within `tol` of the convex hull of `honest_points`."""
    return hull_distance(v, honest_points) <= tol
