"""
Objective redundancy of a partitioned least-squares problem.

A network is k-redundant when every group of ``n - k`` agents has the same
least-squares solution set.  The checks here are properties of the data
``(A_i, b_i)`` alone; which agents later turn out faulty plays no role.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentSystemError, InvalidInputError
from .linalg import (
    AffineSet,
    affine_set_from_normal_eqs,
    affine_sets_equal,
    kernel_projector,
    min_norm_ls_solve,
    rank_factor,
)

SET_TOL = 1e-8


@dataclass
class AgentData:
    """One agent's private pair ``(A, b)`` plus cached projector and local solve."""

    id: int
    A: np.ndarray
    b: np.ndarray
    projector: np.ndarray = field(init=False, repr=False)
    local_solve: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.shape[0]:
            raise InvalidInputError(
                f"agent {self.id}: A has shape {A.shape} but b has {b.shape[0]} entries")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidInputError(f"agent {self.id}: non-finite data")
        self.A, self.b = A, b
        self.projector = kernel_projector(A)
        self.local_solve = min_norm_ls_solve(A, b)

    @property
    def d(self):
        return self.A.shape[1]

    def normal_equations(self):
        return self.A.T @ self.A, self.A.T @ self.b

    def local_set(self):
        """``{x : A'A x = A'b}``."""
        return AffineSet(self.d, self.local_solve, rank_factor(self.A).kernel_basis)


@dataclass
class Network:
    agents: list
    d: int = None

    def __post_init__(self):
        if not self.agents:
            raise InvalidInputError("network has no agents")
        dims = {a.d for a in self.agents}
        if len(dims) != 1:
            raise InvalidInputError(f"agents disagree on column dimension: {sorted(dims)}")
        d = dims.pop()
        if self.d is not None and self.d != d:
            raise InvalidInputError(f"declared d={self.d} but agent data has d={d}")
        self.d = d
        if [a.id for a in self.agents] != list(range(len(self.agents))):
            raise InvalidInputError("agent ids must be 0..n-1 in order")

    @classmethod
    def from_arrays(cls, As, bs):
        return cls([AgentData(i, A, b) for i, (A, b) in enumerate(zip(As, bs))])

    @property
    def n(self):
        return len(self.agents)

    def stacked(self):
        return (np.vstack([a.A for a in self.agents]),
                np.concatenate([a.b for a in self.agents]))

    def to_dict(self):
        return {"n": self.n, "d": self.d,
                "agents": [{"A": a.A.tolist(), "b": a.b.tolist()} for a in self.agents]}

    @classmethod
    def from_dict(cls, doc):
        try:
            agents = [AgentData(i, a["A"], a["b"]) for i, a in enumerate(doc["agents"])]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed agent entry: {exc}") from None
        net = cls(agents, doc.get("d"))
        if "n" in doc and doc["n"] != net.n:
            raise InvalidInputError(f"declared n={doc['n']} but {net.n} agents given")
        return net


def load_network(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}: {exc}") from None
    return Network.from_dict(doc)


def _normalized_normal_eqs(net, S):
    G = sum(net.agents[i].A.T @ net.agents[i].A for i in S)
    h = sum(net.agents[i].A.T @ net.agents[i].b for i in S)
    s = np.linalg.norm(G, 2)
    if s > 0:
        G, h = G / s, h / s
    return G, h


def subset_solution_set(net, S):
    """Least-squares solution set of the agents in `S`."""
    S = sorted(set(S))
    if not S:
        raise InvalidInputError("subset must be nonempty")
    if S[0] < 0 or S[-1] >= net.n:
        raise InvalidInputError(f"subset {S} out of range")
    G, h = _normalized_normal_eqs(net, S)
    return affine_set_from_normal_eqs(G, h)


def global_solution_set(net):
    return subset_solution_set(net, range(net.n))


def is_k_redundant(net, k, tol=SET_TOL):
    """
    Whether all size-``n - k`` agent subsets share one solution set.

    Subsets are visited lexicographically and compared against the first;
    the scan stops at the first mismatch.
    """
    if not (0 <= k <= net.n - 1):
        raise InvalidInputError(f"k must lie in [0, {net.n - 1}], got {k}")
    subsets = itertools.combinations(range(net.n), net.n - k)
    anchor = subset_solution_set(net, next(subsets))
    return all(affine_sets_equal(anchor, subset_solution_set(net, S), tol) for S in subsets)


def max_redundancy(net, tol=SET_TOL):
    # k-redundancy implies (k-1)-redundancy, so the first failure ends the scan
    best = 0
    for k in range(1, net.n):
        if not is_k_redundant(net, k, tol):
            break
        best = k
    return best


def intersection_of_local_sets(net):
    """
    ``∩_i {x : A_i'A_i x = A_i'b_i}`` or ``None`` when the intersection is empty.
    """
    Gs, hs = [], []
    for a in net.agents:
        G, h = a.normal_equations()
        s = np.linalg.norm(G, 2)
        if s > 0:
            G, h = G / s, h / s
        Gs.append(G)
        hs.append(h)
    M, y = np.vstack(Gs), np.concatenate(hs)
    x = min_norm_ls_solve(M, y)
    if np.linalg.norm(M @ x - y) > SET_TOL * (np.linalg.norm(M, 2) * np.linalg.norm(x) + np.linalg.norm(y)):
        return None
    K = rank_factor(M).kernel_basis
    return AffineSet(net.d, x - K @ (K.T @ x), K)


def verify_intersection_characterization(net, tol=SET_TOL):
    """
    Check that the global solution set equals the intersection of the
    per-agent solution sets.  An empty intersection counts as a violation.
    """
    inter = intersection_of_local_sets(net)
    if inter is None:
        return False
    try:
        xstar = global_solution_set(net)
    except InconsistentSystemError:
        return False
    return affine_sets_equal(xstar, inter, tol)
