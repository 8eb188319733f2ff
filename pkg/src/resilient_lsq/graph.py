"""
Directed-graph analysis for neighbor graphs.

An arc ``(i, j)`` means agent ``j`` receives from agent ``i``; the in-neighbors
of ``j`` are its neighbors.  Reduced graphs are enumerated exhaustively, never
sampled, because resilience certification has to be exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, prod

from .errors import CapExceededError, InvalidInputError, NotResilientError, NotRootedError

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    arcs: frozenset

    def __post_init__(self):
        arcs = frozenset((int(i), int(j)) for i, j in self.arcs)
        for i, j in arcs:
            if i == j:
                raise InvalidInputError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidInputError(f"arc ({i}, {j}) out of range for n={self.n}")
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def complete(cls, n):
        return cls(n, frozenset((i, j) for i in range(n) for j in range(n) if i != j))

    @classmethod
    def cycle(cls, n):
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    def in_neighbors(self, j):
        return sorted(i for i, k in self.arcs if k == j)

    def out_neighbors(self, i):
        return sorted(k for j, k in self.arcs if j == i)

    def in_degrees(self):
        deg = [0] * self.n
        for _, j in self.arcs:
            deg[j] += 1
        return deg

    def induced(self, vertices):
        """Subgraph induced by `vertices`, relabelled ``0..len-1`` in sorted order."""
        vs = sorted(vertices)
        idx = {v: k for k, v in enumerate(vs)}
        return DirectedGraph(len(vs), frozenset(
            (idx[i], idx[j]) for i, j in self.arcs if i in idx and j in idx))


# ---------------------------------------------------------------- SCCs

def _successors(n, arcs):
    succ = [[] for _ in range(n)]
    for i, j in sorted(arcs):
        succ[i].append(j)
    return succ


def _tarjan(n, succ):
    """Iterative Tarjan.  Returns a component label per vertex."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    labels = [-1] * n
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < len(succ[v]):
                work[-1] = (v, k + 1)
                w = succ[v][k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    labels[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return labels, ncomp


def scc_condensation(g):
    """
    Strongly connected components and the condensation DAG.

    Returns
    -------
    labels : list of int
        Component label per vertex, ``0..c-1``.
    dag_arcs : set of (int, int)
        Arcs between distinct components.
    """
    labels, _ = _tarjan(g.n, _successors(g.n, g.arcs))
    dag = {(labels[i], labels[j]) for i, j in g.arcs if labels[i] != labels[j]}
    return labels, dag


def _roots(n, arcs):
    if n == 0:
        return set()
    labels, ncomp = _tarjan(n, _successors(n, arcs))
    has_in = [False] * ncomp
    for i, j in arcs:
        if labels[i] != labels[j]:
            has_in[labels[j]] = True
    sources = [c for c in range(ncomp) if not has_in[c]]
    if len(sources) != 1:
        return set()
    return {v for v in range(n) if labels[v] == sources[0]}


def roots(g):
    """Vertices from which every vertex is reachable (empty if `g` is not rooted)."""
    return _roots(g.n, g.arcs)


def is_rooted(g):
    return bool(roots(g))


def kappa_of(g):
    """Number of roots of a rooted graph."""
    r = roots(g)
    if not r:
        raise NotRootedError("graph is not rooted")
    return len(r)


# ------------------------------------------------------- reduced graphs

def _check_rs(g, r, s):
    if r < 0 or s < 0 or r + s > g.n - 1:
        raise InvalidInputError(f"need r, s >= 0 and r + s <= n - 1; got r={r}, s={s}, n={g.n}")


def count_reduced_graphs(g, r, s):
    _check_rs(g, r, s)
    total = 0
    for S in itertools.combinations(range(g.n), g.n - r):
        sub = g.induced(S)
        total += prod(comb(k, min(s, k)) for k in sub.in_degrees())
    return total


def _reduced_arc_sets(g, r, s):
    """Yield (kept vertices, arc set relabelled to 0..n-r-1)."""
    for S in itertools.combinations(range(g.n), g.n - r):
        sub = g.induced(S)
        per_vertex = []
        for v in range(sub.n):
            ins = [(i, v) for i in sub.in_neighbors(v)]
            per_vertex.append(list(itertools.combinations(ins, min(s, len(ins)))))
        all_arcs = sub.arcs
        for choice in itertools.product(*per_vertex):
            removed = {a for group in choice for a in group}
            yield S, all_arcs - removed


def enumerate_reduced_graphs(g, r, s, cap=DEFAULT_CAP):
    """
    Yield every (r, s)-reduced graph of `g`.

    Vertex subsets come in lexicographic order; each reduced graph is
    relabelled to ``0..n-r-1`` following the sorted kept vertices.  A vertex
    whose induced in-degree is below `s` loses all of its incoming arcs.

    Raises
    ------
    CapExceededError
        If the number of reduced graphs exceeds `cap`.  The count is computed
        before anything is yielded.
    """
    total = count_reduced_graphs(g, r, s)
    if total > cap:
        raise CapExceededError(f"{total} reduced graphs exceed the cap of {cap}")
    m = g.n - r
    for _, arcs in _reduced_arc_sets(g, r, s):
        yield DirectedGraph(m, arcs)


def degree_witness(g, r, s):
    """
    Look for two vertices that some (r, s)-reduced graph leaves with no
    incoming arcs at all.  Such a graph cannot be rooted, so a witness proves
    `g` is not (r, s)-resilient.

    Returns the pair ``(u, v)`` or ``None``.
    """
    _check_rs(g, r, s)
    if g.n - r < 2:
        return None
    nbrs = [set(g.in_neighbors(v)) for v in range(g.n)]
    for u, v in itertools.combinations(range(g.n), 2):
        nu, nv = nbrs[u] - {v}, nbrs[v] - {u}
        # arcs between u and v cannot be cut by deleting vertices
        need_u = max(0, len(nbrs[u]) - s)
        need_v = max(0, len(nbrs[v]) - s)
        common = len(nu & nv)
        x = min(common, max(need_u, need_v))
        yu, yv = max(0, need_u - x), max(0, need_v - x)
        if yu > len(nu) - common or yv > len(nv) - common:
            continue
        if need_u > len(nu) or need_v > len(nv):
            continue
        if x + yu + yv <= r:
            return (u, v)
    return None


def min_in_degree_ok(g, r, s):
    """Whether every vertex has at least ``r + s + 1`` in-neighbors."""
    return all(k >= r + s + 1 for k in g.in_degrees())


def is_resilient(g, r, s, cap=DEFAULT_CAP, prefilter=True):
    """True iff every (r, s)-reduced graph of `g` is rooted."""
    _check_rs(g, r, s)
    if prefilter and degree_witness(g, r, s) is not None:
        return False
    total = count_reduced_graphs(g, r, s)
    if total > cap:
        raise CapExceededError(f"{total} reduced graphs exceed the cap of {cap}")
    m = g.n - r
    return all(_roots(m, arcs) for _, arcs in _reduced_arc_sets(g, r, s))


def kappa_min(g, r, s, cap=DEFAULT_CAP):
    """
    Smallest number of roots over all (r, s)-reduced graphs.

    Raises
    ------
    NotResilientError
        If some reduced graph is not rooted.
    """
    _check_rs(g, r, s)
    if degree_witness(g, r, s) is not None:
        raise NotResilientError(f"graph is not ({r}, {s})-resilient")
    total = count_reduced_graphs(g, r, s)
    if total > cap:
        raise CapExceededError(f"{total} reduced graphs exceed the cap of {cap}")
    m = g.n - r
    best = m
    for _, arcs in _reduced_arc_sets(g, r, s):
        k = len(_roots(m, arcs))
        if k == 0:
            raise NotResilientError(f"graph is not ({r}, {s})-resilient")
        best = min(best, k)
    return best


# ------------------------------------------------------------ text format

def parse_graph_text(text):
    """Parse ``"n m"`` followed by `m` lines ``"i j"`` (0-indexed)."""
    tokens = text.split()
    try:
        nums = [int(t) for t in tokens]
    except ValueError as exc:
        raise InvalidInputError(f"non-integer token in graph file: {exc}") from None
    if len(nums) < 2:
        raise InvalidInputError("graph file must start with 'n m'")
    n, m = nums[0], nums[1]
    if n < 1 or m < 0 or len(nums) != 2 + 2 * m:
        raise InvalidInputError(f"graph header says n={n}, m={m} but body has {len(nums) - 2} integers")
    arcs = [(nums[2 + 2 * k], nums[3 + 2 * k]) for k in range(m)]
    if len(set(arcs)) != m:
        raise InvalidInputError("duplicate arcs in graph file")
    return DirectedGraph(n, frozenset(arcs))


def format_graph_text(g):
    lines = [f"{g.n} {len(g.arcs)}"]
    lines += [f"{i} {j}" for i, j in sorted(g.arcs)]
    return "\n".join(lines) + "\n"
