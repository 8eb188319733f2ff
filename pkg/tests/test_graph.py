import itertools

import numpy as np
import pytest

from resilient_lsq.errors import CapExceededError, InvalidInputError, NotResilientError, NotRootedError
from resilient_lsq.graph import (
    DirectedGraph,
    count_reduced_graphs,
    degree_witness,
    enumerate_reduced_graphs,
    format_graph_text,
    is_resilient,
    kappa_min,
    kappa_of,
    min_in_degree_ok,
    parse_graph_text,
    roots,
    scc_condensation,
)

from oracles import naive_reduced, naive_resilience, naive_roots

PATH = DirectedGraph(3, {(0, 1), (1, 2)})
CYCLE3 = DirectedGraph.cycle(3)


def random_graph(rng, n, p):
    return DirectedGraph(n, frozenset(
        (i, j) for i in range(n) for j in range(n) if i != j and rng.uniform() < p))


# ---- construction ---------------------------------------------------------------

def test_graph_validation():
    with pytest.raises(InvalidInputError):
        DirectedGraph(2, {(0, 0)})
    with pytest.raises(InvalidInputError):
        DirectedGraph(2, {(0, 2)})


def test_in_neighbors_are_senders():
    g = DirectedGraph(3, {(0, 2), (1, 2)})
    assert g.in_neighbors(2) == [0, 1]
    assert g.out_neighbors(0) == [2]
    assert g.in_degrees() == [0, 0, 2]


# ---- components and roots --------------------------------------------------------

def _partition(labels):
    groups = {}
    for v, c in enumerate(labels):
        groups.setdefault(c, set()).add(v)
    return sorted(map(sorted, groups.values()))


def test_scc_examples():
    labels, dag = scc_condensation(CYCLE3)
    assert _partition(labels) == [[0, 1, 2]] and dag == set()

    labels, dag = scc_condensation(PATH)
    assert _partition(labels) == [[0], [1], [2]]
    assert dag == {(labels[0], labels[1]), (labels[1], labels[2])}

    g = DirectedGraph(4, {(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)})
    labels, dag = scc_condensation(g)
    assert _partition(labels) == [[0, 1], [2, 3]]
    assert dag == {(labels[0], labels[2])}


def test_scc_against_networkx():
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(0)
    for _ in range(100):
        g = random_graph(rng, int(rng.integers(1, 9)), rng.uniform(0.1, 0.5))
        G = nx.DiGraph()
        G.add_nodes_from(range(g.n))
        G.add_edges_from(g.arcs)
        ref = sorted(sorted(c) for c in nx.strongly_connected_components(G))
        assert _partition(scc_condensation(g)[0]) == ref


def test_roots_examples():
    assert roots(PATH) == {0}
    assert roots(CYCLE3) == {0, 1, 2}
    assert roots(DirectedGraph(2, set())) == set()


def test_roots_match_reachability_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        g = random_graph(rng, int(rng.integers(1, 8)), rng.uniform(0.1, 0.6))
        assert roots(g) == naive_roots(range(g.n), list(g.arcs))


def test_kappa_of_examples():
    assert kappa_of(CYCLE3) == 3
    assert kappa_of(PATH) == 1
    assert kappa_of(DirectedGraph(3, {(0, 1), (1, 0), (1, 2)})) == 2
    with pytest.raises(NotRootedError):
        kappa_of(DirectedGraph(2, set()))


# ---- reduced graphs -----------------------------------------------------------------

def test_enumerate_identity_reduction():
    out = list(enumerate_reduced_graphs(PATH, 0, 0))
    assert out == [PATH]


@pytest.mark.parametrize("n, r, s, expected", [(3, 0, 1, 8), (4, 1, 1, 32)])
def test_enumerate_counts(n, r, s, expected):
    g = DirectedGraph.complete(n)
    out = list(enumerate_reduced_graphs(g, r, s))
    assert len(out) == count_reduced_graphs(g, r, s) == expected
    if r == 0:
        assert len(set(out)) == expected
    assert all(h.n == n - r for h in out)


def test_enumerate_matches_naive():
    rng = np.random.default_rng(2)
    for _ in range(30):
        g = random_graph(rng, 5, 0.5)
        for r, s in [(0, 1), (1, 1), (1, 2)]:
            ours = sorted(sorted(h.arcs) for h in enumerate_reduced_graphs(g, r, s))
            ref = []
            for S, arcs in naive_reduced(g.n, list(g.arcs), r, s):
                idx = {v: k for k, v in enumerate(S)}
                ref.append(sorted((idx[a], idx[b]) for a, b in arcs))
            assert ours == sorted(ref)


def test_enumerate_parameter_errors():
    g = DirectedGraph.complete(3)
    with pytest.raises(InvalidInputError):
        list(enumerate_reduced_graphs(g, -1, 0))
    with pytest.raises(InvalidInputError):
        list(enumerate_reduced_graphs(g, 2, 1))
    with pytest.raises(CapExceededError):
        next(enumerate_reduced_graphs(DirectedGraph.complete(6), 1, 2, cap=10))


# ---- resilience ---------------------------------------------------------------------

def test_is_resilient_examples():
    assert is_resilient(DirectedGraph.complete(5), 1, 1)
    assert not is_resilient(DirectedGraph.cycle(5), 1, 1)
    assert is_resilient(DirectedGraph(2, {(0, 1)}), 0, 0)


def test_kappa_min_examples():
    assert kappa_min(DirectedGraph.complete(4), 1, 1) == 2
    assert kappa_min(CYCLE3, 0, 0) == 3
    assert kappa_min(DirectedGraph.cycle(6), 0, 0) == 6
    # regression constant from exhaustive enumeration
    assert kappa_min(DirectedGraph.complete(5), 1, 1) == 3
    with pytest.raises(NotResilientError):
        kappa_min(DirectedGraph.cycle(5), 1, 1)


def test_complete_five_not_one_two_resilient():
    ok, _, _ = naive_resilience(5, list(DirectedGraph.complete(5).arcs), 1, 2)
    assert not ok
    assert not is_resilient(DirectedGraph.complete(5), 1, 2)
    assert is_resilient(DirectedGraph.complete(6), 1, 2)


def test_resilience_matches_naive_on_random_graphs():
    rng = np.random.default_rng(4)
    for _ in range(60):
        g = random_graph(rng, int(rng.integers(2, 6)), rng.uniform(0.3, 0.9))
        for r, s in itertools.product(range(2), range(3)):
            if r + s > g.n - 1:
                continue
            ok, kap, _ = naive_resilience(g.n, list(g.arcs), r, s)
            assert is_resilient(g, r, s) == ok
            assert is_resilient(g, r, s, prefilter=False) == ok
            if ok:
                assert kappa_min(g, r, s) == kap


def test_degree_witness_is_sound():
    rng = np.random.default_rng(5)
    hits = 0
    for _ in range(150):
        g = random_graph(rng, int(rng.integers(2, 7)), rng.uniform(0.2, 0.9))
        for r, s in itertools.product(range(3), range(3)):
            if r + s > g.n - 1:
                continue
            w = degree_witness(g, r, s)
            if w is not None:
                hits += 1
                assert not is_resilient(g, r, s, prefilter=False)
    assert hits > 20


def test_resilience_monotone_in_s():
    # each (r, s)-reduced graph contains an (r, s+1)-reduced one; extra arcs keep roots
    # (no such property in r: deleting more vertices can remove the obstruction)
    rng = np.random.default_rng(6)
    for _ in range(40):
        g = random_graph(rng, int(rng.integers(3, 7)), rng.uniform(0.4, 1.0))
        for r, s in itertools.product(range(3), range(3)):
            if r + s + 1 > g.n - 1:
                continue
            if is_resilient(g, r, s + 1):
                assert is_resilient(g, r, s)


def test_min_in_degree_condition_is_informational():
    # a single arc is (0, 0)-resilient though vertex 0 has no in-neighbors
    g = DirectedGraph(2, {(0, 1)})
    assert not min_in_degree_ok(g, 0, 0)
    assert is_resilient(g, 0, 0)
    assert min_in_degree_ok(DirectedGraph.complete(5), 1, 1)


# ---- text format ----------------------------------------------------------------------

def test_text_round_trip():
    g = DirectedGraph.complete(4)
    assert parse_graph_text(format_graph_text(g)) == g


@pytest.mark.parametrize("text", [
    "", "3", "3 2\n0 1\n", "3 1\n0 x\n", "3 1\n0 0\n", "3 1\n0 5\n", "3 2\n0 1\n0 1\n",
])
def test_text_parse_errors(text):
    with pytest.raises(InvalidInputError):
        parse_graph_text(text)
