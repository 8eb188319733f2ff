"""Builders for the reference scenarios."""

from __future__ import annotations

import numpy as np

from .graph import DirectedGraph
from .redundancy import Network
from .sim import ByzantineStrategy, ScenarioConfig

XSTAR = (1.0, -2.0)


def generic_rows(n, d=2):
    """`n` pairwise non-parallel unit rows in the plane (evenly spread angles)."""
    if d != 2:
        raise ValueError("generic_rows is only defined for d = 2")
    angles = np.pi * (np.arange(n) + 0.5) / n
    return [np.array([[np.cos(a), np.sin(a)]]) for a in angles]


def consistent_network(rows, xstar=XSTAR):
    xstar = np.asarray(xstar, dtype=float)
    return Network.from_arrays(rows, [R @ xstar for R in rows])


def generic_network(n=5, xstar=XSTAR):
    """Every pair of agents pins `xstar`, so the network is (n-2)-redundant."""
    return consistent_network(generic_rows(n), xstar)


def parallel_network(n=5, xstar=XSTAR):
    """All rows are multiples of (1, 0); the solution set is the line x0 = xstar[0]."""
    rows = [np.array([[1.0 + 0.5 * i, 0.0]]) for i in range(n)]
    return consistent_network(rows, xstar)


def complete_scenario(kind="conflicting-per-recipient", network=None, n=5, seed=7,
                      amplitude=100.0, horizon=300, byzantine=(4,), **kw):
    network = generic_network(n) if network is None else network
    return ScenarioConfig(
        graph=DirectedGraph.complete(n), network=network,
        byzantine_set=frozenset(byzantine),
        strategy=ByzantineStrategy(kind=kind, amplitude=amplitude),
        beta=1, horizon=horizon, seed=seed,
        name=f"complete{n}_d{network.d}_beta1", **kw)


def cycle_scenario(kind="uniform-random", n=5, seed=7, amplitude=100.0, horizon=300, **kw):
    """Directed n-cycle with one faulty agent: too sparse for the filter."""
    return ScenarioConfig(
        graph=DirectedGraph.cycle(n), network=generic_network(n),
        byzantine_set=frozenset({n - 1}),
        strategy=ByzantineStrategy(kind=kind, amplitude=amplitude),
        beta=1, horizon=horizon, seed=seed,
        name=f"cycle{n}_d2_beta1", **kw)
