import json

import numpy as np
import pytest

from resilient_lsq import scenarios
from resilient_lsq.errors import InvalidConfigError
from resilient_lsq.graph import DirectedGraph
from resilient_lsq.redundancy import Network, global_solution_set
from resilient_lsq.sim import (
    STRATEGY_KINDS,
    ByzantineStrategy,
    ReplayAdversary,
    ScenarioConfig,
    StrategyAdversary,
    byzantine_message,
    initial_states,
    load_scenario,
    run,
    save_scenario,
    step,
    validate,
    write_metrics_csv,
    write_trace_csv,
)


def d1_network(n=5, x=2.0):
    As = [np.array([[1.0 + i]]) for i in range(n)]
    return Network.from_arrays(As, [A @ np.array([x]) for A in As])


# ---- strategies -------------------------------------------------------------------------

def test_constant_strategy():
    s = ByzantineStrategy("constant", vector=[3.0, -1.0])
    for t in range(3):
        for rcpt in range(4):
            np.testing.assert_array_equal(byzantine_message(s, t, 4, rcpt, 0, 2, {}), [3.0, -1.0])


def test_conflicting_strategy_differs_by_recipient():
    s = ByzantineStrategy("conflicting-per-recipient", amplitude=100.0)
    honest = {0: np.zeros(2), 1: np.ones(2)}
    m1 = byzantine_message(s, 5, 4, 1, 7, 2, honest)
    m2 = byzantine_message(s, 5, 4, 2, 7, 2, honest)
    assert not np.allclose(m1, m2)
    assert np.linalg.norm(m1 - 0.5) == pytest.approx(100.0)


def test_uniform_random_range():
    s = ByzantineStrategy("uniform-random", amplitude=100.0)
    vals = np.array([byzantine_message(s, t, 3, 0, 11, 3, {}) for t in range(500)])
    assert vals.min() >= -100.0 and vals.max() <= 100.0
    assert vals.std() > 30.0


@pytest.mark.parametrize("kind", STRATEGY_KINDS)
def test_strategies_are_deterministic(kind):
    s = ByzantineStrategy(kind)
    honest = {0: np.array([1.0, 2.0]), 1: np.array([-1.0, 0.5])}
    a = byzantine_message(s, 3, 2, 0, 42, 2, honest)
    b = byzantine_message(s, 3, 2, 0, 42, 2, honest)
    np.testing.assert_array_equal(a, b)
    assert np.all(np.isfinite(a))
    if kind != "constant":
        c = byzantine_message(s, 3, 2, 0, 43, 2, honest)
        assert not np.allclose(a, c)


def test_mimic_offset_tracks_recipient():
    s = ByzantineStrategy("mimic-offset", amplitude=5.0)
    honest = {0: np.array([10.0, 0.0]), 1: np.array([-10.0, 0.0])}
    m0 = byzantine_message(s, 0, 2, 0, 1, 2, honest)
    m1 = byzantine_message(s, 0, 2, 1, 1, 2, honest)
    assert np.linalg.norm(m0 - honest[0]) == pytest.approx(5.0)
    np.testing.assert_allclose(m0 - m1, honest[0] - honest[1])


def test_strategy_validation():
    with pytest.raises(InvalidConfigError):
        ByzantineStrategy("bogus")
    with pytest.raises(InvalidConfigError):
        ByzantineStrategy("constant", amplitude=-1.0)


# ---- validation ----------------------------------------------------------------------------

def test_validate_complete_d1_theorem_covered():
    cfg = ScenarioConfig(DirectedGraph.complete(5), d1_network(), frozenset({4}), beta=1)
    rep = validate(cfg)
    assert rep.resilient and rep.redundant and rep.runnable
    assert rep.theorem_covered


def test_validate_cycle_fails():
    cfg = ScenarioConfig(DirectedGraph.cycle(5), d1_network(), frozenset({4}), beta=1)
    rep = validate(cfg)
    assert rep.resilient is False
    assert not rep.theorem_covered
    assert not rep.runnable


def test_validate_two_faulty_neighbors():
    cfg = ScenarioConfig(DirectedGraph.complete(5), d1_network(), frozenset({3, 4}), beta=1)
    rep = validate(cfg)
    assert not all(rep.byzantine_ok.values())
    assert rep.byzantine_counts[0] == 2
    assert not rep.runnable and not rep.theorem_covered
    with pytest.raises(InvalidConfigError):
        run(cfg)


def test_validate_complete5_d2_is_runnable_but_not_covered():
    # K_5 is not (1, 2)-resilient, yet every honest agent has the 4 neighbors the filter needs
    rep = validate(scenarios.complete_scenario())
    assert rep.runnable
    assert rep.resilient is False
    assert not rep.theorem_covered
    rep6 = validate(scenarios.complete_scenario(n=6, byzantine=(5,)))
    assert rep6.theorem_covered


def test_validate_report_lines_and_dict():
    rep = validate(scenarios.complete_scenario())
    doc = rep.to_dict()
    assert doc["runnable"] is True and doc["theorem_covered"] is False
    assert any(line.startswith("theorem-covered") for line in rep.lines())
    json.dumps(doc)


def test_config_validation():
    net = d1_network()
    with pytest.raises(InvalidConfigError):
        ScenarioConfig(DirectedGraph.complete(4), net)
    with pytest.raises(InvalidConfigError):
        ScenarioConfig(DirectedGraph.complete(5), net, frozenset({7}))
    with pytest.raises(InvalidConfigError):
        ScenarioConfig(DirectedGraph.complete(5), net, init=np.zeros((5, 3)))
    with pytest.raises(InvalidConfigError):
        ScenarioConfig(DirectedGraph.complete(5), net, init={"kind": "grid"})


# ---- step -------------------------------------------------------------------------------------

def test_step_projection_example():
    # single agent A = [[1, 0]], b = [5], no neighbors: v = x, so x' = P x + pinv(A) b
    net = Network.from_arrays([np.array([[1.0, 0.0]])], [np.array([5.0])])
    cfg = ScenarioConfig(DirectedGraph(1, frozenset()), net, beta=0)
    new, _ = step({0: np.array([3.0, 4.0])}, cfg, 0, adversary=None)
    np.testing.assert_allclose(new[0], [5.0, 4.0], atol=1e-12)


def test_step_fixed_point_without_faults():
    net = scenarios.generic_network()
    cfg = ScenarioConfig(DirectedGraph.complete(5), net, beta=1)
    xs = global_solution_set(net).point
    states = {i: xs.copy() for i in range(5)}
    new, _ = step(states, cfg, 0, adversary=None)
    for i in range(5):
        np.testing.assert_allclose(new[i], xs, atol=1e-12)


def test_single_agent_d1_rejected():
    cfg = ScenarioConfig(DirectedGraph(1, frozenset()), d1_network(1), beta=1)
    assert not validate(cfg).runnable
    with pytest.raises(InvalidConfigError):
        run(cfg)


# ---- run ------------------------------------------------------------------------------------------

def test_run_is_deterministic():
    cfg = scenarios.complete_scenario("uniform-random", horizon=20)
    a, b = run(cfg), run(cfg)
    np.testing.assert_array_equal(a.states, b.states)
    c = run(scenarios.complete_scenario("uniform-random", horizon=20, seed=8))
    assert not np.array_equal(a.states, c.states)


def test_replay_reproduces_run():
    cfg = scenarios.complete_scenario("conflicting-per-recipient", horizon=15)
    rec = run(cfg, record_messages=True)
    assert len(rec.messages) == 15 * 4
    again = run(cfg, adversary=ReplayAdversary(rec.messages))
    np.testing.assert_array_equal(rec.states, again.states)


def test_zero_fault_identical_agents_converge_exactly():
    A = np.array([[1.0, 1.0]])
    net = Network.from_arrays([A] * 4, [np.array([2.0])] * 4)
    cfg = ScenarioConfig(DirectedGraph.complete(4), net, beta=0, horizon=60, seed=3)
    tr = run(cfg)
    assert tr.disagreement[-1] < 1e-13
    assert tr.dist_to_xstar[-1] < 1e-13


def test_run_explicit_init_and_invariant_checks():
    cfg = scenarios.complete_scenario("mimic-offset", horizon=30, init=np.full((5, 2), 3.0),
                                      check_invariants=True)
    tr = run(cfg)
    np.testing.assert_array_equal(tr.states[0], np.full((4, 2), 3.0))
    assert tr.hull_ok.shape == (30, 4)
    assert tr.hull_violations == 0


def test_run_forced_cycle_keeps_going():
    cfg = scenarios.cycle_scenario(horizon=40)
    with pytest.raises(InvalidConfigError):
        run(cfg)
    tr = run(cfg, force=True)
    assert tr.states.shape == (41, 4, 2)


def test_initial_states_within_ball():
    cfg = scenarios.complete_scenario(seed=5)
    x0 = initial_states(cfg)
    assert x0.shape == (5, 2)
    assert np.linalg.norm(x0, axis=1).max() <= 10.0
    np.testing.assert_array_equal(x0, initial_states(cfg))


# ---- files ----------------------------------------------------------------------------------------

def test_scenario_round_trip(tmp_path):
    cfg = scenarios.complete_scenario("gaussian-drift", check_invariants=True)
    p = tmp_path / "s.json"
    save_scenario(cfg, str(p))
    back = load_scenario(str(p))
    assert back.to_dict() == cfg.to_dict()
    assert back.graph == cfg.graph and back.strategy == cfg.strategy


@pytest.mark.parametrize("doc", [
    "{broken",
    json.dumps({"graph": {"n": 2, "arcs": []}}),
    json.dumps({"graph": {"n": 2, "arcs": [[0, 0]]}, "agents": [], "beta": 1, "horizon": 1, "seed": 0}),
])
def test_load_scenario_errors(tmp_path, doc):
    p = tmp_path / "bad.json"
    p.write_text(doc)
    with pytest.raises(InvalidConfigError):
        load_scenario(str(p))


def test_csv_writers(tmp_path):
    tr = run(scenarios.complete_scenario(horizon=5))
    write_trace_csv(tr, str(tmp_path / "trace.csv"))
    write_metrics_csv(tr, str(tmp_path / "metrics.csv"))
    trace = np.genfromtxt(tmp_path / "trace.csv", delimiter=",", names=True)
    assert trace.dtype.names == ("t", "agent_id", "x0", "x1")
    assert len(trace) == 6 * 4
    metrics = np.genfromtxt(tmp_path / "metrics.csv", delimiter=",", names=True)
    assert metrics.dtype.names == ("t", "disagreement", "residual", "dist_to_Xstar")
    np.testing.assert_allclose(metrics["disagreement"], tr.disagreement)
