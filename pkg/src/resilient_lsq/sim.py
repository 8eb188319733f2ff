"""
Synchronous simulation of resilient distributed least squares.

Each honest agent receives the current states of its honest in-neighbors and
whatever its faulty in-neighbors choose to send, runs :func:`filter_step`,
and then projects the result onto its own solution set::

    x_i(t+1) = P_i v_i(t) + pinv(A_i) b_i

Faulty agents have no state; they are pure message sources.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .errors import (
    CapExceededError,
    InvalidConfigError,
    NotResilientError,
    ResilientLSQError,
)
from .filter import FilterParams, InboxView, filter_step, hull_distance
from .graph import DirectedGraph, is_resilient, kappa_min
from .redundancy import Network, global_solution_set, is_k_redundant

log = logging.getLogger(__name__)

STRATEGY_KINDS = ("constant", "uniform-random", "gaussian-drift",
                  "conflicting-per-recipient", "mimic-offset")
DEFAULT_TOLERANCES = {"converge": 1e-8, "hull": 1e-8}


@dataclass
class ByzantineStrategy:
    """
    How faulty agents pick their messages.

    ``constant``
        always `vector` (or ``amplitude * ones``).
    ``uniform-random``
        uniform on ``[-amplitude, amplitude]^d``, one draw per (t, sender),
        shared by all recipients.
    ``gaussian-drift``
        honest mean plus ``drift_rate * t`` along a fixed per-sender direction
        plus Gaussian noise of scale `amplitude`.
    ``conflicting-per-recipient``
        honest mean plus `amplitude` times a random unit vector drawn
        separately for every recipient.
    ``mimic-offset``
        the recipient's own state shifted by `offset_scale` (defaults to
        `amplitude`) along a fixed per-sender direction.
    """

    kind: str = "conflicting-per-recipient"
    amplitude: float = 100.0
    vector: list | None = None
    drift_rate: float = 1.0
    offset_scale: float | None = None
    seed_offset: int = 0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise InvalidConfigError(f"unknown strategy {self.kind!r}; pick one of {STRATEGY_KINDS}")
        vals = [self.amplitude, self.drift_rate] + ([] if self.offset_scale is None else [self.offset_scale])
        if not np.all(np.isfinite(vals)) or self.amplitude < 0:
            raise InvalidConfigError("strategy parameters must be finite with amplitude >= 0")
        if self.seed_offset < 0:
            raise InvalidConfigError("seed_offset must be nonnegative")

    def to_dict(self):
        return {"kind": self.kind, "amplitude": self.amplitude, "vector": self.vector,
                "drift_rate": self.drift_rate, "offset_scale": self.offset_scale,
                "seed_offset": self.seed_offset}


def _stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _unit(rng, d):
    u = rng.standard_normal(d)
    return u / np.linalg.norm(u)


def byzantine_message(strategy, t, sender, recipient, seed, d, honest_states):
    """
    Message from faulty `sender` to `recipient` at step `t`.

    Deterministic in ``(seed, strategy, t, sender, recipient)`` and in the
    honest states passed in.  `honest_states` maps agent id to its current
    state; adversaries are allowed to see all of it.
    """
    k = strategy.seed_offset
    if strategy.kind == "constant":
        if strategy.vector is not None:
            return np.asarray(strategy.vector, dtype=float).reshape(d)
        return np.full(d, float(strategy.amplitude))
    if strategy.kind == "uniform-random":
        rng = _stream(seed, 1, k, t, sender)
        return rng.uniform(-strategy.amplitude, strategy.amplitude, d)
    center = np.mean(list(honest_states.values()), axis=0) if honest_states else np.zeros(d)
    if strategy.kind == "gaussian-drift":
        direction = _unit(_stream(seed, 2, k, sender), d)
        noise = _stream(seed, 3, k, t, sender).standard_normal(d)
        return center + strategy.drift_rate * t * direction + strategy.amplitude * noise
    if strategy.kind == "conflicting-per-recipient":
        rng = _stream(seed, 4, k, t, sender, recipient)
        return center + strategy.amplitude * _unit(rng, d)
    # mimic-offset
    base = honest_states.get(recipient, center)
    scale = strategy.amplitude if strategy.offset_scale is None else strategy.offset_scale
    return base + scale * _unit(_stream(seed, 5, k, sender), d)


class StrategyAdversary:
    def __init__(self, strategy, seed, d):
        self.strategy, self.seed, self.d = strategy, seed, d

    def message(self, t, sender, recipient, honest_states):
        return byzantine_message(self.strategy, t, sender, recipient, self.seed, self.d, honest_states)


class RecordingAdversary:
    """Wraps another adversary and keeps every message it sends."""

    def __init__(self, inner):
        self.inner = inner
        self.log = {}

    def message(self, t, sender, recipient, honest_states):
        v = self.inner.message(t, sender, recipient, honest_states)
        self.log[(t, sender, recipient)] = np.array(v, dtype=float)
        return v


class ReplayAdversary:
    """Replays a recorded message log, ignoring honest states."""

    def __init__(self, log_):
        self.log = log_

    def message(self, t, sender, recipient, honest_states):
        return self.log[(t, sender, recipient)]


@dataclass
class ScenarioConfig:
    graph: DirectedGraph
    network: Network
    byzantine_set: frozenset = frozenset()
    strategy: ByzantineStrategy = field(default_factory=ByzantineStrategy)
    beta: int = 1
    horizon: int = 300
    seed: int = 0
    init: object = field(default_factory=lambda: {"kind": "random-ball", "radius": 10.0})
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    check_invariants: bool = False
    name: str = "scenario"

    def __post_init__(self):
        self.byzantine_set = frozenset(int(i) for i in self.byzantine_set)
        if self.graph.n != self.network.n:
            raise InvalidConfigError(
                f"graph has {self.graph.n} vertices but network has {self.network.n} agents")
        if any(not 0 <= i < self.graph.n for i in self.byzantine_set):
            raise InvalidConfigError("faulty agent id out of range")
        if len(self.byzantine_set) >= self.graph.n:
            raise InvalidConfigError("at least one honest agent is required")
        if self.beta < 0 or self.horizon < 0:
            raise InvalidConfigError("beta and horizon must be nonnegative")
        if self.seed < 0:
            raise InvalidConfigError("seed must be nonnegative")
        self.tolerances = {**DEFAULT_TOLERANCES, **(self.tolerances or {})}
        if not isinstance(self.init, dict):
            arr = np.asarray(self.init, dtype=float)
            if arr.shape != (self.graph.n, self.d) or not np.all(np.isfinite(arr)):
                raise InvalidConfigError(f"explicit init must be a finite {self.graph.n}x{self.d} array")
            self.init = arr
        elif self.init.get("kind") != "random-ball":
            raise InvalidConfigError(f"unknown init {self.init!r}")

    @property
    def d(self):
        return self.network.d

    @property
    def honest(self):
        return [i for i in range(self.graph.n) if i not in self.byzantine_set]

    @property
    def params(self):
        return FilterParams(self.d, self.beta)

    # -- JSON round trip -------------------------------------------------

    def to_dict(self):
        init = self.init if isinstance(self.init, dict) else self.init.tolist()
        return {
            "name": self.name,
            "graph": {"n": self.graph.n, "arcs": sorted([list(a) for a in self.graph.arcs])},
            "d": self.d,
            "agents": self.network.to_dict()["agents"],
            "byzantine": {"set": sorted(self.byzantine_set), "strategy": self.strategy.kind,
                          "params": {k: v for k, v in self.strategy.to_dict().items() if k != "kind"}},
            "beta": self.beta,
            "horizon": self.horizon,
            "seed": self.seed,
            "init": init,
            "tolerances": dict(self.tolerances),
            "check_invariants": self.check_invariants,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            g = doc["graph"]
            graph = DirectedGraph(int(g["n"]), frozenset(tuple(a) for a in g["arcs"]))
            network = Network.from_dict({"agents": doc["agents"], "d": doc.get("d")})
            byz = doc.get("byzantine", {})
            strategy = ByzantineStrategy(kind=byz.get("strategy", "conflicting-per-recipient"),
                                         **byz.get("params", {}))
            return cls(graph=graph, network=network,
                       byzantine_set=frozenset(byz.get("set", [])),
                       strategy=strategy,
                       beta=int(doc["beta"]),
                       horizon=int(doc["horizon"]),
                       seed=int(doc["seed"]),
                       init=doc.get("init", {"kind": "random-ball", "radius": 10.0}),
                       tolerances=doc.get("tolerances"),
                       check_invariants=bool(doc.get("check_invariants", False)),
                       name=doc.get("name", "scenario"))
        except InvalidConfigError:
            raise
        except ResilientLSQError as exc:
            raise InvalidConfigError(str(exc)) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfigError(f"malformed scenario: {exc!r}") from None


def load_scenario(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{path}: {exc}") from None
    return ScenarioConfig.from_dict(doc)


def save_scenario(config, path):
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------- validation

@dataclass
class ValidationReport:
    resilient: bool | None
    kappa: int | None
    redundancy_required: int | None
    redundant: bool | None
    neighbor_counts: dict
    neighbors_ok: dict
    byzantine_counts: dict
    byzantine_ok: dict
    notes: list
    kappa_label: str = ""

    @property
    def runnable(self):
        """Every honest agent has enough neighbors and at most beta faulty ones."""
        return all(self.neighbors_ok.values()) and all(self.byzantine_ok.values())

    @property
    def theorem_covered(self):
        return bool(self.runnable and self.resilient and self.redundant)

    def to_dict(self):
        return {
            "resilient": self.resilient,
            "kappa": self.kappa,
            "redundancy_required": self.redundancy_required,
            "redundant": self.redundant,
            "neighbor_counts": {str(k): v for k, v in self.neighbor_counts.items()},
            "neighbors_ok": {str(k): v for k, v in self.neighbors_ok.items()},
            "byzantine_counts": {str(k): v for k, v in self.byzantine_counts.items()},
            "byzantine_ok": {str(k): v for k, v in self.byzantine_ok.items()},
            "runnable": self.runnable,
            "theorem_covered": self.theorem_covered,
            "notes": list(self.notes),
        }

    def lines(self):
        yn = lambda b: "n/a" if b is None else ("yes" if b else "no")
        out = [f"graph ({self.kappa_label}) resilient: {yn(self.resilient)}"]
        if self.kappa is not None:
            out.append(f"kappa: {self.kappa}")
        if self.redundancy_required is not None:
            out.append(f"{self.redundancy_required}-redundant: {yn(self.redundant)}")
        bad_n = [i for i, ok in self.neighbors_ok.items() if not ok]
        bad_b = [i for i, ok in self.byzantine_ok.items() if not ok]
        out.append("neighbor counts: ok" if not bad_n else f"neighbor counts too small at agents {bad_n}")
        out.append("faulty-neighbor bound: ok" if not bad_b else f"faulty-neighbor bound exceeded at agents {bad_b}")
        out.append(f"theorem-covered: {yn(self.theorem_covered)}")
        out.extend(f"note: {n}" for n in self.notes)
        return out


def validate(config):
    """
    Check the convergence hypotheses for `config`.

    Failures are recorded in the report rather than raised.  The graph is
    tested for ``(beta, d*beta)``-resilience and the data for
    ``(n - kappa)``-redundancy.
    """
    g, net = config.graph, config.network
    d, beta, n = config.d, config.beta, g.n
    r, s = beta, d * beta
    notes = []
    params = config.params
    need = params.outer_size

    counts, nbr_ok, byz_counts, byz_ok = {}, {}, {}, {}
    for i in config.honest:
        nb = g.in_neighbors(i)
        counts[i] = len(nb)
        nbr_ok[i] = len(nb) >= need
        if nbr_ok[i] and params.work(len(nb)) > params.cap:
            nbr_ok[i] = False
            notes.append(f"agent {i}: filter work {params.work(len(nb))} exceeds cap {params.cap}")
        byz_counts[i] = sum(1 for j in nb if j in config.byzantine_set)
        byz_ok[i] = byz_counts[i] <= beta

    resilient = kappa = required = redundant = None
    if r + s > n - 1:
        resilient = False
        notes.append(f"(beta, d*beta) = ({r}, {s}) exceeds n - 1 = {n - 1}")
    else:
        try:
            resilient = is_resilient(g, r, s)
            if resilient:
                kappa = kappa_min(g, r, s)
        except CapExceededError as exc:
            notes.append(str(exc))
        except NotResilientError:
            resilient = False
    if kappa is not None:
        required = n - kappa
        redundant = is_k_redundant(net, required)
    report = ValidationReport(resilient, kappa, required, redundant, counts, nbr_ok,
                              byz_counts, byz_ok, notes)
    report.kappa_label = f"{r},{s}"
    return report


# ----------------------------------------------------------------- running

@dataclass
class SimulationTrace:
    honest: list
    states: np.ndarray            # (T+1, |H|, d)
    disagreement: np.ndarray      # (T+1,)
    residual: np.ndarray          # (T+1,)
    dist_to_xstar: np.ndarray     # (T+1,)
    hull_ok: np.ndarray | None    # (T, |H|) when invariant checks are on
    hull_distance: np.ndarray | None
    seed: int
    config: dict
    validation: dict
    messages: dict | None = None

    @property
    def horizon(self):
        return self.states.shape[0] - 1

    @property
    def final_states(self):
        return self.states[-1]

    @property
    def hull_violations(self):
        return 0 if self.hull_ok is None else int((~self.hull_ok).sum())


def initial_states(config):
    n, d = config.graph.n, config.d
    if not isinstance(config.init, dict):
        return np.array(config.init, dtype=float)
    radius = float(config.init.get("radius", 10.0))
    out = np.zeros((n, d))
    for i in range(n):
        rng = _stream(config.seed, 0, i)
        u = _unit(rng, d)
        out[i] = radius * rng.uniform() ** (1.0 / d) * u
    return out


def _effective_params(config, neighbor_count):
    """Largest beta' <= beta the neighborhood supports (used only when forced)."""
    d, beta = config.d, config.beta
    while beta > 0 and (d + 1) * beta + 1 > neighbor_count:
        beta -= 1
    return FilterParams(d, beta)


def step(states, config, t, adversary, params_by_agent=None, check=False, hull_tol=None):
    """
    Advance every honest agent by one round.

    Parameters
    ----------
    states : dict
        Honest agent id -> current state.
    adversary : object with ``message(t, sender, recipient, honest_states)``

    Returns
    -------
    new_states : dict
    checks : dict or None
        Honest id -> (in_hull, hull_distance) when `check` is true.
    """
    g, net = config.graph, config.network
    hull_tol = config.tolerances["hull"] if hull_tol is None else hull_tol
    new, checks = {}, ({} if check else None)
    for i in sorted(states):
        nb = g.in_neighbors(i)
        params = params_by_agent[i] if params_by_agent else config.params
        msgs = {}
        for j in nb:
            msgs[j] = states[j] if j in states else adversary.message(t, j, i, states)
        x = states[i]
        if nb and len(nb) >= params.outer_size:
            v = filter_step(InboxView(x, msgs), params)
        else:
            v = x.copy()
        agent = net.agents[i]
        new[i] = agent.projector @ v + agent.local_solve
        if check:
            honest_pts = [x] + [states[j] for j in nb if j in states]
            dist = hull_distance(v, honest_pts)
            checks[i] = (dist <= hull_tol, dist)
    return new, checks


def run(config, force=False, adversary=None, record_messages=False, check_invariants=None):
    """
    Simulate `config` for ``config.horizon`` rounds.

    Parameters
    ----------
    force : bool
        Run even when validation finds an honest agent with too few neighbors
        or too many faulty neighbors.  Agents short of neighbors then fall back
        to the largest beta their neighborhood supports.
    adversary : optional
        Message source for faulty agents; defaults to the configured strategy.
    record_messages : bool
        Keep every faulty message in ``trace.messages`` for replay.
    check_invariants : bool, optional
        Test each filter output against the hull of honest inputs; defaults
        to ``config.check_invariants``.

    Raises
    ------
    InvalidConfigError
        When validation fails and `force` is false.
    """
    report = validate(config)
    if not report.runnable and not force:
        raise InvalidConfigError("scenario failed validation:\n  " + "\n  ".join(report.lines()))
    check = config.check_invariants if check_invariants is None else check_invariants
    d, H = config.d, config.honest
    if adversary is None:
        adversary = StrategyAdversary(config.strategy, config.seed, d)
    if record_messages:
        adversary = RecordingAdversary(adversary)

    params_by_agent = {i: _effective_params(config, len(config.graph.in_neighbors(i))) for i in H}
    for i, p in params_by_agent.items():
        if p.beta != config.beta:
            log.warning("agent %d runs with beta=%d (has %d neighbors)", i, p.beta,
                        len(config.graph.in_neighbors(i)))

    xstar = global_solution_set(config.network)
    x0 = initial_states(config)
    states = {i: x0[i] for i in H}
    T = config.horizon
    traj = np.zeros((T + 1, len(H), d))
    hull_ok = np.ones((T, len(H)), dtype=bool) if check else None
    hull_dist = np.zeros((T, len(H))) if check else None
    traj[0] = [states[i] for i in H]
    for t in range(T):
        try:
            states, checks = step(states, config, t, adversary, params_by_agent, check)
        except ResilientLSQError as exc:
            raise type(exc)(f"step {t}: {exc}") from exc
        traj[t + 1] = [states[i] for i in H]
        if check:
            for k, i in enumerate(H):
                hull_ok[t, k], hull_dist[t, k] = checks[i]
    A, b = config.network.stacked()
    metrics = analysis.metric_series(traj, xstar, A, b)
    return SimulationTrace(
        honest=H, states=traj,
        disagreement=metrics["disagreement"], residual=metrics["residual"],
        dist_to_xstar=metrics["dist_to_xstar"],
        hull_ok=hull_ok, hull_distance=hull_dist,
        seed=config.seed, config=config.to_dict(), validation=report.to_dict(),
        messages=adversary.log if record_messages else None,
    )


def write_trace_csv(trace, path):
    d = trace.states.shape[2]
    with open(path, "w") as fh:
        fh.write(",".join(["t", "agent_id"] + [f"x{k}" for k in range(d)]) + "\n")
        for t in range(trace.states.shape[0]):
            for k, i in enumerate(trace.honest):
                fh.write(",".join([str(t), str(i)] + [repr(float(v)) for v in trace.states[t, k]]) + "\n")


def write_metrics_csv(trace, path):
    with open(path, "w") as fh:
        fh.write("t,disagreement,residual,dist_to_Xstar\n")
        for t in range(trace.states.shape[0]):
            row = (trace.disagreement[t], trace.residual[t], trace.dist_to_xstar[t])
            fh.write(",".join([str(t)] + [repr(float(v)) for v in row]) + "\n")
