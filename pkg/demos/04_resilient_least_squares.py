"""
Five agents on a complete graph solve a 2-D least-squares problem while one
of them lies.  Every adversary kind is tried; the honest agents still agree
on the exact solution, geometrically fast.
"""

import numpy as np

from resilient_lsq import scenarios
from resilient_lsq.analysis import report
from resilient_lsq.redundancy import global_solution_set
from resilient_lsq.sim import STRATEGY_KINDS, run, validate

cfg = scenarios.complete_scenario()
for line in validate(cfg).lines():
    print(line)

xstar = global_solution_set(cfg.network)
A, b = cfg.network.stacked()
for kind in STRATEGY_KINDS:
    cfg = scenarios.complete_scenario(kind, check_invariants=True)
    tr = run(cfg)
    rep = report(tr, xstar, A, b)
    print(f"{kind:>26}: disagreement {tr.disagreement[-1]:.1e}, "
          f"lambda_hat {rep.lambda_hat:.3f}, limit {np.round(rep.limit_point, 10)}, "
          f"hull violations {tr.hull_violations}")

# with parallel rows X* is a line; the limit depends on the start
net = scenarios.parallel_network()
for seed in (1, 2):
    tr = run(scenarios.complete_scenario(network=net, seed=seed))
    print(f"parallel rows, seed {seed}: limit {tr.final_states.mean(0).round(6)}")
