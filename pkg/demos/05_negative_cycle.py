"""
The same problem on a directed 5-cycle.  Each agent hears from one neighbor,
far fewer than the filter needs, so validation refuses the scenario.  Forcing
it makes agents fall back to plain averaging and the liar wins.
"""

import logging

from resilient_lsq import scenarios
from resilient_lsq.errors import InvalidConfigError
from resilient_lsq.sim import STRATEGY_KINDS, run, validate

cfg = scenarios.cycle_scenario()
for line in validate(cfg).lines():
    print(line)

try:
    run(cfg)
except InvalidConfigError as exc:
    print("refused:", str(exc).splitlines()[0])

tr = run(cfg, force=True)   # warns once per agent about the beta fallback
print(f"forced run: final disagreement {tr.disagreement[-1]:.3g}")

logging.getLogger("resilient_lsq").setLevel(logging.ERROR)
for kind in STRATEGY_KINDS:
    tr = run(scenarios.cycle_scenario(kind), force=True)
    print(f"{kind:>26}: final disagreement {tr.disagreement[-1]:.3g}")
