"""
Estimating the coverage model by Monte Carlo
============================================

The posterior needs two numbers per station. ``pi_i`` is the share of
the disc where station ``i`` has the strongest mean signal. ``epsilon_i``
is how often a user standing there still sees another station win a
comparison once shadowing is added.
"""

import numpy as np

from femtonet import ScenarioConfig, station_layout
from femtonet.handover import calibrate_epsilon, dominance_priors

cfg = ScenarioConfig()
xy = station_layout(cfg)
pi = dominance_priors(cfg.stations, xy, cfg.region, 200_000, seed=0)

for seed in (1, 2):
    cal = calibrate_epsilon(cfg.stations, xy, cfg.region, 5_000, seed=seed)
    print(f"seed {seed}: epsilon", np.round(cal.epsilon, 3))

print("priors        ", np.round(pi, 4))

###############################################################################
# The macro's mean power beats the co-located femto only while
# 15 - 35 log10(d) > -7 - 20 log10(d), i.e. within about 29 m of the
# origin. Everywhere else some femto is stronger, so the macro prior is
# tiny and the eight outer femtos split the rest of the disc.
