"""
Bayesian handover decisions from a window of SINR samples
=========================================================

Every ``T`` ticks each user looks at the SINR it saw from all stations,
counts how often each station lost a pairwise comparison and turns those
counts into a posterior over which dominance region it is standing in.
"""

import numpy as np

from femtonet import ScenarioConfig, coverage_model, station_layout
from femtonet.association import Assignment, Thresholds
from femtonet.handover import SinrWindow, handover_step, heuristic_handover_step, posterior
from femtonet.radio import build_snapshot

cfg = ScenarioConfig()
xy = station_layout(cfg)
model = coverage_model(cfg, xy)
print("priors   :", np.round(model.priors, 4))
print("epsilon  :", np.round(model.epsilon, 3))

###############################################################################
# Walk one user from the centre femto (station 5) towards the femto at
# (250, 0), which is station 6, collecting a fresh window at each stop.

rng = np.random.default_rng(3)
thr = Thresholds.uniform(cfg.n_stations, cfg.lambda1, 0.3, cfg.delta, cfg.n_max)
assignment = Assignment(cfg.n_stations, 1, cfg.n_max)
assignment.assign(0, 5)

for x in (20.0, 90.0, 115.0, 125.0, 135.0, 160.0):
    window = SinrWindow(cfg.n_stations, cfg.window_len)
    for _ in range(cfg.window_len):
        shadow = rng.normal(0.0, 6.0, (cfg.n_stations, 1))
        window.push(build_snapshot(cfg.stations, xy, [[x, 5.0]], shadow, cfg.radio_globals).eta[:, 0])
    q = posterior(window, model)
    bayes = handover_step(0, 5, window, model, thr, assignment)
    greedy = heuristic_handover_step(0, 5, window, thr, assignment)
    print(f"x={x:5.0f}  mean eta 5/6 = {window.means[5]:.3f}/{window.means[6]:.3f}  1-Q6 = {1 - q[6]:.1e}  "
          f"bayes {bayes.action.value}:{bayes.station}  heuristic {greedy.action.value}:{greedy.station}")

###############################################################################
# Past the midpoint both rules see a weak serving link. The heuristic jumps
# to whichever station had the best average. The Bayesian rule also wants
# the posterior for the target region to clear ``gamma``, which by default
# is 1.0: it moves only once the posterior equals 1 to double precision,
# and a single window of ten samples rarely gets there this close to the
# boundary. Lower ``gamma`` to see it act earlier.

for gamma in (0.5, 1 - 1e-9):
    relaxed = coverage_model(cfg.with_(gamma=gamma), xy)
    print(f"gamma={gamma}: bayes at x=160 ->", handover_step(0, 5, window, relaxed, thr, assignment).action.value)
