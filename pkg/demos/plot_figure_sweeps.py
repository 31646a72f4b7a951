"""
Reduced versions of the capacity and handover sweeps
====================================================

The full sweeps use 10 runs of 600 ticks per point. Here we run them with
fewer runs and ticks to show the shape of the output table.
"""

from femtonet import ScenarioConfig
from femtonet.cli import figure_table

cfg = ScenarioConfig(runs=4, ticks=200)

for fid in ("fig2", "fig4"):
    table = figure_table(fid, cfg)
    print(f"\n{fid}")
    print("  ".join(table.header))
    for value, scheme, metric, mean, half, runs in table.rows:
        print(f"{value:>4}  {scheme:9s}  {metric:18s}  {mean:12.4g} +/- {half:.3g}  ({runs} runs)")

###############################################################################
# ``femtonet figure fig4 --out fig4.csv`` writes the same rows at the
# package defaults (10 runs, 600 ticks) to a CSV file.
