"""Desk-scale phase retrieval benchmark: the full harness pipeline.

Builds the deterministic and stochastic desk presets, runs every
algorithm over five seeds, writes the harness CSVs, and prints the final
median objectives. The stochastic preset pits the SGD family against
SPIDER at an equal per-sample budget.
"""
import collections
import os

import numpy as np

from gsmooth import emit_csv, preset, run_experiment, write_manifest

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

for name in ("phase-retrieval-det", "phase-retrieval-stoch"):
    config = preset(name, desk=True)
    rows = run_experiment(config)
    path = os.path.join(OUT, f"{config.experiment}.csv")
    emit_csv(rows, path)
    write_manifest(config, OUT, elapsed_s=0.0)

    finals = collections.defaultdict(dict)
    budgets = collections.defaultdict(int)
    for r in rows:
        finals[r.algorithm][r.seed] = r.f_value
        budgets[r.algorithm] = max(budgets[r.algorithm], r.cumulative_samples)
    print(f"{config.experiment}: wrote {path}")
    for alg in sorted(finals):
        median = np.median(list(finals[alg].values()))
        print(f"  {alg:16s} median final objective {median:10.4f} "
              f"(budget {budgets[alg]})")
    print()
