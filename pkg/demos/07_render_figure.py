"""Render the two-panel phase retrieval figure from the demo CSVs.

Run demos/04_phase_retrieval_benchmark.py first to produce the CSVs, then
this script (needs the gsmooth-figures package installed) turns them into
one image: objective vs. iteration for the deterministic comparison and
objective vs. sample complexity for the stochastic one.
"""
import os
import sys

try:
    from gsmooth_figures import PanelSpec, render_figure
except ImportError:
    sys.exit("install the figures package first: pip install -e figures/")

OUT = os.path.join(os.path.dirname(__file__), "output")
det_csv = os.path.join(OUT, "phase-retrieval-det-desk.csv")
stoch_csv = os.path.join(OUT, "phase-retrieval-stoch-desk.csv")
if not (os.path.exists(det_csv) and os.path.exists(stoch_csv)):
    sys.exit("run demos/04_phase_retrieval_benchmark.py first")

panels = [
    PanelSpec(det_csv, x_axis="iteration", y_axis="f_value",
              title="phase retrieval, deterministic (desk)"),
    PanelSpec(stoch_csv, x_axis="cumulative_samples", y_axis="f_value",
              title="phase retrieval, stochastic (desk)"),
]
path = render_figure(panels, os.path.join(OUT, "phase-retrieval-desk.png"))
print(f"wrote {path}")
