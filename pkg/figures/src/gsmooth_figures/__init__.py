"""Render multi-panel convergence figures from gsmooth benchmark CSVs.

This package reads only the documented harness CSV schema
(``experiment,algorithm,seed,t,cumulative_samples,f_value,grad_norm,wall_ms``);
it has no dependency on the optimization library itself.
"""

__version__ = "0.1.0"

from .panels import PanelSpec, load_series, render_figure
