"""Panel specifications and deterministic figure rendering.

Each panel plots one benchmark CSV: one line per algorithm, aggregated
over seeds as a median line with a min-max band (single-seed series
degenerate to plain lines). A series whose last row carries NaN values is
a divergence marker: the line stops at its last finite row and gets a
"diverged" annotation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CSV_COLUMNS = (
    "experiment",
    "algorithm",
    "seed",
    "t",
    "cumulative_samples",
    "f_value",
    "grad_norm",
    "wall_ms",
)

_X_AXES = ("iteration", "cumulative_samples")
_Y_AXES = ("f_value", "grad_norm")


@dataclass(frozen=True)
class PanelSpec:
    """One subplot: a CSV path plus axis and style choices.

    ``log_y`` defaults to log scale for objective-value panels, since
    those span orders of magnitude on the benchmark problems.
    """

    csv_path: str
    x_axis: str = "iteration"
    y_axis: str = "f_value"
    log_y: bool | None = None
    title: str = ""
    styles: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.x_axis not in _X_AXES:
            raise ValueError(f"x_axis must be one of {_X_AXES}, got {self.x_axis!r}")
        if self.y_axis not in _Y_AXES:
            raise ValueError(f"y_axis must be one of {_Y_AXES}, got {self.y_axis!r}")

    @property
    def use_log_y(self) -> bool:
        if self.log_y is None:
            return self.y_axis == "f_value"
        return bool(self.log_y)

    @classmethod
    def from_dict(cls, payload: dict) -> "PanelSpec":
        known = {"csv", "x", "y", "log_y", "title", "styles"}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown panel keys: {sorted(unknown)}")
        if "csv" not in payload:
            raise ValueError("panel needs a 'csv' path")
        return cls(
            csv_path=payload["csv"],
            x_axis=payload.get("x", "iteration"),
            y_axis=payload.get("y", "f_value"),
            log_y=payload.get("log_y"),
            title=payload.get("title", ""),
            styles=dict(payload.get("styles", {})),
        )


def load_series(path, x_axis, y_axis):
    """Parse one CSV into ``{algorithm: {seed: (x array, y array)}}``.

    Raises ``ValueError`` naming the file and the missing column when the
    header does not match the harness schema, and on empty files.
    """
    x_col = "t" if x_axis == "iteration" else x_axis
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        for needed in ("algorithm", "seed", x_col, y_axis):
            if needed not in header:
                raise ValueError(f"{path}: missing column {needed!r}")
        idx = {name: header.index(name) for name in header}
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: CSV has a header but no data rows")

    series: dict = {}
    for cells in rows:
        alg = cells[idx["algorithm"]]
        seed = int(cells[idx["seed"]])
        x = float(cells[idx[x_col]])
        y = float(cells[idx[y_axis]])
        series.setdefault(alg, {}).setdefault(seed, []).append((x, y))
    out = {}
    for alg, by_seed in series.items():
        out[alg] = {
            seed: (
                np.array([p[0] for p in pts]),
                np.array([p[1] for p in pts]),
            )
            for seed, pts in by_seed.items()
        }
    return out


def _aggregate(by_seed):
    """Median line and min-max band over seeds; marks divergence.

    A seed series ending in NaN is truncated at its last finite row and
    flags the algorithm as diverged. The x grid is the union over seeds;
    at each x the statistics run over the seeds still alive there.
    """
    cleaned = {}
    diverged = False
    for seed, (x, y) in by_seed.items():
        finite = np.isfinite(y)
        if not finite.all():
            diverged = True
            keep = np.nonzero(finite)[0]
            x, y = x[keep], y[keep]
        if x.size:
            cleaned[seed] = (x, y)
    if not cleaned:
        return np.array([]), np.array([]), np.array([]), np.array([]), True, 0
    grid = np.unique(np.concatenate([x for x, _ in cleaned.values()]))
    stacks = []
    for x, y in cleaned.values():
        col = np.full(grid.size, np.nan)
        col[np.searchsorted(grid, x)] = y
        stacks.append(col)
    mat = np.vstack(stacks)
    alive = np.isfinite(mat)
    has_any = alive.any(axis=0)
    grid = grid[has_any]
    mat = mat[:, has_any]
    median = np.nanmedian(mat, axis=0)
    lo = np.nanmin(mat, axis=0)
    hi = np.nanmax(mat, axis=0)
    return grid, median, lo, hi, diverged, len(cleaned)


def render_figure(panels, out_path, figsize_per_panel=(5.0, 3.6)) -> str:
    """Render one image with one subplot per panel; deterministic output.

    Multi-seed series appear as a median line with a min-max band; the
    legend lists algorithm names; truncated (diverged) series stop at
    their last finite row with a "diverged" annotation. Inputs are never
    mutated and embedded metadata that would vary between runs is
    suppressed, so rendering twice yields identical bytes.
    """
    panels = list(panels)
    if not panels:
        raise ValueError("need at least one panel")
    ncols = 2 if len(panels) > 1 else 1
    nrows = math.ceil(len(panels) / ncols)
    fig, axes = plt.subplots(
        nrows,
        ncols,
        figsize=(figsize_per_panel[0] * ncols, figsize_per_panel[1] * nrows),
        squeeze=False,
    )
    for k, panel in enumerate(panels):
        ax = axes[k // ncols][k % ncols]
        series = load_series(panel.csv_path, panel.x_axis, panel.y_axis)
        for alg in sorted(series):
            grid, median, lo, hi, diverged, n_seeds = _aggregate(series[alg])
            if grid.size == 0:
                continue
            style = dict(panel.styles.get(alg, {}))
            line, = ax.plot(grid, median, label=alg, **style)
            if n_seeds > 1:
                ax.fill_between(grid, lo, hi, alpha=0.2, color=line.get_color())
            if diverged and grid.size:
                ax.annotate(
                    "diverged",
                    (grid[-1], median[-1]),
                    textcoords="offset points",
                    xytext=(4, 4),
                    fontsize=8,
                    color=line.get_color(),
                )
        if panel.use_log_y:
            ax.set_yscale("log")
        ax.set_xlabel(panel.x_axis)
        ax.set_ylabel(panel.y_axis)
        if panel.title:
            ax.set_title(panel.title)
        ax.legend(fontsize=8)
    for k in range(len(panels), nrows * ncols):
        axes[k // ncols][k % ncols].axis("off")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return str(out_path)
