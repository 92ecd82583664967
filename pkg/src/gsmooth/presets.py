"""Builtin experiment presets reproducing the benchmark protocols.

Paper-scale presets keep every published hyperparameter verbatim (see the
audit table in the README); ``desk=True`` shrinks the problem so the same
pipelines finish in minutes, with step sizes retuned where the smaller
problem changes gradient scales. Stochastic desk presets equalize total
sample budgets so final objectives are comparable at equal cost.
"""
from __future__ import annotations

from .harness import ExperimentConfig

PRESET_NAMES = (
    "phase-retrieval-det",
    "phase-retrieval-stoch",
    "dro-det",
    "dro-stoch",
)

# Desk problem sizes.
_DESK_PR = {"kind": "phase_retrieval", "d": 20, "m": 500}
_DESK_DRO = {"kind": "dro_synthetic", "n": 200, "p": 5, "noise_sd": 1.0, "lam": 0.01}


def _phase_retrieval_det(desk: bool) -> ExperimentConfig:
    if desk:
        problem = dict(_DESK_PR)
        # gd step retuned to the stable knee for the smaller problem
        # (3.2e-3 diverges); normalized variants keep the published steps.
        algorithms = (
            {"name": "gd", "gamma": 1.6e-3},
            {"name": "clipped-gd", "gamma": 0.9, "clip_c": 100.0},
            {"name": "beta-gd", "label": "beta-gd-1/3", "beta": 1.0 / 3.0, "gamma": 0.03},
            {"name": "beta-gd", "label": "beta-gd-2/3", "beta": 2.0 / 3.0, "gamma": 0.1},
            {"name": "beta-gd", "label": "beta-gd-1", "beta": 1.0, "gamma": 0.2},
        )
        seeds = (0, 1, 2, 3, 4)
    else:
        problem = {"kind": "phase_retrieval", "d": 100, "m": 3000}
        algorithms = (
            {"name": "gd", "gamma": 8e-4},
            {"name": "clipped-gd", "gamma": 0.9, "clip_c": 100.0},
            {"name": "beta-gd", "label": "beta-gd-1/3", "beta": 1.0 / 3.0, "gamma": 0.03},
            {"name": "beta-gd", "label": "beta-gd-2/3", "beta": 2.0 / 3.0, "gamma": 0.1},
            {"name": "beta-gd", "label": "beta-gd-1", "beta": 1.0, "gamma": 0.2},
        )
        seeds = (0,)
    return ExperimentConfig(
        experiment="phase-retrieval-det" + ("-desk" if desk else ""),
        problem=problem,
        algorithms=algorithms,
        iterations=500,
        seeds=seeds,
    )


def _phase_retrieval_stoch(desk: bool) -> ExperimentConfig:
    if desk:
        problem = dict(_DESK_PR)
        # The full 100-iteration warm start already solves the shrunken
        # problem, leaving nothing to compare; 20 iterations lands at the
        # paper's mid-descent regime. SGD-family budget: 500 iterations x
        # batch 50 = 25000 samples; SPIDER fills the same budget with
        # 62 epochs x (200 + 4 x 50) = 24800 and an anchor batch retuned
        # for the smaller sum.
        warm = {
            "algorithm": "beta-gd",
            "beta": 2.0 / 3.0,
            "gamma": 0.1,
            "iterations": 20,
        }
        algorithms = (
            {"name": "sgd", "gamma": 2e-4, "batch": 50},
            {"name": "normalized-sgd", "gamma": 2e-3, "batch": 50},
            {"name": "momentum-sgd", "gamma": 3e-3, "mu": 1e-4, "batch": 50},
            {"name": "clipped-sgd", "gamma": 0.3, "clip_c": 1e3, "batch": 50},
            {
                "name": "spider",
                "gamma": 0.02,
                "q": 5,
                "big_batch": 200,
                "small_batch": 50,
                "iterations": 310,
            },
        )
        seeds = (0, 1, 2, 3, 4)
    else:
        warm = {
            "algorithm": "beta-gd",
            "beta": 2.0 / 3.0,
            "gamma": 0.1,
            "iterations": 100,
        }
        problem = {"kind": "phase_retrieval", "d": 100, "m": 3000}
        algorithms = (
            {"name": "sgd", "gamma": 2e-4, "batch": 50},
            {"name": "normalized-sgd", "gamma": 2e-3, "batch": 50},
            {"name": "momentum-sgd", "gamma": 3e-3, "mu": 1e-4, "batch": 50},
            {"name": "clipped-sgd", "gamma": 0.3, "clip_c": 1e3, "batch": 50},
            {
                "name": "spider",
                "gamma": 0.01,
                "q": 5,
                "big_batch": 3000,
                "small_batch": 50,
            },
        )
        seeds = (0,)
    return ExperimentConfig(
        experiment="phase-retrieval-stoch" + ("-desk" if desk else ""),
        problem=problem,
        algorithms=algorithms,
        iterations=500,
        seeds=seeds,
        warm_start=warm,
    )


def _dro_det(desk: bool) -> ExperimentConfig:
    if desk:
        problem = dict(_DESK_DRO)
        seeds = (0, 1, 2, 3, 4)
    else:
        problem = {
            "kind": "dro_csv",
            "path": "data/life_expectancy.csv",
            "target": "Life expectancy",
            "drop_columns": ["Country", "Status"],
            "n_rows": 2000,
            "target_noise_sd": 1.0,
            "lam": 0.01,
        }
        seeds = (0,)
    algorithms = (
        {"name": "gd", "gamma": 1e-4},
        {"name": "clipped-gd", "gamma": 0.3, "clip_c": 10.0},
        {"name": "beta-gd", "label": "normalized-gd", "beta": 1.0, "gamma": 0.2},
    )
    return ExperimentConfig(
        experiment="dro-det" + ("-desk" if desk else ""),
        problem=problem,
        algorithms=algorithms,
        iterations=50,
        seeds=seeds,
    )


def _dro_stoch(desk: bool) -> ExperimentConfig:
    warm = {"algorithm": "normalized-gd", "gamma": 0.2, "iterations": 30}
    if desk:
        problem = dict(_DESK_DRO)
        # SGD-family budget: 500 x 50 = 25000; SPIDER: 62 epochs x
        # (200 + 19 x 50) = 71300 at paper shape would overshoot, so the
        # desk epoch uses q=20, B=200 (clamped to n), B'=50:
        # per epoch 200 + 19 x 50 = 1150; 21 epochs x 1150 = 24150 <= 25000.
        algorithms = (
            {"name": "sgd", "gamma": 2e-4, "batch": 50},
            {"name": "normalized-sgd", "gamma": 8e-3, "batch": 50},
            {"name": "momentum-sgd", "gamma": 8e-3, "mu": 1e-4, "batch": 50},
            {"name": "clipped-sgd", "gamma": 0.05, "clip_c": 100.0, "batch": 50},
            {
                "name": "spider",
                "gamma": 4e-3,
                "q": 20,
                "big_batch": 200,
                "small_batch": 50,
                "iterations": 420,
            },
        )
        iterations = 500
        seeds = (0, 1, 2, 3, 4)
    else:
        problem = {
            "kind": "dro_csv",
            "path": "data/life_expectancy.csv",
            "target": "Life expectancy",
            "drop_columns": ["Country", "Status"],
            "n_rows": 2000,
            "target_noise_sd": 1.0,
            "lam": 0.01,
        }
        algorithms = (
            {"name": "sgd", "gamma": 2e-4, "batch": 50},
            {"name": "normalized-sgd", "gamma": 8e-3, "batch": 50},
            {"name": "momentum-sgd", "gamma": 8e-3, "mu": 1e-4, "batch": 50},
            {"name": "clipped-sgd", "gamma": 0.05, "clip_c": 100.0, "batch": 50},
            {
                "name": "spider",
                "gamma": 4e-3,
                "q": 20,
                "big_batch": 2000,
                "small_batch": 50,
            },
        )
        iterations = 5000
        seeds = (0,)
    return ExperimentConfig(
        experiment="dro-stoch" + ("-desk" if desk else ""),
        problem=problem,
        algorithms=algorithms,
        iterations=iterations,
        seeds=seeds,
        warm_start=warm,
    )


def preset(name: str, desk: bool = False) -> ExperimentConfig:
    """Return the named builtin experiment configuration."""
    builders = {
        "phase-retrieval-det": _phase_retrieval_det,
        "phase-retrieval-stoch": _phase_retrieval_stoch,
        "dro-det": _dro_det,
        "dro-stoch": _dro_stoch,
    }
    if name not in builders:
        raise ValueError(f"unknown preset {name!r}, expected one of {PRESET_NAMES}")
    return builders[name](desk)
