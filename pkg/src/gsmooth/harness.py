"""Experiment configuration, execution, accounting, and CSV emission.

A :class:`ExperimentConfig` describes one experiment: a problem (generated
per seed from the "data" stream), a list of algorithms with their
hyperparameters, an iteration budget, and optional warm-start iterations
shared by every algorithm. Running it yields :class:`ResultRow` records
that serialize to a fixed CSV schema; identical configs and seeds produce
byte-identical CSVs apart from the wall-clock column.
"""
from __future__ import annotations

import json
import os
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import optimizers as opt
from .core import rng_stream
from .objectives import (
    Objective,
    dro_min_eta,
    dro_objective,
    generate_phase_retrieval,
    generate_synthetic_regression,
    load_regression_csv,
    phase_retrieval_objective,
)

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "ConfigError",
    "run_experiment",
    "run_checks",
    "emit_csv",
    "read_result_rows",
    "write_manifest",
    "CSV_HEADER",
]

SCHEMA_VERSION = 1

CSV_HEADER = (
    "experiment,algorithm,seed,t,cumulative_samples,f_value,grad_norm,wall_ms"
)


class ConfigError(ValueError):
    """Raised for malformed experiment configurations."""


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    algorithm: str
    seed: int
    t: int
    cumulative_samples: int
    f_value: float
    grad_norm: float
    wall_ms: float


_CONFIG_KEYS = {
    "schema_version",
    "experiment",
    "problem",
    "algorithms",
    "iterations",
    "seeds",
    "log_every",
    "warm_start",
}

_PROBLEM_KINDS = ("phase_retrieval", "dro_synthetic", "dro_csv")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment."""

    experiment: str
    problem: dict
    algorithms: tuple
    iterations: int
    seeds: tuple = (0,)
    log_every: int = 1
    warm_start: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {self.schema_version}, "
                f"expected {SCHEMA_VERSION}"
            )
        if not self.experiment:
            raise ConfigError("experiment id must be a nonempty string")
        if self.problem.get("kind") not in _PROBLEM_KINDS:
            raise ConfigError(
                f"problem kind must be one of {_PROBLEM_KINDS}, "
                f"got {self.problem.get('kind')!r}"
            )
        if not self.algorithms:
            raise ConfigError("algorithm list must be nonempty")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        labels = []
        for spec in self.algorithms:
            _validate_algorithm(spec, self.iterations)
            labels.append(_series_label(spec))
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate algorithm labels: {labels}")

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "problem": dict(self.problem),
            "algorithms": [dict(a) for a in self.algorithms],
            "iterations": self.iterations,
            "seeds": list(self.seeds),
            "log_every": self.log_every,
            "warm_start": None if self.warm_start is None else dict(self.warm_start),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        unknown = set(payload) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"experiment", "problem", "algorithms", "iterations"} - set(payload)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        return cls(
            experiment=payload["experiment"],
            problem=dict(payload["problem"]),
            algorithms=tuple(dict(a) for a in payload["algorithms"]),
            iterations=int(payload["iterations"]),
            seeds=tuple(int(s) for s in payload.get("seeds", (0,))),
            log_every=int(payload.get("log_every", 1)),
            warm_start=payload.get("warm_start"),
            schema_version=int(payload.get("schema_version", SCHEMA_VERSION)),
        )


_ALGO_KEYS = {
    "gd": {"gamma"},
    "beta-gd": {"gamma", "beta"},
    "clipped-gd": {"gamma", "clip_c"},
    "sgd": {"gamma", "batch"},
    "normalized-sgd": {"gamma", "batch"},
    "momentum-sgd": {"gamma", "batch", "mu"},
    "clipped-sgd": {"gamma", "batch", "clip_c"},
    "spider": {"gamma", "q", "big_batch", "small_batch"},
}


def _series_label(spec: dict) -> str:
    """CSV series name: explicit label, else the algorithm name."""
    return spec.get("label", spec["name"])


def _validate_algorithm(spec: dict, iterations: int) -> None:
    name = spec.get("name")
    if name not in _ALGO_KEYS:
        raise ConfigError(
            f"unknown algorithm {name!r}, expected one of {sorted(_ALGO_KEYS)}"
        )
    allowed = _ALGO_KEYS[name] | {"name", "label", "iterations"}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"algorithm {name!r}: unknown keys {sorted(unknown)}")
    missing = _ALGO_KEYS[name] - set(spec)
    if missing:
        raise ConfigError(f"algorithm {name!r}: missing keys {sorted(missing)}")
    if not spec["gamma"] > 0:
        raise ConfigError(f"algorithm {name!r}: gamma must be > 0")
    if "beta" in spec and not 0.0 <= spec["beta"] <= 1.0:
        raise ConfigError(f"algorithm {name!r}: beta must lie in [0, 1]")
    if "clip_c" in spec and not spec["clip_c"] > 0:
        raise ConfigError(f"algorithm {name!r}: clip_c must be > 0")
    if "batch" in spec and not spec["batch"] >= 1:
        raise ConfigError(f"algorithm {name!r}: batch must be >= 1")
    if "mu" in spec and not 0.0 < spec["mu"] <= 1.0:
        raise ConfigError(f"algorithm {name!r}: mu must lie in (0, 1]")
    if name == "spider":
        t = spec.get("iterations", iterations)
        if t % spec["q"] != 0:
            raise ConfigError(
                f"spider iterations ({t}) must be a multiple of q ({spec['q']})"
            )
        if not spec["big_batch"] >= spec["small_batch"] >= 1:
            raise ConfigError("spider batches must satisfy B >= B' >= 1")


# ---------------------------------------------------------------------------
# Problem construction
# ---------------------------------------------------------------------------


def _build_problem(problem: dict, seed: int):
    """Build (objective, init point, trace_value_fn) for one seed.

    Data comes from the "data" stream; DRO weight initialization from the
    "init" stream. The trace value function maps an iterate to the number
    plotted as f_value (for DRO, the dual-minimized robust loss).
    """
    kind = problem["kind"]
    rng_data = rng_stream(seed, "data")
    if kind == "phase_retrieval":
        inst, _, z0 = generate_phase_retrieval(
            d=int(problem["d"]),
            m=int(problem["m"]),
            rng=rng_data,
            entry_sd_a=float(problem.get("entry_sd_a", np.sqrt(0.5))),
            entry_sd_z=float(problem.get("entry_sd_z", np.sqrt(0.5))),
            noise_sd=float(problem.get("noise_sd", 4.0)),
        )
        return phase_retrieval_objective(inst), z0, None
    if kind == "dro_synthetic":
        inst = generate_synthetic_regression(
            n=int(problem["n"]),
            p=int(problem["p"]),
            noise_sd=float(problem.get("noise_sd", 1.0)),
            rng=rng_data,
            lam=float(problem.get("lam", 0.01)),
            reg_weight=float(problem.get("reg_weight", 0.1)),
        )
    elif kind == "dro_csv":
        inst = load_regression_csv(
            problem["path"],
            target=problem["target"],
            drop_columns=tuple(problem.get("drop_columns", ())),
            n_rows=problem.get("n_rows"),
            target_noise_sd=float(problem.get("target_noise_sd", 1.0)),
            rng=rng_data,
            lam=float(problem.get("lam", 0.01)),
            reg_weight=float(problem.get("reg_weight", 0.1)),
        )
    else:  # pragma: no cover - guarded by config validation
        raise ConfigError(f"unknown problem kind {kind!r}")
    rng_init = rng_stream(seed, "init")
    w0 = np.concatenate(
        [rng_init.standard_normal(inst.p), [float(problem.get("eta0", 0.1))]]
    )

    def robust_value(u):
        _, psi = dro_min_eta(inst, u[:-1], tol=1e-8)
        return psi

    return dro_objective(inst), w0, robust_value


def _run_algorithm(f: Objective, w0, spec: dict, iterations, seed, log_every,
                   trace_value_fn):
    name = spec["name"]
    t = int(spec.get("iterations", iterations))
    if name == "gd":
        return opt.beta_gd(f, w0, spec["gamma"], 0.0, t, seed=seed,
                           trace_value_fn=trace_value_fn)
    if name == "beta-gd":
        return opt.beta_gd(f, w0, spec["gamma"], spec["beta"], t, seed=seed,
                           trace_value_fn=trace_value_fn)
    if name == "clipped-gd":
        return opt.clipped_gd(f, w0, spec["gamma"], spec["clip_c"], t, seed=seed,
                              trace_value_fn=trace_value_fn)
    if name in ("sgd", "normalized-sgd", "momentum-sgd", "clipped-sgd"):
        variant = {
            "sgd": "plain",
            "normalized-sgd": "normalized",
            "momentum-sgd": "normalized_momentum",
            "clipped-sgd": "clipped",
        }[name]
        return opt.sgd_family(
            f,
            w0,
            spec["gamma"],
            t,
            int(spec["batch"]),
            variant=variant,
            mu=spec.get("mu"),
            clip_c=spec.get("clip_c"),
            seed=seed,
            log_every=log_every,
            trace_value_fn=trace_value_fn,
        )
    if name == "spider":
        cfg = opt.SpiderConfig(
            iterations=t,
            q=int(spec["q"]),
            big_batch=int(spec["big_batch"]),
            small_batch=int(spec["small_batch"]),
            gamma=spec["gamma"],
            seed=seed,
        )
        return opt.spider(f, w0, cfg, log_every=log_every,
                          trace_value_fn=trace_value_fn)
    raise ConfigError(f"unknown algorithm {name!r}")  # pragma: no cover


def _warm_start(f: Objective, w0, warm: dict, seed):
    """Run the configured warm-start iterations and return the final iterate."""
    name = warm.get("algorithm")
    t = int(warm["iterations"])
    if name == "beta-gd":
        trace = opt.beta_gd(f, w0, warm["gamma"], warm["beta"], t, seed=seed)
    elif name == "normalized-gd":
        trace = opt.beta_gd(f, w0, warm["gamma"], 1.0, t, seed=seed)
    else:
        raise ConfigError(f"unknown warm-start algorithm {name!r}")
    return trace.final_iterate


def _job(config: ExperimentConfig, alg: dict, seed: int):
    # Each job owns its objective clone so evaluation counters stay per-run.
    f, w0, trace_value_fn = _build_problem(config.problem, seed)
    if config.warm_start is not None:
        warm_f, _, _ = _build_problem(config.problem, seed)
        w0 = _warm_start(warm_f, w0, config.warm_start, seed)
    evals_before = f.eval_count
    label = _series_label(alg)
    rows = []
    try:
        trace = _run_algorithm(
            f, w0, alg, config.iterations, seed, config.log_every, trace_value_fn
        )
    except opt.DivergenceSignal as sig:
        trace = sig.trace
        rows_tail = [
            ResultRow(
                experiment=config.experiment,
                algorithm=label,
                seed=seed,
                t=sig.t_fail,
                cumulative_samples=trace.cum_evals[-1] if trace.cum_evals else 0,
                f_value=float("nan"),
                grad_norm=float("nan"),
                wall_ms=0.0,
            )
        ]
    else:
        rows_tail = []
    for t, fv, gn, ce, wall in zip(
        trace.ts, trace.f_values, trace.grad_norms, trace.cum_evals, trace.wall_ms
    ):
        rows.append(
            ResultRow(
                experiment=config.experiment,
                algorithm=label,
                seed=seed,
                t=t,
                cumulative_samples=ce,
                f_value=fv,
                grad_norm=gn,
                wall_ms=wall,
            )
        )
    rows.extend(rows_tail)
    counter_delta = f.eval_count - evals_before
    return rows, trace, counter_delta


def run_experiment(config: ExperimentConfig, threads: int | None = None):
    """Execute every (algorithm, seed) job and return sorted result rows.

    Jobs fan out to a thread pool capped by ``threads`` or the
    ``GSMOOTH_THREADS`` environment variable; each job owns its objective
    clone and named RNG sub-streams, and rows are merged by sort key, so
    parallelism never changes output bytes. A divergence inside one job
    becomes a truncated series ending in a NaN marker row rather than a
    crash. The final cumulative_samples of each series is cross-checked
    against the objective's evaluation-counter delta.
    """
    jobs = [(alg, seed) for alg in config.algorithms for seed in config.seeds]
    if threads is None:
        threads = int(os.environ.get("GSMOOTH_THREADS", "0")) or min(
            len(jobs), os.cpu_count() or 1
        )
    threads = max(1, min(threads, len(jobs)))
    results = {}
    if threads == 1:
        for alg, seed in jobs:
            results[(_series_label(alg), seed)] = _job(config, alg, seed)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                (_series_label(alg), seed): pool.submit(_job, config, alg, seed)
                for alg, seed in jobs
            }
            results = {key: fut.result() for key, fut in futures.items()}

    rows = []
    for (name, seed), (job_rows, trace, counter_delta) in sorted(results.items()):
        if job_rows and trace.cum_evals:
            if trace.cum_evals[-1] != counter_delta:
                raise RuntimeError(
                    f"sample accounting mismatch for {name} seed {seed}: "
                    f"trace says {trace.cum_evals[-1]}, counter says {counter_delta}"
                )
        rows.extend(job_rows)
    rows.sort(key=lambda r: (r.algorithm, r.seed, r.t))
    return rows


# ---------------------------------------------------------------------------
# CSV and manifest emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows, path) -> None:
    """Write result rows (sorted by algorithm, seed, t) to one CSV file.

    Floats use ``repr`` (shortest round-trip decimal); an empty row list
    yields a header-only file.
    """
    ordered = sorted(rows, key=lambda r: (r.algorithm, r.seed, r.t))
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in ordered:
                fh.write(
                    ",".join(
                        [
                            r.experiment,
                            r.algorithm,
                            str(r.seed),
                            str(r.t),
                            str(r.cumulative_samples),
                            _fmt(r.f_value),
                            _fmt(r.grad_norm),
                            _fmt(r.wall_ms),
                        ]
                    )
                    + "\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_result_rows(path):
    """Parse a harness CSV back into :class:`ResultRow` records."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            cells = line.rstrip("\n").split(",")
            rows.append(
                ResultRow(
                    experiment=cells[0],
                    algorithm=cells[1],
                    seed=int(cells[2]),
                    t=int(cells[3]),
                    cumulative_samples=int(cells[4]),
                    f_value=float(cells[5]),
                    grad_norm=float(cells[6]),
                    wall_ms=float(cells[7]),
                )
            )
    return rows


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=10,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def write_manifest(config: ExperimentConfig, out_dir, elapsed_s: float) -> str:
    """Write manifest.json (config echo, seeds, git describe, timing)."""
    payload = {
        "config": config.to_dict(),
        "seeds": list(config.seeds),
        "git": _git_describe(),
        "elapsed_s": elapsed_s,
        "written_at_unix": int(time.time()),
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# Property-check suites
# ---------------------------------------------------------------------------


def run_checks(suite: str, target: str | None = None, seed: int = 0) -> dict:
    """Run one named property suite at its documented default sizes.

    Returns a JSON-serializable report with a top-level ``passed`` flag.
    Unknown suites raise ``ValueError``.
    """
    from . import checks

    runner = checks.SUITES.get(suite)
    if runner is None:
        raise ValueError(
            f"unknown suite {suite!r}, expected one of {sorted(checks.SUITES)}"
        )
    return runner(target=target, seed=seed)
