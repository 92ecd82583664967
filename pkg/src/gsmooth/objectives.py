"""Objective functions: class witnesses, phase retrieval, and DRO.

Every objective is wrapped in an :class:`Objective` oracle bundle that
exposes the value, the full gradient, per-sample gradients, and a counter
of per-sample gradient evaluations. All gradients are hand-derived
(finite-difference verified in the test suite); there is no automatic
differentiation anywhere.
"""
from __future__ import annotations

import csv
import json
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .core import NoiseSpec, SmoothnessSpec

__all__ = [
    "Objective",
    "IngestionError",
    "PhaseRetrievalInstance",
    "DROInstance",
    "make_polynomial_witness",
    "make_exponential_witness",
    "make_quadratic",
    "generate_phase_retrieval",
    "phase_retrieval_objective",
    "phase_retrieval_smoothness",
    "chi2_conjugate",
    "dro_objective",
    "dro_min_eta",
    "load_regression_csv",
    "generate_synthetic_regression",
    "instance_to_json",
    "instance_from_json",
]


class IngestionError(ValueError):
    """Raised when a dataset file cannot be turned into a problem instance."""


class Objective:
    """Oracle bundle for ``f(w) = (1/m) sum_i f_i(w)``.

    Deterministic objectives use ``sample_count = 1`` with the single
    sample equal to ``f`` itself. The evaluation counter tracks
    *per-sample gradient* evaluations: ``sample_grad`` adds 1,
    ``batch_grad`` adds the batch size, ``grad`` adds ``sample_count``
    (a full finite-sum gradient touches every sample once), and
    ``batch_grad_pair`` adds the batch size once even though it returns
    gradients at two points, matching the usual variance-reduction
    accounting where one drawn sample is one oracle access. Diagnostic
    accessors (``value``, ``grad_uncounted``, ``sample_grads``) never
    touch the counter, so harness logging does not distort budgets.
    Increments are lock-protected so concurrent runs stay accurate.
    """

    def __init__(
        self,
        dim,
        value_fn,
        grad_fn,
        sample_count=1,
        sample_grad_fn=None,
        batch_grad_fn=None,
        sample_grads_fn=None,
        name="",
    ):
        if dim < 1 or sample_count < 1:
            raise ValueError("dim and sample_count must be >= 1")
        self.dim = int(dim)
        self.sample_count = int(sample_count)
        self.name = name
        self._value_fn = value_fn
        self._grad_fn = grad_fn
        self._sample_grad_fn = sample_grad_fn
        self._batch_grad_fn = batch_grad_fn
        self._sample_grads_fn = sample_grads_fn
        self._lock = threading.Lock()
        self._evals = 0

    # -- evaluation counter -------------------------------------------------

    @property
    def eval_count(self) -> int:
        return self._evals

    def _count(self, n) -> None:
        with self._lock:
            self._evals += int(n)

    # -- counted oracles ----------------------------------------------------

    def value(self, w) -> float:
        return float(self._value_fn(np.asarray(w, dtype=float)))

    def grad(self, w) -> np.ndarray:
        self._count(self.sample_count)
        return self._grad_fn(np.asarray(w, dtype=float))

    def sample_grad(self, w, index) -> np.ndarray:
        index = int(index)
        if not 0 <= index < self.sample_count:
            raise IndexError(
                f"sample index {index} outside [0, {self.sample_count})"
            )
        self._count(1)
        return self._sample_grad_uncounted(np.asarray(w, dtype=float), index)

    def batch_grad(self, w, indices) -> np.ndarray:
        indices = self._check_indices(indices)
        self._count(indices.size)
        return self._batch_grad_uncounted(np.asarray(w, dtype=float), indices)

    def batch_grad_pair(self, w_new, w_old, indices):
        """Minibatch gradients at two points over one drawn batch.

        Counts ``len(indices)`` once; used by recursive variance-reduction
        corrections whose budget is the number of drawn samples.
        """
        indices = self._check_indices(indices)
        self._count(indices.size)
        w_new = np.asarray(w_new, dtype=float)
        w_old = np.asarray(w_old, dtype=float)
        return (
            self._batch_grad_uncounted(w_new, indices),
            self._batch_grad_uncounted(w_old, indices),
        )

    # -- uncounted diagnostics ----------------------------------------------

    def grad_uncounted(self, w) -> np.ndarray:
        return self._grad_fn(np.asarray(w, dtype=float))

    def sample_grads(self, w) -> np.ndarray:
        """All per-sample gradients stacked into an (m, d) array. Uncounted."""
        w = np.asarray(w, dtype=float)
        if self._sample_grads_fn is not None:
            return self._sample_grads_fn(w)
        return np.stack(
            [self._sample_grad_uncounted(w, i) for i in range(self.sample_count)]
        )

    # -- internals ------------------------------------------------------------

    def _check_indices(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=int).ravel()
        if indices.size == 0:
            raise ValueError("batch must contain at least one index")
        if indices.min() < 0 or indices.max() >= self.sample_count:
            raise IndexError(
                f"batch indices outside [0, {self.sample_count}): "
                f"min={indices.min()}, max={indices.max()}"
            )
        return indices

    def _sample_grad_uncounted(self, w, index) -> np.ndarray:
        if self._sample_grad_fn is not None:
            return self._sample_grad_fn(w, index)
        return self._grad_fn(w)

    def _batch_grad_uncounted(self, w, indices) -> np.ndarray:
        if self._batch_grad_fn is not None:
            return self._batch_grad_fn(w, indices)
        acc = np.zeros(self.dim)
        for i in indices:
            acc += self._sample_grad_uncounted(w, int(i))
        return acc / indices.size


# ---------------------------------------------------------------------------
# Class witnesses
# ---------------------------------------------------------------------------


def make_polynomial_witness(alpha, dim=1) -> Objective:
    """``f(w) = ||w||**((2-a)/(1-a))`` for ``alpha`` in (0, 1).

    The gradient is ``p ||w||**(p-2) w`` with ``p = (2-a)/(1-a)`` and is 0
    at the origin (the exponent ``p - 2 = a/(1-a)`` is positive).
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"polynomial witness needs alpha in (0, 1), got {alpha}")
    p = (2.0 - alpha) / (1.0 - alpha)

    def value(w):
        return float(np.linalg.norm(w)) ** p

    def grad(w):
        r = float(np.linalg.norm(w))
        if r == 0.0:
            return np.zeros_like(w)
        return p * r ** (p - 2.0) * w

    return Objective(dim, value, grad, name=f"poly_witness(alpha={alpha:g})")


def make_exponential_witness(dim=1) -> Objective:
    """``f(w) = exp(||w||) + exp(-||w||)``; gradient 0 at the origin."""

    def value(w):
        r = float(np.linalg.norm(w))
        return math.exp(r) + math.exp(-r)

    def grad(w):
        r = float(np.linalg.norm(w))
        if r == 0.0:
            return np.zeros_like(w)
        return (math.exp(r) - math.exp(-r)) / r * w

    return Objective(dim, value, grad, name="exp_witness")


def make_quadratic(dim=1) -> Objective:
    """``f(w) = 0.5 ||w||^2``, the classical 1-smooth baseline."""

    def value(w):
        return 0.5 * float(w @ w)

    def grad(w):
        return np.array(w, dtype=float)

    return Objective(dim, value, grad, name="quadratic")


# ---------------------------------------------------------------------------
# Phase retrieval
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseRetrievalInstance:
    """Measurement matrix ``A`` (rows a_r) and intensity vector ``y``."""

    a_mat: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a_mat, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"A must be a non-empty 2-D matrix, got shape {a.shape}")
        if y.shape != (a.shape[0],):
            raise ValueError(
                f"y must have one entry per row of A, got {y.shape} vs {a.shape}"
            )
        object.__setattr__(self, "a_mat", a)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.a_mat.shape[0]

    @property
    def dim(self) -> int:
        return self.a_mat.shape[1]

    @property
    def a_max(self) -> float:
        return float(np.linalg.norm(self.a_mat, axis=1).max())

    @property
    def y_max(self) -> float:
        return float(np.abs(self.y).max())


def generate_phase_retrieval(
    d,
    m,
    rng,
    entry_mean_a=0.0,
    entry_sd_a=math.sqrt(0.5),
    entry_mean_z=0.0,
    entry_sd_z=math.sqrt(0.5),
    noise_sd=4.0,
    init_mean=5.0,
    init_sd=math.sqrt(0.5),
):
    """Draw a random phase retrieval problem.

    Measurement rows and the true signal are Gaussian, intensities are
    ``y_r = (a_r . z)^2`` plus Gaussian noise, and the starting point has
    entries centered at ``init_mean``. Draw order is fixed (A, z, noise,
    z0), so the instance is fully determined by the generator state.

    Returns ``(instance, true_signal, init_point)``.
    """
    if d < 1 or m < 1:
        raise ValueError("d and m must be >= 1")
    for name, sd in (("entry_sd_a", entry_sd_a), ("entry_sd_z", entry_sd_z),
                     ("noise_sd", noise_sd), ("init_sd", init_sd)):
        if sd < 0:
            raise ValueError(f"{name} must be >= 0, got {sd}")
    a_mat = entry_mean_a + entry_sd_a * rng.standard_normal((m, d))
    z_true = entry_mean_z + entry_sd_z * rng.standard_normal(d)
    noise = noise_sd * rng.standard_normal(m)
    y = (a_mat @ z_true) ** 2 + noise
    z0 = init_mean + init_sd * rng.standard_normal(d)
    return PhaseRetrievalInstance(a_mat, y), z_true, z0


def phase_retrieval_objective(inst: PhaseRetrievalInstance) -> Objective:
    """Quartic intensity-matching loss ``(1/2m) sum_r (y_r - (a_r.z)^2)^2``.

    The per-sample gradient is the calculus gradient of
    ``f_r(z) = 0.5 (y_r - (a_r.z)^2)^2``, namely
    ``2 ((a_r.z)^2 - y_r)(a_r.z) a_r``.
    """
    a_mat, y = inst.a_mat, inst.y
    m = inst.m

    def value(z):
        s = a_mat @ z
        return float(np.mean((y - s ** 2) ** 2)) / 2.0

    def grad(z):
        s = a_mat @ z
        return (2.0 / m) * (a_mat.T @ ((s ** 2 - y) * s))

    def sample_grad(z, r):
        s = float(a_mat[r] @ z)
        return 2.0 * (s * s - y[r]) * s * a_mat[r]

    def batch_grad(z, idx):
        rows = a_mat[idx]
        s = rows @ z
        return (2.0 / idx.size) * (rows.T @ ((s ** 2 - y[idx]) * s))

    def sample_grads(z):
        s = a_mat @ z
        return (2.0 * (s ** 2 - y) * s)[:, None] * a_mat

    return Objective(
        inst.dim,
        value,
        grad,
        sample_count=m,
        sample_grad_fn=sample_grad,
        batch_grad_fn=batch_grad,
        sample_grads_fn=sample_grads,
        name="phase_retrieval",
    )


def phase_retrieval_smoothness(inst: PhaseRetrievalInstance) -> SmoothnessSpec:
    """Per-sample class constants for the intensity-matching loss.

    ``alpha = 2/3`` with ``L1 = (9/4) a_max**(4/3)`` and
    ``L0 = 2 y_max a_max^2`` where ``a_max``/``y_max`` are the largest
    measurement-row norm and absolute intensity. ``L0`` is floored at a
    tiny positive value when every intensity is exactly zero, since class
    parameters must be strictly positive.
    """
    a_max, y_max = inst.a_max, inst.y_max
    l1 = 2.25 * a_max ** (4.0 / 3.0)
    l0 = max(2.0 * y_max * a_max ** 2, 1e-12)
    return SmoothnessSpec(alpha=2.0 / 3.0, l0=l0, l1=l1)


# ---------------------------------------------------------------------------
# Distributionally robust regression
# ---------------------------------------------------------------------------


def chi2_conjugate(t):
    """Convex conjugate for the chi-square divergence and its derivative.

    ``psi*(t) = 0.25 (t + 2)_+^2 - 1`` with derivative ``0.5 (t + 2)_+``.
    Accepts scalars or arrays; returns ``(value, derivative)``.
    """
    t = np.asarray(t, dtype=float)
    tp = np.maximum(t + 2.0, 0.0)
    value = 0.25 * tp ** 2 - 1.0
    deriv = 0.5 * tp
    if value.ndim == 0:
        return float(value), float(deriv)
    return value, deriv


@dataclass(frozen=True)
class DROInstance:
    """Regression data with a robustness radius ``lam`` and a log regularizer."""

    features: np.ndarray
    targets: np.ndarray
    lam: float
    reg_weight: float = 0.1

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError(f"features must be non-empty 2-D, got shape {x.shape}")
        if y.shape != (x.shape[0],):
            raise ValueError(f"targets must match feature rows, got {y.shape}")
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.reg_weight < 0:
            raise ValueError(f"reg_weight must be >= 0, got {self.reg_weight}")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def dim(self) -> int:
        """Optimization dimension: weights plus the dual shift as last coordinate."""
        return self.p + 1


def _dro_losses(inst: DROInstance, x):
    """Per-sample regularized square losses ell_i(x) and the shared pieces."""
    resid = inst.features @ x - inst.targets
    reg = inst.reg_weight * float(np.sum(np.log1p(np.abs(x))))
    return 0.5 * resid ** 2 + reg, resid


def _dro_reg_grad(inst: DROInstance, x):
    # Subgradient 0 at the kink x_j = 0.
    return inst.reg_weight * np.sign(x) / (1.0 + np.abs(x))


def dro_objective(inst: DROInstance) -> Objective:
    """Dual-form robust loss over ``u = (x, eta)`` with ``eta`` stored last.

    Per sample: ``L_i(x, eta) = lam * psi*((ell_i(x) - eta)/lam) + eta``
    where ``ell_i`` is the regularized square loss. The gradient splits
    into ``psi*'(.) * grad ell_i(x)`` for the weight block and
    ``1 - psi*'(.)`` for the dual coordinate.
    """
    lam = inst.lam
    n = inst.n

    def split(u):
        return u[:-1], float(u[-1])

    def value(u):
        x, eta = split(u)
        losses, _ = _dro_losses(inst, x)
        vals, _ = chi2_conjugate((losses - eta) / lam)
        return lam * float(np.mean(vals)) + eta

    def grad(u):
        x, eta = split(u)
        losses, resid = _dro_losses(inst, x)
        _, s = chi2_conjugate((losses - eta) / lam)
        gx = (inst.features.T @ (s * resid)) / n + float(np.mean(s)) * _dro_reg_grad(inst, x)
        return np.concatenate([gx, [1.0 - float(np.mean(s))]])

    def sample_grad(u, i):
        x, eta = split(u)
        losses, resid = _dro_losses(inst, x)
        _, s_all = chi2_conjugate((losses - eta) / lam)
        s = float(s_all[i])
        gx = s * (resid[i] * inst.features[i] + _dro_reg_grad(inst, x))
        return np.concatenate([gx, [1.0 - s]])

    def batch_grad(u, idx):
        x, eta = split(u)
        rows = inst.features[idx]
        resid = rows @ x - inst.targets[idx]
        reg = inst.reg_weight * float(np.sum(np.log1p(np.abs(x))))
        losses = 0.5 * resid ** 2 + reg
        _, s = chi2_conjugate((losses - eta) / lam)
        gx = (rows.T @ (s * resid)) / idx.size + float(np.mean(s)) * _dro_reg_grad(inst, x)
        return np.concatenate([gx, [1.0 - float(np.mean(s))]])

    def sample_grads(u):
        x, eta = split(u)
        losses, resid = _dro_losses(inst, x)
        _, s = chi2_conjugate((losses - eta) / lam)
        gx = s[:, None] * (resid[:, None] * inst.features + _dro_reg_grad(inst, x)[None, :])
        return np.hstack([gx, (1.0 - s)[:, None]])

    return Objective(
        inst.dim,
        value,
        grad,
        sample_count=n,
        sample_grad_fn=sample_grad,
        batch_grad_fn=batch_grad,
        sample_grads_fn=sample_grads,
        name="dro",
    )


def dro_min_eta(inst: DROInstance, x, tol=1e-8):
    """Minimize the robust loss over the dual shift at fixed weights.

    The partial derivative ``eta -> 1 - mean psi*'((ell_i - eta)/lam)`` is
    continuous and nondecreasing, so bisection applies. The initial
    bracket ``[min ell - 10 lam max(1, n), max ell + 2 lam]`` always
    contains a sign change; it is still expanded geometrically as a
    safeguard, and more than 60 doublings raises ``RuntimeError``.

    Returns ``(eta_star, value_at_eta_star)`` with
    ``|d/d eta| <= tol`` at the output.
    """
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    x = np.asarray(x, dtype=float)
    losses, _ = _dro_losses(inst, x)
    lam = inst.lam

    def deriv(eta):
        _, s = chi2_conjugate((losses - eta) / lam)
        return 1.0 - float(np.mean(s))

    lo = float(losses.min()) - 10.0 * lam * max(1, inst.n)
    hi = float(losses.max()) + 2.0 * lam
    d_lo, d_hi = deriv(lo), deriv(hi)
    doublings = 0
    while d_lo > 0 or d_hi < 0:
        width = max(hi - lo, lam)
        if d_lo > 0:
            lo -= width
            d_lo = deriv(lo)
        if d_hi < 0:
            hi += width
            d_hi = deriv(hi)
        doublings += 1
        if doublings > 60:
            raise RuntimeError(
                "no sign change for the dual-shift derivative after 60 bracket doublings"
            )

    eta = 0.5 * (lo + hi)
    for _ in range(200):
        d = deriv(eta)
        if abs(d) <= tol:
            break
        if d > 0:
            hi = eta
        else:
            lo = eta
        eta = 0.5 * (lo + hi)
    else:
        d = deriv(eta)
        if abs(d) > tol:
            raise RuntimeError(
                f"bisection stalled with |d/d eta| = {abs(d):.3e} > tol = {tol:.3e}"
            )

    vals, _ = chi2_conjugate((losses - eta) / lam)
    return eta, lam * float(np.mean(vals)) + eta


def generate_synthetic_regression(n, p, noise_sd, rng, lam=0.01, reg_weight=0.1) -> DROInstance:
    """Gaussian linear-regression data: desk-scale stand-in for real datasets."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be >= 1")
    features = rng.standard_normal((n, p))
    w_true = rng.standard_normal(p)
    targets = features @ w_true + noise_sd * rng.standard_normal(n)
    return DROInstance(features=features, targets=targets, lam=lam, reg_weight=reg_weight)


_MISSING_MARKERS = ("", "NA")


def load_regression_csv(
    path,
    target,
    drop_columns=(),
    n_rows=None,
    winsor_pct=(1.0, 99.0),
    standardize=True,
    target_noise_sd=0.0,
    rng=None,
    lam=0.01,
    reg_weight=0.1,
) -> DROInstance:
    """Ingest a comma-separated regression dataset.

    Pipeline: drop the configured categorical columns, fill missing cells
    ("NA" or empty) with the per-column median, winsorize every column at
    the given percentiles, optionally standardize each column to zero
    mean and unit variance, then add Gaussian noise to the target. When
    ``n_rows`` is set only the first ``n_rows`` data rows are used.

    Raises :class:`IngestionError` with row/column diagnostics for
    unparsable files, all-missing or zero-variance columns, or a missing
    target column.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise IngestionError(f"{path}: empty file, expected a header row")
            raw_rows = list(reader)
    except OSError as exc:
        raise IngestionError(f"{path}: cannot read file ({exc})") from exc

    header = [h.strip() for h in header]
    if target not in header:
        raise IngestionError(f"{path}: target column {target!r} not in header {header}")
    drop = set(drop_columns)
    missing_drops = drop - set(header)
    if missing_drops:
        raise IngestionError(f"{path}: drop columns not in header: {sorted(missing_drops)}")
    keep = [i for i, h in enumerate(header) if h not in drop]
    names = [header[i] for i in keep]

    if n_rows is not None:
        raw_rows = raw_rows[: int(n_rows)]
    if not raw_rows:
        raise IngestionError(f"{path}: no data rows")

    data = np.empty((len(raw_rows), len(keep)))
    for r, row in enumerate(raw_rows):
        if len(row) != len(header):
            raise IngestionError(
                f"{path}: row {r + 2} has {len(row)} cells, expected {len(header)}"
            )
        for c, i in enumerate(keep):
            cell = row[i].strip()
            if cell in _MISSING_MARKERS:
                data[r, c] = np.nan
            else:
                try:
                    data[r, c] = float(cell)
                except ValueError:
                    raise IngestionError(
                        f"{path}: row {r + 2}, column {names[c]!r}: "
                        f"cannot parse {cell!r} as a number "
                        "(drop categorical columns via drop_columns)"
                    ) from None

    for c, name in enumerate(names):
        col = data[:, c]
        mask = np.isnan(col)
        if mask.all():
            raise IngestionError(f"{path}: column {name!r} has no observed values")
        if mask.any():
            col[mask] = np.nanmedian(col)

    lo_pct, hi_pct = winsor_pct
    if not 0.0 <= lo_pct < hi_pct <= 100.0:
        raise ValueError(f"winsor percentiles must satisfy 0 <= lo < hi <= 100, got {winsor_pct}")
    lo = np.percentile(data, lo_pct, axis=0)
    hi = np.percentile(data, hi_pct, axis=0)
    data = np.clip(data, lo, hi)

    if standardize:
        mean = data.mean(axis=0)
        sd = data.std(axis=0)
        flat = np.nonzero(sd == 0)[0]
        if flat.size:
            raise IngestionError(
                f"{path}: zero-variance column(s) under standardization: "
                f"{[names[int(i)] for i in flat]}"
            )
        data = (data - mean) / sd

    t_idx = names.index(target)
    y = data[:, t_idx].copy()
    x = np.delete(data, t_idx, axis=1)
    if target_noise_sd > 0:
        if rng is None:
            raise ValueError("target_noise_sd > 0 requires an rng")
        y = y + target_noise_sd * rng.standard_normal(y.size)
    return DROInstance(features=x, targets=y, lam=lam, reg_weight=reg_weight)


# ---------------------------------------------------------------------------
# Instance caching (binary-free JSON, matrices stored row-major)
# ---------------------------------------------------------------------------


def instance_to_json(inst) -> str:
    """Serialize a problem instance to the documented JSON layout."""
    if isinstance(inst, PhaseRetrievalInstance):
        payload = {
            "kind": "phase_retrieval",
            "a_mat": inst.a_mat.tolist(),
            "y": inst.y.tolist(),
        }
    elif isinstance(inst, DROInstance):
        payload = {
            "kind": "dro",
            "features": inst.features.tolist(),
            "targets": inst.targets.tolist(),
            "lam": inst.lam,
            "reg_weight": inst.reg_weight,
        }
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")
    return json.dumps(payload)


def instance_from_json(text: str):
    """Inverse of :func:`instance_to_json`."""
    payload = json.loads(text)
    kind = payload.get("kind")
    if kind == "phase_retrieval":
        return PhaseRetrievalInstance(
            a_mat=np.array(payload["a_mat"], dtype=float),
            y=np.array(payload["y"], dtype=float),
        )
    if kind == "dro":
        return DROInstance(
            features=np.array(payload["features"], dtype=float),
            targets=np.array(payload["targets"], dtype=float),
            lam=float(payload["lam"]),
            reg_weight=float(payload["reg_weight"]),
        )
    raise ValueError(f"unknown instance kind {kind!r}")
