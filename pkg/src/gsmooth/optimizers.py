"""Gradient methods for generalized-smooth problems.

Deterministic normalized descent (with plain and clipped variants), the
SGD family, the SPIDER recursive variance-reduction method, theoretical
hyperparameter calculators, and a constructive divergence certificate for
under-normalized descent.

All stochastic draws go through named sub-streams of :func:`rng_stream`
("batch" for minibatch indices, "output-index" for the uniformly sampled
output iterate), so runs with equal seeds are bit-identical.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    NoiseSpec,
    SmoothnessSpec,
    derive_det_constants,
    derive_stoch_constants,
    rng_stream,
)
from .objectives import Objective, make_exponential_witness

__all__ = [
    "RunTrace",
    "SpiderConfig",
    "DetPlan",
    "DivergenceSignal",
    "CertificateResult",
    "beta_gd",
    "clipped_gd",
    "sgd_family",
    "spider",
    "theoretical_gamma_det",
    "theoretical_spider_hyperparams",
    "divergence_certificate",
]

# A finite iterate whose norm (or objective value) exceeds this is treated
# as numerically divergent.
DIVERGENCE_LIMIT = 1e12


@dataclass
class RunTrace:
    """Per-iteration log of an optimizer run.

    Parallel lists hold ``t``, ``f(w_t)``, ``||grad f(w_t)||``, cumulative
    per-sample gradient evaluations, and elapsed wall milliseconds at each
    logged iteration. A full-length run holds T + 1 records (including
    t = 0). The output iterate is the one at the uniformly drawn index.
    """

    ts: list = field(default_factory=list)
    f_values: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    cum_evals: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)
    final_iterate: np.ndarray | None = None
    output_index: int | None = None
    output_iterate: np.ndarray | None = None
    diverged: bool = False
    note: str = ""

    def append(self, t, f_value, grad_norm, evals, wall):
        self.ts.append(int(t))
        self.f_values.append(float(f_value))
        self.grad_norms.append(float(grad_norm))
        self.cum_evals.append(int(evals))
        self.wall_ms.append(float(wall))

    def __len__(self):
        return len(self.ts)


class DivergenceSignal(RuntimeError):
    """Raised when an iterate leaves the numerically trustworthy region.

    Carries the truncated trace and the index of the offending step, so
    harnesses can record a truncated series instead of crashing.
    """

    def __init__(self, trace: RunTrace, t_fail: int, reason: str):
        super().__init__(f"divergence at t={t_fail}: {reason}")
        trace.diverged = True
        trace.note = reason
        self.trace = trace
        self.t_fail = t_fail


@dataclass(frozen=True)
class DetPlan:
    """Step size and iteration budget from the deterministic rate theory."""

    gamma: float
    iterations: int


@dataclass(frozen=True)
class SpiderConfig:
    """SPIDER hyperparameters: epoch size q, batch sizes B >= B', step gamma."""

    iterations: int
    q: int
    big_batch: int
    small_batch: int
    gamma: float
    seed: int = 0

    def __post_init__(self):
        if self.q < 1 or self.iterations < 1:
            raise ValueError("iterations and q must be >= 1")
        if self.iterations % self.q != 0:
            raise ValueError(
                f"iterations must be a multiple of q, got {self.iterations} vs q={self.q}"
            )
        if not self.big_batch >= self.small_batch >= 1:
            raise ValueError(
                f"need B >= B' >= 1, got B={self.big_batch}, B'={self.small_batch}"
            )
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


def _norm(v) -> float:
    return float(np.linalg.norm(v))


class _Logger:
    """Shared record/guard logic for all optimizer loops."""

    def __init__(self, f: Objective, trace_value_fn=None):
        self.f = f
        self.value = trace_value_fn if trace_value_fn is not None else f.value
        self.trace = RunTrace()
        self.t0 = time.monotonic()

    def wall(self):
        return (time.monotonic() - self.t0) * 1e3

    def log(self, t, w, evals, grad_norm=None):
        if grad_norm is None:
            grad_norm = _norm(self.f.grad_uncounted(w))
        fv = self.value(w)
        self.trace.append(t, fv, grad_norm, evals, self.wall())
        if not (math.isfinite(fv) and math.isfinite(grad_norm)):
            raise DivergenceSignal(self.trace, t, "non-finite objective or gradient")
        if abs(fv) > DIVERGENCE_LIMIT:
            raise DivergenceSignal(self.trace, t, "objective value exceeded 1e12")

    def guard_iterate(self, t, w):
        if not np.all(np.isfinite(w)):
            raise DivergenceSignal(self.trace, t, "non-finite iterate")
        if _norm(w) > DIVERGENCE_LIMIT:
            # The iterate is still finite: log it so the trace shows the
            # blow-up, then signal.
            self.log(t, w, self.trace.cum_evals[-1] if self.trace.cum_evals else 0)
            raise DivergenceSignal(self.trace, t, "iterate norm exceeded 1e12")


def _draw_output_index(seed, horizon) -> int:
    return int(rng_stream(seed, "output-index").integers(0, horizon))


def beta_gd(
    f: Objective,
    w0,
    gamma: float,
    beta: float,
    iterations: int,
    grad_zero_policy: str = "zero-step",
    seed: int = 0,
    trace_value_fn=None,
) -> RunTrace:
    """Normalized descent ``w <- w - gamma * g / ||g||**beta``.

    ``beta = 0`` is plain gradient descent (using ``0**0 = 1`` when the
    gradient vanishes) and ``beta = 1`` is fully normalized descent. At an
    exactly zero gradient with ``beta > 0`` the direction is undefined:
    policy "zero-step" keeps iterating in place, policy "halt" stops and
    pads the trace to full length. Raises :class:`DivergenceSignal` when
    iterates blow up.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if grad_zero_policy not in ("zero-step", "halt"):
        raise ValueError(f"unknown grad_zero_policy {grad_zero_policy!r}")

    w = np.array(w0, dtype=float)
    logger = _Logger(f, trace_value_fn)
    trace = logger.trace
    out_t = _draw_output_index(seed, iterations)
    evals = 0
    for t in range(iterations):
        g = f.grad(w)
        evals += f.sample_count
        gn = _norm(g)
        logger.log(t, w, evals, gn)
        if t == out_t:
            trace.output_index, trace.output_iterate = out_t, w.copy()
        if gn == 0.0 and beta > 0.0:
            if grad_zero_policy == "halt":
                for pad_t in range(t + 1, iterations + 1):
                    trace.append(pad_t, trace.f_values[-1], 0.0, evals, logger.wall())
                trace.note = f"halted at stationary point, t={t}"
                if trace.output_index is None:
                    trace.output_index, trace.output_iterate = out_t, w.copy()
                break
            continue
        w = w - gamma * g / gn ** beta
        logger.guard_iterate(t + 1, w)
    else:
        logger.log(iterations, w, evals)
    trace.final_iterate = w
    return trace


def clipped_gd(
    f: Objective,
    w0,
    gamma: float,
    clip_c: float,
    iterations: int,
    seed: int = 0,
    trace_value_fn=None,
) -> RunTrace:
    """Clipped descent ``w <- w - gamma * g / max(||g||, C)``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if not clip_c > 0:
        raise ValueError(f"clip_c must be > 0, got {clip_c}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")

    w = np.array(w0, dtype=float)
    logger = _Logger(f, trace_value_fn)
    trace = logger.trace
    out_t = _draw_output_index(seed, iterations)
    evals = 0
    for t in range(iterations):
        g = f.grad(w)
        evals += f.sample_count
        gn = _norm(g)
        logger.log(t, w, evals, gn)
        if t == out_t:
            trace.output_index, trace.output_iterate = out_t, w.copy()
        w = w - gamma * g / max(gn, clip_c)
        logger.guard_iterate(t + 1, w)
    logger.log(iterations, w, evals)
    trace.final_iterate = w
    return trace


_SGD_VARIANTS = ("plain", "normalized", "normalized_momentum", "clipped")


def sgd_family(
    f: Objective,
    w0,
    gamma: float,
    iterations: int,
    batch: int,
    variant: str = "plain",
    mu: float | None = None,
    clip_c: float | None = None,
    seed: int = 0,
    log_every: int = 1,
    with_replacement: bool = True,
    trace_value_fn=None,
) -> RunTrace:
    """Minibatch SGD variants sharing one sampling and logging scheme.

    Variants: "plain" (w - gamma g), "normalized" (unit direction),
    "normalized_momentum" (convex momentum m = (1-mu) m + mu g seeded with
    the first gradient, then a unit step along m), and "clipped"
    (w - gamma g / max(||g||, C)). Minibatch indices are drawn uniformly
    with replacement from the "batch" stream (a without-replacement flag
    exists for practical runs). The trace logs the true objective and full
    gradient norm every ``log_every`` iterations through the uncounted
    diagnostic path, so logging never distorts the sample budget. A zero
    stochastic gradient under the normalized variants takes a zero step.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if variant not in _SGD_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {_SGD_VARIANTS}")
    if variant == "normalized_momentum" and not (mu is not None and 0.0 < mu <= 1.0):
        raise ValueError("normalized_momentum needs mu in (0, 1]")
    if variant == "clipped" and not (clip_c is not None and clip_c > 0):
        raise ValueError("clipped needs clip_c > 0")
    if log_every < 1:
        raise ValueError("log_every must be >= 1")

    w = np.array(w0, dtype=float)
    n = f.sample_count
    rng_batch = rng_stream(seed, "batch")
    logger = _Logger(f, trace_value_fn)
    trace = logger.trace
    out_t = _draw_output_index(seed, iterations)
    momentum = None
    evals = 0
    for t in range(iterations):
        if t % log_every == 0:
            logger.log(t, w, evals)
        if t == out_t:
            trace.output_index, trace.output_iterate = out_t, w.copy()
        if with_replacement:
            idx = rng_batch.integers(0, n, size=batch)
        else:
            idx = rng_batch.choice(n, size=min(batch, n), replace=False)
        g = f.batch_grad(w, idx)
        evals += idx.size
        if variant == "plain":
            step = gamma * g
        elif variant == "normalized":
            gn = _norm(g)
            step = gamma * g / gn if gn > 0 else np.zeros_like(g)
        elif variant == "normalized_momentum":
            momentum = g.copy() if momentum is None else (1.0 - mu) * momentum + mu * g
            mn = _norm(momentum)
            step = gamma * momentum / mn if mn > 0 else np.zeros_like(g)
        else:
            step = gamma * g / max(_norm(g), clip_c)
        w = w - step
        logger.guard_iterate(t + 1, w)
    logger.log(iterations, w, evals)
    trace.final_iterate = w
    return trace


def spider(f: Objective, w0, cfg: SpiderConfig, log_every: int = 1,
           trace_value_fn=None) -> RunTrace:
    """SPIDER: normalized steps along a recursively corrected estimator.

    At epoch starts (t mod q = 0) the estimator is a fresh big-batch
    gradient; otherwise ``v <- v + grad_S(w_t) - grad_S(w_{t-1})`` over a
    fresh small batch, evaluated at both points on the same drawn batch
    (one oracle access per drawn sample, so the total budget over K
    epochs is exactly K(B + (q-1)B')). Steps have length exactly
    ``gamma`` whenever the estimator is nonzero; ``v = 0`` takes a zero
    step.
    """
    if log_every < 1:
        raise ValueError("log_every must be >= 1")
    w = np.array(w0, dtype=float)
    w_prev = None
    v = None
    n = f.sample_count
    rng_batch = rng_stream(cfg.seed, "batch")
    logger = _Logger(f, trace_value_fn)
    trace = logger.trace
    out_t = _draw_output_index(cfg.seed, cfg.iterations)
    evals = 0
    for t in range(cfg.iterations):
        if t % log_every == 0:
            logger.log(t, w, evals)
        if t == out_t:
            trace.output_index, trace.output_iterate = out_t, w.copy()
        if t % cfg.q == 0:
            idx = rng_batch.integers(0, n, size=cfg.big_batch)
            v = f.batch_grad(w, idx)
            evals += idx.size
        else:
            idx = rng_batch.integers(0, n, size=cfg.small_batch)
            g_new, g_old = f.batch_grad_pair(w, w_prev, idx)
            v = v + g_new - g_old
            evals += idx.size
        if not np.all(np.isfinite(v)):
            raise DivergenceSignal(trace, t, "non-finite gradient estimator")
        vn = _norm(v)
        w_prev = w
        w = w - cfg.gamma * v / vn if vn > 0 else w
        logger.guard_iterate(t + 1, w)
    logger.log(cfg.iterations, w, evals)
    trace.final_iterate = w
    return trace


def theoretical_gamma_det(spec: SmoothnessSpec, eps: float, beta: float) -> DetPlan:
    """Step size and iteration count from the deterministic convergence rate.

    For ``alpha`` in (0, 1):
    ``gamma = eps**beta / (12 (K0 + K1 + 2 K2) + 1)``; for ``alpha = 1``
    (which forces ``beta = 1``): ``gamma = eps / (4 L0 + 1)``. The
    iteration budget is ``ceil(4 / (gamma eps**(2 - beta)))``. Requires
    ``alpha <= beta <= 1`` (under-normalization can diverge) and
    ``eps`` in (0, 1).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if beta < spec.alpha:
        raise ValueError(
            f"beta={beta} < alpha={spec.alpha}: under-normalized descent "
            "admits divergent instances; use beta in [alpha, 1]"
        )
    if beta > 1.0:
        raise ValueError(f"beta must be <= 1, got {beta}")
    if spec.alpha == 1.0:
        gamma = eps / (4.0 * spec.l0 + 1.0)
    else:
        k = derive_det_constants(spec)
        gamma = eps ** beta / (12.0 * (k.k0 + k.k1 + 2.0 * k.k2) + 1.0)
    iterations = math.ceil(4.0 / (gamma * eps ** (2.0 - beta)))
    return DetPlan(gamma=gamma, iterations=iterations)


def theoretical_spider_hyperparams(
    spec: SmoothnessSpec,
    noise: NoiseSpec,
    eps: float,
    f0_gap_estimate: float,
    sample_count: int | None = None,
    seed: int = 0,
) -> SpiderConfig:
    """SPIDER hyperparameters meeting the stochastic rate target.

        q  = ceil(1 / eps)
        B  = ceil(max(576 Lambda^2, 2304 Gamma^2) / eps^2)
        B' = ceil(2304 / eps)

    with ``gamma = eps / (2 Kbar0 + 4 Kbar2 + 2 Kbar1 (Lambda^a + Gamma^a + 1) + 1)``
    for ``alpha`` in (0, 1) and
    ``gamma = eps / (5 L1 sqrt(Gamma^2 + 1) + 8 sqrt(L0^2 + 2 L1^2 Lambda^2))``
    for ``alpha = 1``. The epoch count K is the smallest integer making
    the leading rate term ``(16 / (5 T gamma)) * gap`` at most ``eps / 5``
    with ``T = q K``. For finite sums, batch sizes are clamped to the
    sample count with a warning; B is also raised to at least B'.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if f0_gap_estimate <= 0:
        raise ValueError(f"f0_gap_estimate must be > 0, got {f0_gap_estimate}")
    a = spec.alpha
    gam, lam = noise.gamma, noise.lam
    q = math.ceil(1.0 / eps)
    big = math.ceil(max(576.0 * lam ** 2, 2304.0 * gam ** 2) / eps ** 2)
    small = math.ceil(2304.0 / eps)
    if a == 1.0:
        gamma = eps / (
            5.0 * spec.l1 * math.sqrt(gam ** 2 + 1.0)
            + 8.0 * math.sqrt(spec.l0 ** 2 + 2.0 * spec.l1 ** 2 * lam ** 2)
        )
    else:
        kb = derive_stoch_constants(spec)
        gamma = eps / (
            2.0 * kb.kbar0
            + 4.0 * kb.kbar2
            + 2.0 * kb.kbar1 * (lam ** a + gam ** a + 1.0)
            + 1.0
        )
    if sample_count is not None:
        if big > sample_count or small > sample_count:
            warnings.warn(
                f"batch sizes (B={big}, B'={small}) exceed the finite-sum size "
                f"{sample_count}; clamping",
                RuntimeWarning,
                stacklevel=2,
            )
        big = min(big, sample_count)
        small = min(small, sample_count)
    small = max(small, 1)
    big = max(big, small)
    k_epochs = max(1, math.ceil(16.0 * f0_gap_estimate / (gamma * eps * q)))
    return SpiderConfig(
        iterations=q * k_epochs,
        q=q,
        big_batch=big,
        small_batch=small,
        gamma=gamma,
        seed=seed,
    )


@dataclass(frozen=True)
class CertificateResult:
    """Outcome of a divergence-certificate run on a 1-D witness."""

    certified: bool
    threshold: float
    magnitudes: tuple
    note: str = ""


def divergence_certificate(alpha, beta, gamma, w0_abs, iterations) -> CertificateResult:
    """Constructive divergence witness for under-normalized descent.

    Runs normalized descent with ``beta < alpha`` on the 1-D polynomial
    witness (``alpha`` in (0, 1)) or the exponential witness
    (``alpha = 1``), starting beyond the threshold where every step at
    least doubles the iterate magnitude. For ``alpha < 1`` the threshold
    is the closed form ``C = (3 (1-a) / (gamma (2-a)))**((1-a)/(a-b))``;
    for ``alpha = 1`` it is the numeric crossing of
    ``gamma (e^w - e^-w)**(1-b) = 3 w``. Certifies when every observed
    step doubled the magnitude (an overflow to infinity counts as
    divergence).
    """
    alpha = float(alpha)
    beta = float(beta)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not 0.0 <= beta < alpha:
        raise ValueError(
            f"need 0 <= beta < alpha (got beta={beta}, alpha={alpha}); "
            "beta >= alpha is the convergent regime"
        )
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")

    if alpha < 1.0:
        threshold = (3.0 * (1.0 - alpha) / (gamma * (2.0 - alpha))) ** (
            (1.0 - alpha) / (alpha - beta)
        )
        coef = ((2.0 - alpha) / (1.0 - alpha)) ** (1.0 - beta)
        expo = (1.0 - beta) / (1.0 - alpha)

        def step_size(mag):
            return gamma * coef * mag ** expo

    else:
        def step_size(mag):
            # (e^w - e^-w)^(1-beta) without premature overflow.
            if mag > 700.0:
                return math.exp((1.0 - beta) * mag) * gamma
            return gamma * (math.exp(mag) - math.exp(-mag)) ** (1.0 - beta)

        threshold = _exp_doubling_threshold(gamma, beta)

    if not abs(w0_abs) > threshold:
        raise ValueError(
            f"|w0| = {abs(w0_abs)} must exceed the doubling threshold C = {threshold}"
        )

    w = float(abs(w0_abs))
    mags = [w]
    note = ""
    certified = True
    for _ in range(iterations):
        try:
            step = step_size(w)
        except OverflowError:
            step = math.inf
        new = abs(w - step)
        if math.isinf(new):
            mags.append(math.inf)
            note = "iterate overflowed to infinity (divergent)"
            break
        if not new > 2.0 * w:
            certified = False
        mags.append(new)
        w = new
    return CertificateResult(
        certified=certified, threshold=threshold, magnitudes=tuple(mags), note=note
    )


def _exp_doubling_threshold(gamma, beta):
    """Smallest C >= 0 with gamma (e^w - e^-w)^(1-beta) > 3 w for all w > C.

    The margin is positive near 0 (the step scales like w**(1-beta)), can
    dip negative on a middle range when gamma is small, and is eventually
    positive and increasing; the threshold is the last zero crossing.
    """

    def margin(w):
        try:
            if w > 700.0:
                step = gamma * math.exp((1.0 - beta) * w)
            else:
                step = gamma * (math.exp(w) - math.exp(-w)) ** (1.0 - beta)
        except OverflowError:
            return math.inf
        return step - 3.0 * w

    grid = [2.0 ** (k / 4.0) for k in range(-120, 81)]
    last_nonpos = None
    for w in grid:
        if margin(w) <= 0:
            last_nonpos = w
    if last_nonpos is None:
        return 0.0
    hi = last_nonpos * 2.0
    while margin(hi) <= 0:
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("doubling margin stayed nonpositive below 1e9")
    lo = last_nonpos
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if margin(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi
