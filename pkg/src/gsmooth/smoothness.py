"""Executable verification and estimation of smoothness conditions.

Each check samples point pairs, evaluates both sides of the condition it
targets, and reports the worst left/right ratio. The segment maximum in
the symmetric condition is discretized on a uniform grid; the discretized
maximum is a lower bound on the true maximum, so a PASS is sound (the
true right-hand side can only be larger) while a FAIL may in principle be
a grid artifact. Conditions quantified over ordered pairs are evaluated
in both orientations of every sampled pair.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import (
    NoiseSpec,
    SmoothnessSpec,
    derive_det_constants,
    derive_stoch_constants,
    rng_stream,
)
from .objectives import Objective

__all__ = [
    "SegmentGrid",
    "CheckReport",
    "ball_pairs",
    "ray_pairs",
    "local_pairs",
    "ball_points",
    "segment_grad_max",
    "segment_grad_integral",
    "check_sym_membership",
    "check_asym_membership",
    "check_hessian_membership",
    "check_prop2_bound",
    "check_descent_lemma",
    "check_expected_sym",
    "estimate_noise",
    "fit_smoothness",
    "moment_bound_margin",
]

_DEGENERATE_PAIR = 1e-12


@dataclass(frozen=True)
class SegmentGrid:
    """Uniform discretization of the segment parameter theta in [0, 1]."""

    resolution: int = 129

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError(f"resolution must be >= 2, got {self.resolution}")

    @property
    def thetas(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.resolution)


@dataclass
class CheckReport:
    """Outcome of a sampled inequality check.

    ``worst_ratio`` is the largest left/right ratio seen; the check passes
    when it stays at or below ``1 + tol``. For descent-lemma style checks
    ``worst_slack`` additionally records the smallest (right - left) gap.
    """

    pairs_tested: int
    worst_ratio: float
    worst_pair: tuple
    passed: bool
    tol: float
    grid_resolution: int | None = None
    seed: int | None = None
    worst_slack: float | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        w, wp = self.worst_pair if self.worst_pair else (None, None)
        return {
            "pairs_tested": self.pairs_tested,
            "worst_ratio": self.worst_ratio,
            "worst_pair": None
            if w is None
            else [np.asarray(w).tolist(), np.asarray(wp).tolist()],
            "passed": bool(self.passed),
            "tol": self.tol,
            "grid_resolution": self.grid_resolution,
            "seed": self.seed,
            "worst_slack": self.worst_slack,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# Seeded samplers
# ---------------------------------------------------------------------------


def _ball_point(dim, radius, rng):
    v = rng.standard_normal(dim)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return np.zeros(dim)
    r = radius * rng.random() ** (1.0 / dim)
    return (r / norm) * v


def ball_points(dim, count, radius, seed, label="points"):
    """``count`` points uniform in the centered ball of the given radius."""
    rng = rng_stream(seed, label)
    return [_ball_point(dim, radius, rng) for _ in range(count)]


def ball_pairs(dim, count, radius, seed):
    """Independent uniform-in-ball pairs (w, w')."""
    rng = rng_stream(seed, "ball-pairs")
    return [
        (_ball_point(dim, radius, rng), _ball_point(dim, radius, rng))
        for _ in range(count)
    ]


def ray_pairs(dim, count, r_max, seed):
    """Pairs with w = 0 fixed and w' on random rays, radii uniform in (0, r_max]."""
    rng = rng_stream(seed, "ray-pairs")
    out = []
    for _ in range(count):
        v = rng.standard_normal(dim)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            v, norm = np.ones(dim), np.sqrt(dim)
        r = r_max * (1.0 - rng.random())
        out.append((np.zeros(dim), (r / norm) * v))
    return out


def local_pairs(dim, count, radius, scale, seed):
    """Pairs w' = w + scale * gaussian around points uniform in a ball."""
    rng = rng_stream(seed, "local-pairs")
    out = []
    for _ in range(count):
        w = _ball_point(dim, radius, rng)
        out.append((w, w + scale * rng.standard_normal(dim)))
    return out


# ---------------------------------------------------------------------------
# Segment maxima
# ---------------------------------------------------------------------------


def segment_grad_max(f: Objective, w, w_p, grid: SegmentGrid, alpha: float) -> float:
    """Discretized ``max over theta of ||grad f(theta w' + (1-theta) w)||^alpha``.

    A lower bound on the true segment maximum, and monotone in grid
    refinement for nested grids.
    """
    w = np.asarray(w, dtype=float)
    w_p = np.asarray(w_p, dtype=float)
    best = 0.0
    for theta in grid.thetas:
        g = np.linalg.norm(f.grad_uncounted(theta * w_p + (1.0 - theta) * w))
        best = max(best, float(g) ** alpha)
    return best


def segment_grad_integral(f: Objective, w, w_p, grid: SegmentGrid, alpha: float) -> float:
    """Trapezoid-rule ``integral over theta of ||grad f(w_theta)||^alpha``.

    Cross-check companion to :func:`segment_grad_max`; the integral form
    is an equivalent (smaller-right-hand-side) way to state the symmetric
    condition.
    """
    w = np.asarray(w, dtype=float)
    w_p = np.asarray(w_p, dtype=float)
    vals = [
        float(np.linalg.norm(f.grad_uncounted(t * w_p + (1.0 - t) * w))) ** alpha
        for t in grid.thetas
    ]
    return float(np.trapezoid(vals, grid.thetas))


def _sample_segment_grad_max(f: Objective, w, w_p, grid: SegmentGrid, alpha: float):
    """Per-sample discretized segment maxima, one entry per finite-sum term."""
    w = np.asarray(w, dtype=float)
    w_p = np.asarray(w_p, dtype=float)
    best = np.zeros(f.sample_count)
    for theta in grid.thetas:
        norms = np.linalg.norm(f.sample_grads(theta * w_p + (1.0 - theta) * w), axis=1)
        np.maximum(best, norms ** alpha, out=best)
    return best


# ---------------------------------------------------------------------------
# Membership and bound checks
# ---------------------------------------------------------------------------


def _finish(ratios_pairs, tol, grid_resolution=None, seed=None, notes=None,
            worst_slack=None, tested=None):
    if not ratios_pairs:
        raise ValueError("no non-degenerate pairs to test")
    worst_ratio, worst_pair = max(ratios_pairs, key=lambda rp: rp[0])
    return CheckReport(
        pairs_tested=tested if tested is not None else len(ratios_pairs),
        worst_ratio=worst_ratio,
        worst_pair=worst_pair,
        passed=bool(worst_ratio <= 1.0 + tol),
        tol=tol,
        grid_resolution=grid_resolution,
        seed=seed,
        worst_slack=worst_slack,
        notes=notes or [],
    )


def check_sym_membership(
    f: Objective,
    spec: SmoothnessSpec,
    pairs,
    grid: SegmentGrid = SegmentGrid(),
    tol: float = 1e-9,
    seed=None,
) -> CheckReport:
    """Ratio test of the symmetric condition on sampled pairs.

    For each pair the ratio
    ``||grad f(w') - grad f(w)|| / ((L0 + L1 * segmax) ||w' - w||)``
    must stay at or below ``1 + tol``. Pairs closer than 1e-12 are
    skipped. The condition is symmetric in (w, w'), so one orientation
    suffices.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    ratios = []
    tested = 0
    for w, w_p in pairs:
        w = np.asarray(w, dtype=float)
        w_p = np.asarray(w_p, dtype=float)
        dist = float(np.linalg.norm(w_p - w))
        if dist < _DEGENERATE_PAIR:
            continue
        tested += 1
        lhs = float(np.linalg.norm(f.grad_uncounted(w_p) - f.grad_uncounted(w)))
        seg = segment_grad_max(f, w, w_p, grid, spec.alpha)
        rhs = (spec.l0 + spec.l1 * seg) * dist
        ratios.append((lhs / rhs, (w, w_p)))
    return _finish(ratios, tol, grid.resolution, seed, tested=tested)


def check_asym_membership(f: Objective, l0, l1, pairs, tol: float = 1e-9,
                          seed=None) -> CheckReport:
    """Ratio test of the asymmetric condition (modulus from the second point).

    Both orientations of every sampled pair are tested, since the
    condition quantifies over ordered pairs; the recorded worst pair is
    the orientation actually violated.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    ratios = []
    tested = 0
    for w, w_p in pairs:
        w = np.asarray(w, dtype=float)
        w_p = np.asarray(w_p, dtype=float)
        dist = float(np.linalg.norm(w_p - w))
        if dist < _DEGENERATE_PAIR:
            continue
        tested += 1
        g_w = f.grad_uncounted(w)
        g_wp = f.grad_uncounted(w_p)
        lhs = float(np.linalg.norm(g_wp - g_w))
        for a, b, g_second in ((w, w_p, g_wp), (w_p, w, g_w)):
            rhs = (l0 + l1 * float(np.linalg.norm(g_second))) * dist
            ratios.append((lhs / rhs, (a, b)))
    return _finish(ratios, tol, seed=seed, tested=tested)


def check_hessian_membership(
    f: Objective,
    l0,
    l1,
    points,
    fd_step: float = 1e-4,
    tol: float = 1e-6,
    seed: int = 0,
    max_iters: int = 200,
) -> CheckReport:
    """Spectral-norm test ``||hess f(w)|| <= (L0 + L1 ||grad f(w)||)(1 + tol)``.

    The Hessian norm is estimated by power iteration on central
    finite-difference Hessian-vector products with step
    ``fd_step * (1 + ||w||)``. Non-convergence within ``max_iters`` is
    recorded as a note, not a failure.
    """
    rng = rng_stream(seed, "hessian-power-iteration")
    ratios = []
    notes = []
    for k, w in enumerate(points):
        w = np.asarray(w, dtype=float)
        h = fd_step * (1.0 + float(np.linalg.norm(w)))
        v = rng.standard_normal(w.size)
        v /= np.linalg.norm(v)
        lam_prev = 0.0
        converged = False
        lam = 0.0
        for _ in range(max_iters):
            hv = (f.grad_uncounted(w + h * v) - f.grad_uncounted(w - h * v)) / (2.0 * h)
            lam = float(np.linalg.norm(hv))
            if lam == 0.0:
                converged = True
                break
            v = hv / lam
            if abs(lam - lam_prev) <= 1e-10 * max(1.0, lam):
                converged = True
                break
            lam_prev = lam
        if not converged:
            notes.append(f"power iteration did not converge at point {k}")
        bound = l0 + l1 * float(np.linalg.norm(f.grad_uncounted(w)))
        ratios.append((lam / bound, (w, w)))
    return _finish(ratios, tol, seed=seed, notes=notes)


def check_prop2_bound(
    f: Objective,
    spec: SmoothnessSpec,
    pairs,
    tol: float = 1e-9,
    seed=None,
) -> CheckReport:
    """Gradient-difference bound with derived constants.

    ``alpha`` in (0, 1): right-hand side
    ``||d|| (K0 + K1 ||grad f(w)||^a + K2 ||d||^(a/(1-a)))``;
    ``alpha = 1``: ``||d|| (L0 + L1 ||grad f(w)||) exp(L1 ||d||)``.
    Both orientations of each pair are tested.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    alpha = spec.alpha
    if alpha < 1.0:
        consts = derive_det_constants(spec)
    ratios = []
    tested = 0
    for w, w_p in pairs:
        w = np.asarray(w, dtype=float)
        w_p = np.asarray(w_p, dtype=float)
        dist = float(np.linalg.norm(w_p - w))
        if dist < _DEGENERATE_PAIR:
            continue
        tested += 1
        g_w = f.grad_uncounted(w)
        g_wp = f.grad_uncounted(w_p)
        lhs = float(np.linalg.norm(g_wp - g_w))
        for a, b, g_first in ((w, w_p, g_w), (w_p, w, g_wp)):
            gn = float(np.linalg.norm(g_first))
            if alpha < 1.0:
                rhs = dist * (
                    consts.k0
                    + consts.k1 * gn ** alpha
                    + consts.k2 * dist ** (alpha / (1.0 - alpha))
                )
            else:
                rhs = dist * (spec.l0 + spec.l1 * gn) * np.exp(spec.l1 * dist)
            ratios.append((lhs / rhs, (a, b)))
    return _finish(ratios, tol, seed=seed, tested=tested)


def check_descent_lemma(
    f: Objective,
    spec: SmoothnessSpec,
    pairs,
    tol: float = 1e-8,
    seed=None,
) -> CheckReport:
    """Quadratic-plus-tail upper bound on f(w') around w.

    Verifies ``f(w') <= f(w) + grad f(w).(w'-w) + bound`` where the bound
    carries the ``2 K2`` tail for ``alpha < 1`` and the exponential factor
    for ``alpha = 1``. Passes when the slack (right minus left) is at
    least ``-tol * (1 + |f(w)|)`` on every orientation of every pair;
    ``worst_slack`` records the smallest slack seen.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    alpha = spec.alpha
    if alpha < 1.0:
        consts = derive_det_constants(spec)
    ratios = []
    worst_slack = np.inf
    passed = True
    tested = 0
    for w, w_p in pairs:
        w = np.asarray(w, dtype=float)
        w_p = np.asarray(w_p, dtype=float)
        if float(np.linalg.norm(w_p - w)) < _DEGENERATE_PAIR:
            continue
        tested += 1
        for a, b in ((w, w_p), (w_p, w)):
            d = b - a
            dist = float(np.linalg.norm(d))
            fa, fb = f.value(a), f.value(b)
            g = f.grad_uncounted(a)
            gn = float(np.linalg.norm(g))
            if alpha < 1.0:
                quad = 0.5 * dist ** 2 * (
                    consts.k0
                    + consts.k1 * gn ** alpha
                    + 2.0 * consts.k2 * dist ** (alpha / (1.0 - alpha))
                )
            else:
                quad = 0.5 * dist ** 2 * (spec.l0 + spec.l1 * gn) * np.exp(spec.l1 * dist)
            increment = fb - fa - float(g @ d)
            slack = quad - increment
            scaled = slack / (1.0 + abs(fa))
            if scaled < worst_slack:
                worst_slack = scaled
            if slack < -tol * (1.0 + abs(fa)):
                passed = False
            if quad > 0:
                ratios.append((increment / quad, (a, b)))
    if tested == 0:
        raise ValueError("no non-degenerate pairs to test")
    worst_ratio, worst_pair = max(ratios, key=lambda rp: rp[0]) if ratios else (0.0, (None, None))
    return CheckReport(
        pairs_tested=tested,
        worst_ratio=worst_ratio,
        worst_pair=worst_pair,
        passed=passed,
        tol=tol,
        seed=seed,
        worst_slack=float(worst_slack),
    )


def check_expected_sym(
    f: Objective,
    spec: SmoothnessSpec,
    pairs,
    grid: SegmentGrid = SegmentGrid(),
    tol: float = 1e-9,
    seed=None,
) -> CheckReport:
    """Mean-square symmetric condition over a finite sum, evaluated exactly.

    Checks the per-sample-max form
    ``mean_i ||grad f_i(w') - grad f_i(w)||^2
      <= ||d||^2 mean_i (L0 + L1 segmax_i)^2``
    and the derived-constant form (Kbar constants for ``alpha`` in (0,1),
    exponential mean-square bound for ``alpha = 1``), both orientations.
    """
    if f.sample_count < 2:
        raise ValueError("expected-smoothness checks need sample_count >= 2")
    if tol < 0:
        raise ValueError("tol must be >= 0")
    alpha = spec.alpha
    if alpha < 1.0:
        kb = derive_stoch_constants(spec)
    ratios = []
    tested = 0
    for w, w_p in pairs:
        w = np.asarray(w, dtype=float)
        w_p = np.asarray(w_p, dtype=float)
        dist = float(np.linalg.norm(w_p - w))
        if dist < _DEGENERATE_PAIR:
            continue
        tested += 1
        grads_w = f.sample_grads(w)
        grads_wp = f.sample_grads(w_p)
        lhs = float(np.mean(np.sum((grads_wp - grads_w) ** 2, axis=1)))
        seg = _sample_segment_grad_max(f, w, w_p, grid, alpha)
        rhs_max = dist ** 2 * float(np.mean((spec.l0 + spec.l1 * seg) ** 2))
        ratios.append((lhs / rhs_max, (w, w_p)))
        for grads_first, a, b in ((grads_w, w, w_p), (grads_wp, w_p, w)):
            norms = np.linalg.norm(grads_first, axis=1)
            if alpha < 1.0:
                rhs = dist ** 2 * (
                    kb.kbar0
                    + kb.kbar1 * float(np.mean(norms ** alpha))
                    + kb.kbar2 * dist ** (alpha / (1.0 - alpha))
                ) ** 2
            else:
                rhs = (
                    2.0
                    * dist ** 2
                    * (spec.l0 ** 2 + 2.0 * spec.l1 ** 2 * float(np.mean(norms ** 2)))
                    * np.exp(12.0 * spec.l1 ** 2 * dist ** 2)
                )
            ratios.append((lhs / rhs, (a, b)))
    return _finish(ratios, tol, grid.resolution, seed, tested=tested)


# ---------------------------------------------------------------------------
# Envelope fitting (noise and smoothness constants)
# ---------------------------------------------------------------------------


def _envelope_min_fit(slopes, intercepts):
    """Smallest ``(x, y) >= 0`` with ``y + x * s_j >= r_j`` for all j.

    The feasible region's lower boundary is the nonincreasing
    piecewise-linear envelope ``y(x) = max_j (r_j - s_j x)`` clipped at 0.
    Candidates are the envelope vertices plus the axis and diagonal
    crossings; the lexicographic objective (x + y, max(x, y), x) picks the
    answer among them. One-sided fit by construction: no least squares.
    """
    s = np.asarray(slopes, dtype=float)
    r = np.asarray(intercepts, dtype=float)
    if s.ndim != 1 or s.shape != r.shape or s.size == 0:
        raise ValueError("slopes and intercepts must be equal-length 1-D arrays")
    if np.any(s < 0):
        raise ValueError("slopes must be nonnegative")
    if np.any(~np.isfinite(s)) or np.any(~np.isfinite(r)):
        raise ValueError("slopes and intercepts must be finite")

    # Upper envelope of the lines y = r_j - s_j x via a monotone-chain scan:
    # process by true slope (-s) ascending, i.e. s descending, keeping the
    # largest intercept per distinct slope.
    order = np.lexsort((-r, -s))
    lines = []
    for idx in order:
        if lines and lines[-1][0] == s[idx]:
            continue
        lines.append((float(s[idx]), float(r[idx])))

    def cross(l1, l2):
        # x where r1 - s1 x == r2 - s2 x
        return (l1[1] - l2[1]) / (l1[0] - l2[0])

    hull = [lines[0]]
    for line in lines[1:]:
        while len(hull) >= 2 and cross(hull[-2], line) <= cross(hull[-2], hull[-1]):
            hull.pop()
        hull.append(line)

    xs = {0.0}
    for l1, l2 in zip(hull, hull[1:]):
        x = cross(l1, l2)
        if np.isfinite(x) and x > 0:
            xs.add(float(x))
    # Crossing of the envelope with y = 0 (exists unless a flat constraint
    # keeps y positive forever) and with the diagonal y = x (tie-break
    # candidate for the max objective).
    positive = r > 0
    if np.any(positive):
        if np.all(s[positive] > 0):
            xs.add(float(np.max(r[positive] / s[positive])))
        xs.add(float(np.max(r[positive] / (1.0 + s[positive]))))

    cand_x = np.array(sorted(xs))
    cand_y = np.maximum((r[None, :] - cand_x[:, None] * s[None, :]).max(axis=1), 0.0)
    total = cand_x + cand_y
    peak = np.maximum(cand_x, cand_y)
    best = min(range(cand_x.size), key=lambda i: (total[i], peak[i], cand_x[i]))
    return float(cand_x[best]), float(cand_y[best])


def estimate_noise(f: Objective, probe_points, safety: float = 1.0) -> NoiseSpec:
    """Fit the minimal gradient-noise parameters over a probe set.

    At each probe the exact finite-sum variance
    ``V(w) = mean_i ||grad f_i(w) - grad f(w)||^2`` and the squared full
    gradient norm are computed; the smallest ``(Gamma^2, Lambda^2)`` on
    the nonnegative orthant with ``Gamma^2 g^2 + Lambda^2 >= V`` at every
    probe is found by envelope-vertex scanning, then both squared values
    are scaled by ``safety``.
    """
    if f.sample_count < 2:
        raise ValueError("noise estimation needs sample_count >= 2")
    probes = list(probe_points)
    if not probes:
        raise ValueError("probe set must be nonempty")
    if safety < 1.0:
        raise ValueError(f"safety must be >= 1, got {safety}")
    g2 = np.empty(len(probes))
    v = np.empty(len(probes))
    for k, w in enumerate(probes):
        grads = f.sample_grads(np.asarray(w, dtype=float))
        mean = grads.mean(axis=0)
        g2[k] = float(mean @ mean)
        v[k] = float(np.mean(np.sum((grads - mean) ** 2, axis=1)))
    gamma2, lambda2 = _envelope_min_fit(g2, v)
    return NoiseSpec(gamma=float(np.sqrt(gamma2 * safety)),
                     lam=float(np.sqrt(lambda2 * safety)))


def fit_smoothness(
    f: Objective,
    alpha: float,
    pairs,
    grid: SegmentGrid = SegmentGrid(),
    inflate: float = 1.05,
) -> SmoothnessSpec:
    """Fit minimal ``(L0, L1)`` for the symmetric condition at fixed alpha.

    Each non-degenerate pair contributes the constraint
    ``L0 + L1 * segmax >= ||grad f(w') - grad f(w)|| / ||w' - w||``;
    the envelope-vertex scan finds the smallest feasible point and the
    result is inflated by ``inflate`` (and floored at a tiny positive
    value, keeping class parameters strictly positive).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    slopes = []
    rhs = []
    for w, w_p in pairs:
        w = np.asarray(w, dtype=float)
        w_p = np.asarray(w_p, dtype=float)
        dist = float(np.linalg.norm(w_p - w))
        if dist < _DEGENERATE_PAIR:
            continue
        lhs = float(np.linalg.norm(f.grad_uncounted(w_p) - f.grad_uncounted(w)))
        slopes.append(segment_grad_max(f, w, w_p, grid, alpha))
        rhs.append(lhs / dist)
    if not slopes:
        raise ValueError("all sampled pairs are degenerate; nothing to fit")
    l1, l0 = _envelope_min_fit(slopes, rhs)
    floor = 1e-12
    return SmoothnessSpec(
        alpha=alpha,
        l0=max(l0 * inflate, floor),
        l1=max(l1 * inflate, floor),
    )


def moment_bound_margin(f: Objective, noise: NoiseSpec, w, taus=(0.5, 1.0, 1.5, 2.0)):
    """Margins of the fractional-moment bound at one point.

    For each ``tau`` returns
    ``(Gamma^tau + 1) ||grad f(w)||^tau + Lambda^tau - mean_i ||grad f_i(w)||^tau``;
    nonnegative margins mean the bound holds. The mean is the exact
    finite-sum moment.
    """
    if f.sample_count < 2:
        raise ValueError("moment checks need sample_count >= 2")
    w = np.asarray(w, dtype=float)
    grads = f.sample_grads(w)
    norms = np.linalg.norm(grads, axis=1)
    g = float(np.linalg.norm(grads.mean(axis=0)))
    out = {}
    for tau in taus:
        if not 0.0 <= tau <= 2.0:
            raise ValueError(f"tau must lie in [0, 2], got {tau}")
        moment = float(np.mean(norms ** tau))
        bound = (noise.gamma ** tau + 1.0) * g ** tau + noise.lam ** tau
        out[tau] = bound - moment
    return out
