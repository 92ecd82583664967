"""Named property-check suites behind the ``check`` CLI subcommand.

Each suite runs a documented default-size verification and returns a
JSON-serializable report with a top-level ``passed`` flag. Targets select
the objective under test where that makes sense.
"""
from __future__ import annotations

import numpy as np

from .core import SmoothnessSpec, rng_stream, young_bound_holds
from .objectives import (
    generate_phase_retrieval,
    make_exponential_witness,
    make_polynomial_witness,
    make_quadratic,
    phase_retrieval_objective,
    phase_retrieval_smoothness,
)
from .optimizers import divergence_certificate, rng_stream as _rng
from .smoothness import (
    SegmentGrid,
    ball_pairs,
    ball_points,
    check_asym_membership,
    check_descent_lemma,
    check_expected_sym,
    check_prop2_bound,
    check_sym_membership,
    estimate_noise,
    moment_bound_margin,
    ray_pairs,
)

# Reference constants for the quartic witness: alpha = 2/3 with the
# closed-form growth coefficient (2-a)^(1-a) / (1-a)^(2-a) ~= 4.7622.
POLY_ALPHA = 2.0 / 3.0
POLY_L1 = (2.0 - POLY_ALPHA) ** (1.0 - POLY_ALPHA) / (1.0 - POLY_ALPHA) ** (
    2.0 - POLY_ALPHA
)
POLY_SPEC = SmoothnessSpec(alpha=POLY_ALPHA, l0=0.01, l1=4.77)
EXP_SPEC = SmoothnessSpec(alpha=1.0, l0=4.0, l1=1.0)


def _desk_phase_retrieval(seed, d=5, m=20):
    rng = rng_stream(seed, "data")
    inst, _, _ = generate_phase_retrieval(d=d, m=m, rng=rng)
    return inst, phase_retrieval_objective(inst)


def _parse_target_kv(target, defaults):
    params = dict(defaults)
    if target:
        for part in target.split(","):
            key, _, value = part.partition("=")
            key = key.strip()
            if key not in params:
                raise ValueError(f"unknown target parameter {key!r}")
            params[key] = float(value)
    return params


def suite_membership(target=None, seed=0):
    """Class membership: quartic passes symmetric, witnesses fail asymmetric."""
    target = target or "poly"
    if target == "poly":
        f = make_polynomial_witness(POLY_ALPHA, dim=1)
        report = check_sym_membership(
            f, POLY_SPEC, ball_pairs(1, 1000, 10.0, seed), seed=seed
        )
    elif target == "quadratic":
        f = make_quadratic(dim=3)
        spec = SmoothnessSpec(alpha=0.5, l0=1.0, l1=0.01)
        report = check_sym_membership(f, spec, ball_pairs(3, 500, 5.0, seed), seed=seed)
    elif target == "exp-asym":
        f = make_exponential_witness(dim=1)
        report = check_asym_membership(
            f, 1e3, 1e3, ray_pairs(1, 500, 30.0, seed), seed=seed
        )
        # This suite certifies the FAILURE of asymmetric membership.
        return {
            "suite": "membership",
            "target": target,
            "passed": not report.passed,
            "report": report.to_dict(),
        }
    elif target == "phase-retrieval":
        inst, f = _desk_phase_retrieval(seed)
        report = check_expected_sym(
            f,
            phase_retrieval_smoothness(inst),
            ball_pairs(inst.dim, 200, 3.0, seed),
            seed=seed,
        )
    else:
        raise ValueError(f"unknown membership target {target!r}")
    return {
        "suite": "membership",
        "target": target,
        "passed": report.passed,
        "report": report.to_dict(),
    }


def suite_descent(target=None, seed=0):
    """Derived-constant gradient bounds and descent lemmas."""
    target = target or "poly"
    if target == "poly":
        f = make_polynomial_witness(POLY_ALPHA, dim=1)
        spec = POLY_SPEC
        pairs = ball_pairs(1, 2000, 10.0, seed)
    elif target == "exp":
        f = make_exponential_witness(dim=1)
        spec = EXP_SPEC
        pairs = ball_pairs(1, 2000, 5.0, seed)
    elif target == "quadratic":
        f = make_quadratic(dim=3)
        spec = SmoothnessSpec(alpha=1e-4, l0=1.0, l1=1e-6)
        pairs = ball_pairs(3, 1000, 5.0, seed)
    else:
        raise ValueError(f"unknown descent target {target!r}")
    bound = check_prop2_bound(f, spec, pairs, seed=seed)
    descent = check_descent_lemma(f, spec, pairs, seed=seed)
    return {
        "suite": "descent",
        "target": target,
        "passed": bound.passed and descent.passed,
        "bound": bound.to_dict(),
        "descent": descent.to_dict(),
    }


def suite_expected(target=None, seed=0):
    """Mean-square symmetric condition on the desk phase retrieval instance."""
    inst, f = _desk_phase_retrieval(seed)
    report = check_expected_sym(
        f,
        phase_retrieval_smoothness(inst),
        ball_pairs(inst.dim, 200, 3.0, seed),
        seed=seed,
    )
    return {
        "suite": "expected",
        "target": target or "phase-retrieval",
        "passed": report.passed,
        "report": report.to_dict(),
    }


def suite_noise(target=None, seed=0):
    """Noise-envelope fit plus held-out validation of the variance bound."""
    inst, f = _desk_phase_retrieval(seed)
    probes = ball_points(inst.dim, 200, 3.0, seed, label="noise-probes")
    noise = estimate_noise(f, probes, safety=2.0)
    holdout = ball_points(inst.dim, 100, 3.0, seed + 1, label="noise-holdout")
    violations = 0
    for w in holdout:
        grads = f.sample_grads(np.asarray(w))
        mean = grads.mean(axis=0)
        v = float(np.mean(np.sum((grads - mean) ** 2, axis=1)))
        if v > noise.gamma ** 2 * float(mean @ mean) + noise.lam ** 2 + 1e-9:
            violations += 1
    return {
        "suite": "noise",
        "target": target or "phase-retrieval",
        "passed": violations == 0,
        "gamma": noise.gamma,
        "lambda": noise.lam,
        "holdout_points": len(holdout),
        "violations": violations,
    }


def suite_young(target=None, seed=0):
    """Randomized validity sweep of the exponent-bridging inequality."""
    n = int(float(target)) if target else 100_000
    rng = rng_stream(seed, "young")
    failures = 0
    for _ in range(n):
        x = rng.exponential(2.0)
        c = rng.random()
        omega = rng.random() * 3.0
        omega_p = omega + rng.random() * 2.0
        delta = (omega_p - omega) + rng.random() * 2.0 + 1e-12
        if not young_bound_holds(x, c, delta, omega, omega_p):
            failures += 1
    return {"suite": "young", "cases": n, "failures": failures, "passed": failures == 0}


def suite_moment(target=None, seed=0):
    """Fractional-moment bound with an estimated noise envelope."""
    inst, f = _desk_phase_retrieval(seed)
    probes = ball_points(inst.dim, 200, 3.0, seed, label="moment-probes")
    noise = estimate_noise(f, probes, safety=1.5)
    points = ball_points(inst.dim, 100, 3.0, seed + 1, label="moment-points")
    worst = np.inf
    for w in points:
        margins = moment_bound_margin(f, noise, w)
        worst = min(worst, min(margins.values()))
    return {
        "suite": "moment",
        "target": target or "phase-retrieval",
        "points": len(points),
        "worst_margin": float(worst),
        "passed": bool(worst >= -1e-9),
    }


def suite_divergence(target=None, seed=0):
    """Doubling certificate for under-normalized descent on the 1-D witness."""
    params = _parse_target_kv(
        target, {"alpha": 2.0 / 3.0, "beta": 1.0 / 3.0, "gamma": 0.1, "w0": 20.0, "t": 5}
    )
    result = divergence_certificate(
        params["alpha"], params["beta"], params["gamma"], params["w0"], int(params["t"])
    )
    return {
        "suite": "divergence",
        "passed": result.certified,
        "threshold": result.threshold,
        "magnitudes": [m for m in result.magnitudes],
    }


def suite_spider_martingale(target=None, seed=0, resamples=10_000):
    """Conditional-unbiasedness test of the recursive correction.

    Freezes a mid-epoch state (w_t, w_{t+1}, v_t) on the desk phase
    retrieval instance and checks that the Monte-Carlo mean of
    v_{t+1} - grad f(w_{t+1}) over resampled correction batches matches
    delta_t coordinatewise within four standard errors.
    """
    inst, f = _desk_phase_retrieval(seed)
    rng = rng_stream(seed, "martingale")
    d = inst.dim
    w_t = rng.standard_normal(d)
    w_next = w_t + 0.1 * rng.standard_normal(d)
    v_t = f.grad_uncounted(w_t) + 0.05 * rng.standard_normal(d)
    delta_t = v_t - f.grad_uncounted(w_t)
    grads_next = f.sample_grads(w_next)
    grads_now = f.sample_grads(w_t)
    grad_next_full = f.grad_uncounted(w_next)
    small = 10
    draws = rng.integers(0, inst.m, size=(resamples, small))
    per_sample_diff = grads_next - grads_now
    batch_means = per_sample_diff[draws].mean(axis=1)
    samples = v_t[None, :] + batch_means - grad_next_full[None, :]
    mc_mean = samples.mean(axis=0)
    mc_se = samples.std(axis=0, ddof=1) / np.sqrt(resamples)
    deviation = np.abs(mc_mean - delta_t)
    passed = bool(np.all(deviation <= 4.0 * mc_se))
    return {
        "suite": "spider-martingale",
        "resamples": resamples,
        "max_deviation_in_se": float(np.max(deviation / np.maximum(mc_se, 1e-300))),
        "passed": passed,
    }


SUITES = {
    "membership": suite_membership,
    "descent": suite_descent,
    "expected": suite_expected,
    "noise": suite_noise,
    "young": suite_young,
    "moment": suite_moment,
    "divergence": suite_divergence,
    "spider-martingale": suite_spider_martingale,
}
