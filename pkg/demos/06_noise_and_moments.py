"""Gradient-noise envelopes and the fractional-moment bound.

Estimates the minimal (Gamma, Lambda) such that the per-sample gradient
variance stays below Gamma^2 ||grad f||^2 + Lambda^2 across probe points,
validates on held-out points, and checks the implied bound on fractional
moments E ||grad f_i||^tau. The safety factor exists exactly because the
fitted envelope touches its probes: held-out points need headroom.
"""
import numpy as np

from gsmooth import (
    ball_points,
    estimate_noise,
    generate_phase_retrieval,
    moment_bound_margin,
    phase_retrieval_objective,
    rng_stream,
)

inst, _, _ = generate_phase_retrieval(d=5, m=20, rng=rng_stream(0, "data"))
f = phase_retrieval_objective(inst)

probes = ball_points(f.dim, 200, 3.0, seed=1)
noise = estimate_noise(f, probes, safety=2.0)
print(f"fitted noise envelope: Gamma={noise.gamma:.4f}, Lambda={noise.lam:.4f}")

violations = 0
for w in ball_points(f.dim, 100, 3.0, seed=2):
    grads = f.sample_grads(w)
    mean = grads.mean(axis=0)
    variance = float(np.mean(np.sum((grads - mean) ** 2, axis=1)))
    if variance > noise.gamma ** 2 * float(mean @ mean) + noise.lam ** 2:
        violations += 1
print(f"held-out validation: {violations} violations over 100 points")

worst = {tau: np.inf for tau in (0.5, 1.0, 1.5, 2.0)}
for w in ball_points(f.dim, 100, 3.0, seed=3):
    for tau, margin in moment_bound_margin(f, noise, w).items():
        worst[tau] = min(worst[tau], margin)
print("fractional-moment bound margins (smallest over 100 points):")
for tau, margin in worst.items():
    print(f"  tau={tau}: {margin:.4f}")
