"""Convergence and divergence of beta-normalized descent on the quartic.

With beta >= alpha and the theoretical step size, descent is guaranteed;
with beta < alpha there is a starting region from which every step at
least doubles the iterate. Both rates are shown on f(w) = ||w||^4.
"""
import numpy as np

from gsmooth import (
    DivergenceSignal,
    SmoothnessSpec,
    beta_gd,
    divergence_certificate,
    make_polynomial_witness,
    theoretical_gamma_det,
)

spec = SmoothnessSpec(alpha=2.0 / 3.0, l0=0.01, l1=4.77)
eps, beta = 0.2, 2.0 / 3.0
plan = theoretical_gamma_det(spec, eps, beta)
print(f"target eps={eps}: gamma={plan.gamma:.3e}, budget T={plan.iterations}")

f = make_polynomial_witness(2.0 / 3.0, dim=5)
trace = beta_gd(f, np.ones(5), plan.gamma, beta, plan.iterations)
grad_norms = np.array(trace.grad_norms)
hit = int(np.argmax(grad_norms <= eps))
print(f"||grad|| <= {eps} first reached at t={hit} "
      f"(final ||grad|| = {grad_norms[-1]:.2e})")

print()
print("under-normalization (beta=1/3 < alpha) from |w0| = 20:")
result = divergence_certificate(2.0 / 3.0, 1.0 / 3.0, 0.1, 20.0, 5)
print(f"  doubling threshold C = {result.threshold}")
print("  |w_t| =", ", ".join(f"{m:.3g}" for m in result.magnitudes))
print(f"  certified divergent: {result.certified}")

print()
print("same settings with beta=2/3 stay stable:")
try:
    trace = beta_gd(make_polynomial_witness(2.0 / 3.0, 1), [20.0], 0.1, 2.0 / 3.0, 500)
    print(f"  500 iterations, final |w| = {abs(trace.final_iterate[0]):.2e}")
except DivergenceSignal:
    print("  unexpected divergence")
