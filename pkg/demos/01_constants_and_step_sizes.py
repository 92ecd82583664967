"""Derived class constants and the step sizes they imply.

The smoothness class is parameterized by (alpha, L0, L1). From those three
numbers everything else follows in closed form: the deterministic
gradient-difference constants K0..K2, their mean-square counterparts
Kbar0..Kbar2, and the step size / iteration budget of normalized descent
for a target accuracy.
"""
import numpy as np

from gsmooth import (
    SmoothnessSpec,
    derive_det_constants,
    derive_stoch_constants,
    theoretical_gamma_det,
)

spec = SmoothnessSpec(alpha=2.0 / 3.0, l0=1.0, l1=1.0)
k = derive_det_constants(spec)
kb = derive_stoch_constants(spec)

print(f"class parameters: alpha={spec.alpha:.4f}, L0={spec.l0}, L1={spec.l1}")
print(f"deterministic constants: K0={k.k0:.6f} K1={k.k1:.6f} K2={k.k2:.6f}")
print(f"mean-square constants:  Kbar0={kb.kbar0:g} Kbar1={kb.kbar1:g} Kbar2={kb.kbar2:g}")
print()

print("step sizes for beta-normalized descent (beta = alpha):")
for eps in (0.2, 0.1, 0.05):
    plan = theoretical_gamma_det(spec, eps, beta=spec.alpha)
    print(f"  eps={eps:5.2f} -> gamma={plan.gamma:.3e}, iterations={plan.iterations}")

print()
print("the alpha -> 0 limit recovers plain L-smoothness:")
for alpha in (0.5, 0.1, 0.01, 1e-4):
    k = derive_det_constants(SmoothnessSpec(alpha, 1.0, 1.0))
    print(f"  alpha={alpha:7.0e}: K0={k.k0:.4f} K1={k.k1:.4f} K2={k.k2:.4f}")
