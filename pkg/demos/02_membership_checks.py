"""Which smoothness class does a function live in?

The quartic ||w||^4 sits in the symmetric class at alpha = 2/3 but in no
asymmetric class; the exponential witness needs alpha = 1. Membership is
verified by sampled ratio tests, and non-membership comes with an explicit
witness pair.
"""
import numpy as np

from gsmooth import (
    SmoothnessSpec,
    ball_pairs,
    check_asym_membership,
    check_sym_membership,
    fit_smoothness,
    make_exponential_witness,
    make_polynomial_witness,
    ray_pairs,
)

quartic = make_polynomial_witness(alpha=2.0 / 3.0, dim=1)
spec = SmoothnessSpec(alpha=2.0 / 3.0, l0=0.01, l1=4.77)

report = check_sym_membership(quartic, spec, ball_pairs(1, 1000, 10.0, seed=0))
print(f"quartic, symmetric class at alpha=2/3: passed={report.passed} "
      f"(worst ratio {report.worst_ratio:.4f} over {report.pairs_tested} pairs)")

smaller = SmoothnessSpec(alpha=1.0 / 3.0, l0=1.0, l1=1.0)
report = check_sym_membership(quartic, smaller, ball_pairs(1, 1000, 10.0, seed=1))
w, wp = report.worst_pair
print(f"quartic, alpha=1/3: passed={report.passed} "
      f"(violating pair w={w[0]:.3f}, w'={wp[0]:.3f}, ratio {report.worst_ratio:.1f})")

exponential = make_exponential_witness(dim=1)
report = check_asym_membership(exponential, 1e3, 1e3, ray_pairs(1, 1000, 30.0, seed=0))
a, b = report.worst_pair
print(f"exponential, asymmetric class with L0=L1=1e3: passed={report.passed} "
      f"(witness |w|={abs(a[0]):.2f} against the origin, ratio {report.worst_ratio:.3e})")

fitted = fit_smoothness(exponential, alpha=1.0, pairs=ball_pairs(1, 800, 4.0, seed=2))
print(f"fitted constants for the exponential at alpha=1: "
      f"L0={fitted.l0:.4f}, L1={fitted.l1:.4f}")
