import numpy as np
import pytest

from gsmooth.core import rng_stream
from gsmooth.objectives import generate_phase_retrieval, phase_retrieval_objective


def fd_gradient(value_fn, w, h=None):
    """Central finite-difference gradient, step h = 1e-5 (1 + ||w||)."""
    w = np.asarray(w, dtype=float)
    if h is None:
        h = 1e-5 * (1.0 + float(np.linalg.norm(w)))
    out = np.zeros_like(w)
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = h
        out[i] = (value_fn(w + e) - value_fn(w - e)) / (2.0 * h)
    return out


def rel_err(approx, exact):
    denom = max(float(np.linalg.norm(exact)), 1e-30)
    return float(np.linalg.norm(np.asarray(approx) - np.asarray(exact))) / denom


@pytest.fixture(scope="session")
def desk_phase_retrieval():
    """Small phase retrieval instance shared across test modules."""
    rng = rng_stream(0, "data")
    inst, z_true, z0 = generate_phase_retrieval(d=5, m=20, rng=rng)
    return inst, phase_retrieval_objective(inst), z_true, z0
