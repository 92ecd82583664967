"""Shared domain types, class-constant formulas, and seeded randomness.

Everything downstream (objectives, smoothness checks, optimizers, the
experiment harness) builds on the small vocabulary defined here:

* parameter vectors (finite, fixed-length float64 arrays),
* smoothness class parameters ``(alpha, L0, L1)`` and the closed-form
  constants derived from them,
* gradient-noise parameters ``(Gamma, Lambda)``,
* reproducible named random sub-streams.

The convention ``0**0 = 1`` is used throughout, which matches Python and
NumPy float semantics (``0.0 ** 0.0 == 1.0``).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "param_point",
    "SmoothnessSpec",
    "DerivedDetConstants",
    "DerivedStochConstants",
    "NoiseSpec",
    "derive_det_constants",
    "derive_stoch_constants",
    "young_bound_holds",
    "rng_stream",
]

# Alpha above which constant formulas switch to log-domain evaluation so
# intermediate powers like 2**(alpha^2/(1-alpha)) cannot overflow before
# small factors cancel them.
_LOG_DOMAIN_ALPHA = 0.9


def param_point(values) -> np.ndarray:
    """Validate and freeze a parameter vector.

    Returns a read-only float64 copy. Entries must all be finite and the
    vector must be 1-D with at least one coordinate; the length is fixed
    for the lifetime of the array.
    """
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(
            f"parameter vector must be 1-D with length >= 1, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("parameter vector contains NaN or Inf entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SmoothnessSpec:
    """Parameters ``(alpha, L0, L1)`` of a generalized-smoothness class.

    ``alpha`` controls how fast the effective gradient-Lipschitz modulus
    grows with the gradient norm; ``alpha = 0`` is plain ``L0``-smoothness
    and ``alpha = 1`` admits exponential-type growth. ``L0`` and ``L1``
    must be strictly positive (callers that conceptually want ``L1 = 0``
    can pass an arbitrarily small value).
    """

    alpha: float
    l0: float
    l1: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not (self.l0 > 0 and math.isfinite(self.l0)):
            raise ValueError(f"L0 must be finite and > 0, got {self.l0}")
        if not (self.l1 > 0 and math.isfinite(self.l1)):
            raise ValueError(f"L1 must be finite and > 0, got {self.l1}")


@dataclass(frozen=True)
class DerivedDetConstants:
    """Deterministic-path constants (K0, K1, K2) derived from a spec."""

    k0: float
    k1: float
    k2: float


@dataclass(frozen=True)
class DerivedStochConstants:
    """Stochastic-path constants (Kbar0, Kbar1, Kbar2) derived from a spec."""

    kbar0: float
    kbar1: float
    kbar2: float


@dataclass(frozen=True)
class NoiseSpec:
    """Gradient-noise parameters: variance bound Gamma^2 ||grad f||^2 + Lambda^2."""

    gamma: float
    lam: float

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ValueError(f"Gamma must be finite and >= 0, got {self.gamma}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError(f"Lambda must be finite and >= 0, got {self.lam}")


def _require_open_unit_alpha(alpha: float, hint: str) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(
            f"constants are defined only for alpha in (0, 1), got {alpha}; {hint}"
        )


def derive_det_constants(spec: SmoothnessSpec) -> DerivedDetConstants:
    """Closed-form deterministic constants for ``alpha`` in (0, 1).

        K0 = L0 * (2**(a^2/(1-a)) + 1)
        K1 = L1 * 2**(a^2/(1-a)) * 3**a
        K2 = L1**(1/(1-a)) * 2**(a^2/(1-a)) * 3**a * (1-a)**(a/(1-a))

    Pure and deterministic: identical specs give bit-identical outputs.
    Raises ``ValueError`` outside (0, 1); at ``alpha = 1`` use the
    exponential-form bounds directly and at ``alpha = 0`` the plain
    L-smooth path.
    """
    _require_open_unit_alpha(
        spec.alpha,
        "use the exponential-form bounds for alpha = 1 or the plain "
        "L-smooth path for alpha = 0",
    )
    a, l0, l1 = spec.alpha, spec.l0, spec.l1
    e2 = a * a / (1.0 - a)
    if a <= _LOG_DOMAIN_ALPHA:
        two_pow = 2.0 ** e2
        k0 = l0 * (two_pow + 1.0)
        k1 = l1 * two_pow * 3.0 ** a
        k2 = (
            l1 ** (1.0 / (1.0 - a))
            * two_pow
            * 3.0 ** a
            * (1.0 - a) ** (a / (1.0 - a))
        )
    else:
        ln2, ln3 = math.log(2.0), math.log(3.0)
        k0 = math.exp(math.log(l0) + np.logaddexp(e2 * ln2, 0.0))
        k1 = math.exp(math.log(l1) + e2 * ln2 + a * ln3)
        k2 = math.exp(
            math.log(l1) / (1.0 - a)
            + e2 * ln2
            + a * ln3
            + (a / (1.0 - a)) * math.log(1.0 - a)
        )
    return DerivedDetConstants(k0=k0, k1=k1, k2=k2)


def derive_stoch_constants(spec: SmoothnessSpec) -> DerivedStochConstants:
    """Closed-form stochastic constants for ``alpha`` in (0, 1).

        Kbar0 = 2**((2-a)/(1-a)) * L0
        Kbar1 = 2**((2-a)/(1-a)) * L1
        Kbar2 = (5 * L1)**(1/(1-a))
    """
    _require_open_unit_alpha(
        spec.alpha, "the alpha = 1 path uses the exponential mean-square bound directly"
    )
    a, l0, l1 = spec.alpha, spec.l0, spec.l1
    e2 = (2.0 - a) / (1.0 - a)
    if a <= _LOG_DOMAIN_ALPHA:
        two_pow = 2.0 ** e2
        kbar0 = two_pow * l0
        kbar1 = two_pow * l1
        kbar2 = (5.0 * l1) ** (1.0 / (1.0 - a))
    else:
        ln2 = math.log(2.0)
        kbar0 = math.exp(e2 * ln2 + math.log(l0))
        kbar1 = math.exp(e2 * ln2 + math.log(l1))
        kbar2 = math.exp(math.log(5.0 * l1) / (1.0 - a))
    return DerivedStochConstants(kbar0=kbar0, kbar1=kbar1, kbar2=kbar2)


def young_bound_holds(x, c, delta, omega, omega_p) -> bool:
    """Evaluate the exponent-bridging inequality ``C x^w <= x^w' + C^(w'/Delta)``.

    Valid inputs: ``x >= 0``, ``C in [0, 1]``, ``Delta > 0``,
    ``0 <= w <= w'`` and ``Delta >= w' - w``. Under those preconditions
    the inequality always holds; this evaluator exists as the oracle for
    the randomized property suite. Uses ``0**0 = 1``.
    """
    x = float(x)
    c = float(c)
    delta = float(delta)
    omega = float(omega)
    omega_p = float(omega_p)
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"C must lie in [0, 1], got {c}")
    if delta <= 0:
        raise ValueError(f"Delta must be > 0, got {delta}")
    if not 0.0 <= omega <= omega_p:
        raise ValueError(f"need 0 <= omega <= omega', got {omega}, {omega_p}")
    if delta < omega_p - omega:
        raise ValueError(
            f"need Delta >= omega' - omega, got Delta={delta}, gap={omega_p - omega}"
        )
    lhs = c * x ** omega
    rhs = x ** omega_p + c ** (omega_p / delta)
    # 1e-12 relative slack guards against float roundoff near equality.
    return lhs <= rhs * (1.0 + 1e-12) + 1e-300


def rng_stream(seed: int, label: str) -> np.random.Generator:
    """Named, reproducible random sub-stream.

    Identical ``(seed, label)`` pairs yield identical draw sequences
    across runs and platforms (the stream seed is a SHA-256 digest of
    both, fed to PCG64). Distinct labels give statistically independent
    streams, so parallel work can hold one stream each.
    """
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))
