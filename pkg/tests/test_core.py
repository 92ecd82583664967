import math

import numpy as np
import pytest

from gsmooth.core import (
    NoiseSpec,
    SmoothnessSpec,
    derive_det_constants,
    derive_stoch_constants,
    param_point,
    rng_stream,
    young_bound_holds,
)


class TestParamPoint:
    def test_freezes_and_validates(self):
        p = param_point([1.0, 2.0, 3.0])
        assert p.dtype == np.float64
        with pytest.raises(ValueError):
            p[0] = 5.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="NaN or Inf"):
            param_point([1.0, np.nan])
        with pytest.raises(ValueError, match="NaN or Inf"):
            param_point([np.inf])

    def test_rejects_empty_and_2d(self):
        with pytest.raises(ValueError):
            param_point([])
        with pytest.raises(ValueError):
            param_point([[1.0, 2.0]])


class TestSpecs:
    def test_smoothness_spec_bounds(self):
        SmoothnessSpec(0.5, 1.0, 1.0)
        with pytest.raises(ValueError):
            SmoothnessSpec(-0.1, 1.0, 1.0)
        with pytest.raises(ValueError):
            SmoothnessSpec(1.1, 1.0, 1.0)
        with pytest.raises(ValueError):
            SmoothnessSpec(0.5, 0.0, 1.0)
        with pytest.raises(ValueError):
            SmoothnessSpec(0.5, 1.0, -1.0)
        # arbitrarily small positive moduli are allowed
        SmoothnessSpec(0.5, 1e-300, 1e-300)

    def test_noise_spec_bounds(self):
        NoiseSpec(0.0, 0.0)
        with pytest.raises(ValueError):
            NoiseSpec(-1.0, 0.0)
        with pytest.raises(ValueError):
            NoiseSpec(0.0, math.inf)


class TestDetConstants:
    def test_alpha_two_thirds_unit_moduli(self):
        k = derive_det_constants(SmoothnessSpec(2.0 / 3.0, 1.0, 1.0))
        assert k.k0 == pytest.approx(3.519842, abs=1e-6)
        assert k.k1 == pytest.approx(5.241483, abs=1e-6)
        assert k.k2 == pytest.approx(0.582387, abs=1e-6)

    def test_small_alpha_limits(self):
        k = derive_det_constants(SmoothnessSpec(1e-4, 1.0, 1.0))
        assert k.k0 == pytest.approx(2.0, abs=1e-3)
        assert k.k1 == pytest.approx(1.0, abs=1e-3)
        assert k.k2 == pytest.approx(1.0, abs=1e-3)

    def test_boundary_alphas_rejected(self):
        with pytest.raises(ValueError):
            derive_det_constants(SmoothnessSpec(1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            derive_det_constants(SmoothnessSpec(0.0, 1.0, 1.0))

    def test_pure(self):
        spec = SmoothnessSpec(0.37, 2.5, 0.3)
        assert derive_det_constants(spec) == derive_det_constants(spec)

    def test_log_domain_matches_direct_near_cutover(self):
        lo = derive_det_constants(SmoothnessSpec(0.9, 1.3, 0.7))
        hi = derive_det_constants(SmoothnessSpec(0.9 + 1e-12, 1.3, 0.7))
        assert lo.k0 == pytest.approx(hi.k0, rel=1e-9)
        assert lo.k1 == pytest.approx(hi.k1, rel=1e-9)
        assert lo.k2 == pytest.approx(hi.k2, rel=1e-9)

    def test_high_alpha_no_overflow(self):
        k = derive_det_constants(SmoothnessSpec(0.999, 1.0, 1e-290))
        assert math.isfinite(k.k2)


class TestStochConstants:
    def test_alpha_two_thirds(self):
        kb = derive_stoch_constants(SmoothnessSpec(2.0 / 3.0, 1.0, 1.0))
        assert kb.kbar0 == pytest.approx(16.0, rel=1e-12)
        assert kb.kbar1 == pytest.approx(16.0, rel=1e-12)
        assert kb.kbar2 == pytest.approx(125.0, rel=1e-12)

    def test_alpha_half(self):
        kb = derive_stoch_constants(SmoothnessSpec(0.5, 2.0, 1.0))
        assert kb.kbar0 == pytest.approx(16.0, rel=1e-12)
        assert kb.kbar1 == pytest.approx(8.0, rel=1e-12)
        assert kb.kbar2 == pytest.approx(25.0, rel=1e-12)

    def test_alpha_one_rejected(self):
        with pytest.raises(ValueError):
            derive_stoch_constants(SmoothnessSpec(1.0, 1.0, 1.0))


class TestYoungBound:
    def test_omega_zero_uses_zero_pow_zero(self):
        assert young_bound_holds(0.0, 0.5, 1.0, 0.0, 1.0)

    def test_interior_case(self):
        assert young_bound_holds(2.0, 0.3, 0.5, 1.0, 1.5)

    def test_boundary_equal_exponents(self):
        assert young_bound_holds(1.0, 1.0, 1.0, 1.0, 1.0)

    def test_precondition_violations(self):
        with pytest.raises(ValueError):
            young_bound_holds(-1.0, 0.5, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            young_bound_holds(1.0, 1.5, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            young_bound_holds(1.0, 0.5, 0.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            young_bound_holds(1.0, 0.5, 1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            young_bound_holds(1.0, 0.5, 0.4, 1.0, 1.5)

    def test_randomized_sweep(self):
        rng = rng_stream(11, "young-core")
        for _ in range(20_000):
            x = rng.exponential(2.0)
            c = rng.random()
            omega = 3.0 * rng.random()
            omega_p = omega + 2.0 * rng.random()
            delta = (omega_p - omega) + 2.0 * rng.random() + 1e-12
            assert young_bound_holds(x, c, delta, omega, omega_p)


class TestRngStream:
    def test_reproducible_first_10k_draws(self):
        a = rng_stream(123, "data").random(10_000)
        b = rng_stream(123, "data").random(10_000)
        assert np.array_equal(a, b)

    def test_labels_give_distinct_streams(self):
        a = rng_stream(123, "data").random(100)
        b = rng_stream(123, "init").random(100)
        assert not np.array_equal(a, b)

    def test_seed_range_validated(self):
        with pytest.raises(ValueError):
            rng_stream(-1, "data")
        with pytest.raises(ValueError):
            rng_stream(2 ** 64, "data")
