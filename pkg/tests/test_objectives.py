import math

import numpy as np
import pytest

from conftest import fd_gradient, rel_err
from gsmooth.core import rng_stream
from gsmooth.objectives import (
    DROInstance,
    IngestionError,
    PhaseRetrievalInstance,
    chi2_conjugate,
    dro_min_eta,
    dro_objective,
    generate_phase_retrieval,
    generate_synthetic_regression,
    instance_from_json,
    instance_to_json,
    load_regression_csv,
    make_exponential_witness,
    make_polynomial_witness,
    make_quadratic,
    phase_retrieval_objective,
    phase_retrieval_smoothness,
)


class TestPolynomialWitness:
    def test_hand_values_1d(self):
        f = make_polynomial_witness(2.0 / 3.0, dim=1)
        # exponent (2-a)/(1-a) = 4
        assert f.value(np.array([2.0])) == pytest.approx(16.0)
        assert f.grad_uncounted(np.array([2.0]))[0] == pytest.approx(32.0)
        assert f.value(np.array([0.0])) == 0.0
        assert f.grad_uncounted(np.array([0.0]))[0] == 0.0

    def test_alpha_half_2d(self):
        f = make_polynomial_witness(0.5, dim=2)
        w = np.array([3.0, 4.0])
        assert f.value(w) == pytest.approx(125.0)
        g = f.grad_uncounted(w)
        assert np.linalg.norm(g) == pytest.approx(75.0)
        assert rel_err(fd_gradient(f.value, w), g) <= 1e-5

    def test_alpha_domain(self):
        with pytest.raises(ValueError):
            make_polynomial_witness(0.0)
        with pytest.raises(ValueError):
            make_polynomial_witness(1.0)


class TestExponentialWitness:
    def test_hand_values(self):
        f = make_exponential_witness(dim=1)
        assert f.value(np.array([0.0])) == pytest.approx(2.0)
        assert f.grad_uncounted(np.array([0.0]))[0] == 0.0
        g1 = f.grad_uncounted(np.array([1.0]))[0]
        assert g1 == pytest.approx(math.e - 1.0 / math.e, abs=1e-12)
        assert rel_err(fd_gradient(f.value, np.array([1.0])), [g1]) <= 1e-5

    def test_origin_gradient_3d(self):
        f = make_exponential_witness(dim=3)
        assert np.array_equal(f.grad_uncounted(np.zeros(3)), np.zeros(3))


class TestObjectiveCounters:
    def test_batch_accounting(self, desk_phase_retrieval):
        _, f, _, _ = desk_phase_retrieval
        w = np.ones(f.dim)
        before = f.eval_count
        for _ in range(7):
            f.batch_grad(w, [0, 1, 2])
        assert f.eval_count - before == 21

    def test_grad_counts_sample_count(self, desk_phase_retrieval):
        _, f, _, _ = desk_phase_retrieval
        before = f.eval_count
        f.grad(np.ones(f.dim))
        assert f.eval_count - before == f.sample_count

    def test_pair_counts_once(self, desk_phase_retrieval):
        _, f, _, _ = desk_phase_retrieval
        before = f.eval_count
        f.batch_grad_pair(np.ones(f.dim), np.zeros(f.dim), [0, 1, 2, 3])
        assert f.eval_count - before == 4

    def test_diagnostics_uncounted(self, desk_phase_retrieval):
        _, f, _, _ = desk_phase_retrieval
        before = f.eval_count
        f.value(np.ones(f.dim))
        f.grad_uncounted(np.ones(f.dim))
        f.sample_grads(np.ones(f.dim))
        assert f.eval_count == before

    def test_index_validation(self, desk_phase_retrieval):
        _, f, _, _ = desk_phase_retrieval
        with pytest.raises(IndexError):
            f.sample_grad(np.ones(f.dim), f.sample_count)
        with pytest.raises(IndexError):
            f.batch_grad(np.ones(f.dim), [-1])
        with pytest.raises(ValueError):
            f.batch_grad(np.ones(f.dim), [])


class TestPhaseRetrieval:
    def test_generation_paper_settings_shape(self):
        rng = rng_stream(3, "data")
        inst, z_true, z0 = generate_phase_retrieval(d=100, m=3000, rng=rng)
        assert inst.a_mat.shape == (3000, 100)
        assert inst.y.shape == (3000,)
        assert z_true.shape == (100,)
        # init entries concentrate near 5 (variance 0.5)
        assert abs(z0.mean() - 5.0) < 0.5

    def test_noiseless_scalar(self):
        rng = rng_stream(0, "data")
        inst, z_true, _ = generate_phase_retrieval(
            d=1, m=1, rng=rng, entry_sd_a=0.0, entry_mean_a=1.0,
            entry_mean_z=2.0, entry_sd_z=0.0, noise_sd=0.0,
        )
        assert inst.a_mat[0, 0] == 1.0
        assert z_true[0] == 2.0
        assert inst.y[0] == pytest.approx(4.0)

    def test_determinism(self):
        a = generate_phase_retrieval(d=20, m=500, rng=rng_stream(7, "data"))
        b = generate_phase_retrieval(d=20, m=500, rng=rng_stream(7, "data"))
        assert np.array_equal(a[0].a_mat, b[0].a_mat)
        assert np.array_equal(a[0].y, b[0].y)
        assert np.array_equal(a[2], b[2])

    def test_sample_gradient_hand_value(self):
        inst = PhaseRetrievalInstance(np.array([[1.0]]), np.array([0.0]))
        f = phase_retrieval_objective(inst)
        z = np.array([2.0])
        # f_r = 0.5 (0 - 4)^2 = 8; grad = 2 * 4 * 2 = 16
        assert 0.5 * (inst.y[0] - 4.0) ** 2 == pytest.approx(8.0)
        assert f.sample_grad(z, 0)[0] == pytest.approx(16.0)

    def test_zero_residual_gradient(self):
        inst = PhaseRetrievalInstance(np.array([[1.0, 0.0], [0.0, 1.0]]), np.zeros(2))
        f = phase_retrieval_objective(inst)
        assert np.allclose(f.grad_uncounted(np.zeros(2)), 0.0)

    def test_fd_gradient(self, desk_phase_retrieval):
        _, f, _, _ = desk_phase_retrieval
        rng = rng_stream(17, "fd-points")
        for _ in range(20):
            w = rng.standard_normal(f.dim)
            assert rel_err(fd_gradient(f.value, w), f.grad_uncounted(w)) <= 1e-5

    def test_grad_is_mean_of_sample_grads(self, desk_phase_retrieval):
        _, f, _, _ = desk_phase_retrieval
        rng = rng_stream(18, "mean-points")
        for _ in range(10):
            w = rng.standard_normal(f.dim)
            mean = f.sample_grads(w).mean(axis=0)
            assert rel_err(f.grad_uncounted(w), mean) <= 1e-10

    def test_smoothness_constants(self):
        inst = PhaseRetrievalInstance(np.array([[1.0]]), np.array([1.0]))
        spec = phase_retrieval_smoothness(inst)
        assert spec.alpha == pytest.approx(2.0 / 3.0)
        assert spec.l0 == pytest.approx(2.0)
        assert spec.l1 == pytest.approx(2.25)

    def test_smoothness_constants_scaled(self):
        inst = PhaseRetrievalInstance(np.array([[2.0]]), np.array([0.5]))
        spec = phase_retrieval_smoothness(inst)
        assert spec.l1 == pytest.approx(2.25 * 2.0 ** (4.0 / 3.0), rel=1e-9)
        assert spec.l1 == pytest.approx(5.669645, abs=1e-6)
        assert spec.l0 == pytest.approx(4.0)

    def test_instance_requires_data(self):
        with pytest.raises(ValueError):
            PhaseRetrievalInstance(np.zeros((0, 3)), np.zeros(0))


class TestChi2Conjugate:
    @pytest.mark.parametrize(
        "t,value,deriv",
        [(0.0, 0.0, 1.0), (2.0, 3.0, 2.0), (-3.0, -1.0, 0.0)],
    )
    def test_hand_values(self, t, value, deriv):
        v, d = chi2_conjugate(t)
        assert v == pytest.approx(value)
        assert d == pytest.approx(deriv)

    def test_vectorized_and_convex(self):
        t = np.linspace(-5, 5, 201)
        v, d = chi2_conjugate(t)
        assert np.all(np.diff(d) >= 0)  # derivative nondecreasing
        assert np.all(np.diff(v) / np.diff(t) <= d[1:] + 1e-12)


def _synthetic_dro(seed=5, n=200, p=5, lam=0.01):
    return generate_synthetic_regression(n, p, 0.1, rng_stream(seed, "data"), lam=lam)


class TestDRO:
    def test_dim_is_p_plus_one(self):
        inst = _synthetic_dro()
        f = dro_objective(inst)
        assert f.dim == inst.p + 1
        assert f.sample_count == inst.n

    def test_eta_stationarity_when_loss_equals_eta(self):
        # With all losses equal to eta, psi*'(0) = 1 kills the eta gradient
        # and the weight block equals the loss gradient.
        inst = DROInstance(np.zeros((3, 2)), np.zeros(3), lam=0.5, reg_weight=0.0)
        f = dro_objective(inst)
        u = np.array([0.0, 0.0, 0.0])  # losses are all 0, eta = 0
        g = f.grad_uncounted(u)
        assert g[-1] == pytest.approx(0.0)
        assert np.allclose(g[:-1], 0.0)

    def test_fd_gradient_away_from_kinks(self):
        inst = _synthetic_dro()
        f = dro_objective(inst)
        rng = rng_stream(6, "fd")
        checked = 0
        while checked < 25:
            u = rng.standard_normal(inst.p + 1)
            if np.any(np.abs(u[:-1]) < 1e-6):
                continue
            losses = 0.5 * (inst.features @ u[:-1] - inst.targets) ** 2
            losses = losses + inst.reg_weight * np.sum(np.log1p(np.abs(u[:-1])))
            if np.any(np.abs((losses - u[-1]) / inst.lam + 2.0) < 1e-3):
                continue
            assert rel_err(fd_gradient(f.value, u), f.grad_uncounted(u)) <= 1e-5
            checked += 1

    def test_unbiased(self):
        inst = _synthetic_dro()
        f = dro_objective(inst)
        u = rng_stream(8, "pt").standard_normal(inst.p + 1)
        assert rel_err(f.grad_uncounted(u), f.sample_grads(u).mean(axis=0)) <= 1e-10

    def test_subgradient_zero_at_kink(self):
        inst = DROInstance(np.ones((2, 1)), np.zeros(2), lam=1.0, reg_weight=0.1)
        f = dro_objective(inst)
        g = f.grad_uncounted(np.array([0.0, 0.0]))
        # regularizer contributes nothing at x = 0
        inst0 = DROInstance(np.ones((2, 1)), np.zeros(2), lam=1.0, reg_weight=0.0)
        g0 = dro_objective(inst0).grad_uncounted(np.array([0.0, 0.0]))
        assert np.allclose(g, g0)

    def test_saturated_tail(self):
        inst = _synthetic_dro(n=50)
        f = dro_objective(inst)
        x = 0.1 * rng_stream(9, "pt").standard_normal(inst.p)
        losses = 0.5 * (inst.features @ x - inst.targets) ** 2
        losses = losses + inst.reg_weight * np.sum(np.log1p(np.abs(x)))
        eta = float(losses.max()) + 100.0 * inst.lam
        val = f.value(np.concatenate([x, [eta]]))
        assert val == pytest.approx(eta - inst.lam, rel=1e-12)
        bigger = f.value(np.concatenate([x, [eta + 1.0]]))
        assert bigger > val


class TestDroMinEta:
    def test_equal_losses(self):
        inst = DROInstance(np.zeros((4, 2)), np.zeros(4), lam=0.5, reg_weight=0.0)
        eta, psi = dro_min_eta(inst, np.zeros(2), tol=1e-10)
        assert eta == pytest.approx(0.0, abs=1e-8)
        assert psi == pytest.approx(0.0, abs=1e-8)

    def test_two_sample_vs_root_finder(self):
        brentq = pytest.importorskip("scipy.optimize").brentq
        lam = 0.3
        # losses 0 and 2*lam at x = 0
        inst = DROInstance(
            np.array([[1.0], [1.0]]),
            np.array([0.0, -2.0 * math.sqrt(lam)]),
            lam=lam,
            reg_weight=0.0,
        )
        eta, _ = dro_min_eta(inst, np.array([0.0]), tol=1e-12)

        def deriv(e):
            return 1.0 - 0.25 * (
                max(-e / lam + 2.0, 0.0) + max((2.0 * lam - e) / lam + 2.0, 0.0)
            )

        oracle = brentq(deriv, -10.0, 10.0, xtol=1e-14)
        assert abs(eta - oracle) <= 1e-8

    def test_tolerance_met(self):
        inst = _synthetic_dro()
        x = rng_stream(10, "pt").standard_normal(inst.p)
        eta, _ = dro_min_eta(inst, x, tol=1e-8)
        losses = 0.5 * (inst.features @ x - inst.targets) ** 2
        losses = losses + inst.reg_weight * np.sum(np.log1p(np.abs(x)))
        _, s = chi2_conjugate((losses - eta) / inst.lam)
        assert abs(1.0 - np.mean(s)) <= 1e-8

    def test_tol_validated(self):
        inst = _synthetic_dro()
        with pytest.raises(ValueError):
            dro_min_eta(inst, np.zeros(inst.p), tol=0.0)


class TestSyntheticRegression:
    def test_determinism(self):
        a = generate_synthetic_regression(200, 5, 0.1, rng_stream(4, "data"))
        b = generate_synthetic_regression(200, 5, 0.1, rng_stream(4, "data"))
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.targets, b.targets)

    def test_noiseless_targets(self):
        inst = generate_synthetic_regression(50, 3, 0.0, rng_stream(4, "data"))
        # targets must be an exact linear map of the features
        coef, *_ = np.linalg.lstsq(inst.features, inst.targets, rcond=None)
        assert np.allclose(inst.features @ coef, inst.targets, atol=1e-10)

    def test_minimal_size(self):
        inst = generate_synthetic_regression(1, 1, 0.1, rng_stream(4, "data"))
        assert inst.features.shape == (1, 1)


class TestCsvIngestion:
    def test_median_fill(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,target\n1.0,1\n,2\n3.0,3\n")
        inst = load_regression_csv(path, target="target", standardize=False,
                                   winsor_pct=(0.0, 100.0))
        assert inst.features[1, 0] == pytest.approx(2.0)  # median of {1, 3}

    def test_constant_column_rejected(self, tmp_path):
        path = tmp_path / "flat.csv"
        path.write_text("a,b,target\n1,7,1\n2,7,2\n3,7,3\n")
        with pytest.raises(IngestionError, match="'b'"):
            load_regression_csv(path, target="target")

    def test_paper_shaped_pipeline(self, tmp_path):
        rng = rng_stream(12, "csv")
        n_all, p = 2413, 34
        cols = [f"f{i}" for i in range(p)]
        header = "Country,Status," + ",".join(cols) + ",Life expectancy"
        lines = [header]
        for i in range(n_all):
            feats = rng.standard_normal(p)
            cells = [f"c{i % 10}", "Developing"]
            cells += ["" if rng.random() < 0.01 else f"{v:.6f}" for v in feats]
            cells.append(f"{rng.standard_normal() * 10 + 70:.4f}")
            lines.append(",".join(cells))
        path = tmp_path / "life.csv"
        path.write_text("\n".join(lines) + "\n")
        inst = load_regression_csv(
            path,
            target="Life expectancy",
            drop_columns=("Country", "Status"),
            n_rows=2000,
            target_noise_sd=1.0,
            rng=rng_stream(13, "noise"),
            lam=0.01,
        )
        assert inst.n == 2000
        assert inst.p == 34
        assert inst.lam == 0.01
        # standardized columns: zero mean, unit variance before target noise
        assert np.allclose(inst.features.mean(axis=0), 0.0, atol=1e-10)
        assert np.allclose(inst.features.std(axis=0), 1.0, atol=1e-10)

    def test_winsorization_clamps_outliers(self, tmp_path):
        path = tmp_path / "w.csv"
        rows = "\n".join(f"{v},{v}" for v in range(100))
        path.write_text("a,target\n" + rows + "\n")
        inst = load_regression_csv(path, target="target", standardize=False,
                                   winsor_pct=(5.0, 95.0))
        assert inst.features.min() >= np.percentile(np.arange(100), 5) - 1e-9
        assert inst.features.max() <= np.percentile(np.arange(100), 95) + 1e-9

    def test_errors_carry_diagnostics(self, tmp_path):
        missing = tmp_path / "nope.csv"
        with pytest.raises(IngestionError):
            load_regression_csv(missing, target="t")
        bad = tmp_path / "bad.csv"
        bad.write_text("a,target\nfoo,1\n")
        with pytest.raises(IngestionError, match="row 2"):
            load_regression_csv(bad, target="target")
        empty = tmp_path / "empty.csv"
        empty.write_text("a,target\n")
        with pytest.raises(IngestionError, match="no data rows"):
            load_regression_csv(empty, target="target")
        no_target = tmp_path / "nt.csv"
        no_target.write_text("a,b\n1,2\n")
        with pytest.raises(IngestionError, match="target column"):
            load_regression_csv(no_target, target="t")


class TestInstanceSerialization:
    def test_phase_retrieval_round_trip(self, desk_phase_retrieval):
        inst, _, _, _ = desk_phase_retrieval
        back = instance_from_json(instance_to_json(inst))
        assert np.array_equal(back.a_mat, inst.a_mat)
        assert np.array_equal(back.y, inst.y)

    def test_dro_round_trip(self):
        inst = _synthetic_dro()
        back = instance_from_json(instance_to_json(inst))
        assert np.array_equal(back.features, inst.features)
        assert np.array_equal(back.targets, inst.targets)
        assert back.lam == inst.lam
        assert back.reg_weight == inst.reg_weight
