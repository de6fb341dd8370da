import numpy as np
import pytest

from l96enkf.obs import build_observation_operator, observe, observe_exact, pnorm_sq


class TestBuild:
    def test_j6_pattern(self):
        op = build_observation_operator(6, 1.0)
        H = op.H_matrix()
        expected = np.zeros((4, 6))
        for row, col in enumerate([0, 1, 3, 4]):
            expected[row, col] = 1.0
        np.testing.assert_array_equal(H, expected)
        np.testing.assert_array_equal(
            np.diag(op.Pi_matrix()), [1.0, 1.0, 0.0, 1.0, 1.0, 0.0]
        )

    def test_dimensions_j60(self):
        op = build_observation_operator(60, 1.0)
        assert op.Ny == 40
        assert op.Jprime == 20

    def test_projection_invariants(self):
        for J in (6, 9, 60):
            op = build_observation_operator(J, 0.5)
            Pi = op.Pi_matrix()
            np.testing.assert_array_equal(Pi @ Pi, Pi)
            np.testing.assert_array_equal(Pi.T, Pi)
            assert np.trace(Pi) == op.Ny
            np.testing.assert_array_equal(op.H_matrix().T @ op.H_matrix(), Pi)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            build_observation_operator(7, 1.0)
        with pytest.raises(ValueError):
            build_observation_operator(3, 1.0)

    def test_rejects_bad_noise(self):
        with pytest.raises(ValueError):
            build_observation_operator(6, 0.0)


class TestObserve:
    def test_exact_selection(self):
        op = build_observation_operator(6, 1.0)
        u = np.array([10.0, 20.0, 30.0, 40.0, 50.0, 60.0])
        np.testing.assert_array_equal(observe_exact(u, op), [10.0, 20.0, 40.0, 50.0])

    def test_noise_moments(self):
        # pure-noise observations: pooled mean within 4 sigma/sqrt(n),
        # variance within 5% of r^2
        r = 1.5
        op = build_observation_operator(60, r)
        rng = np.random.default_rng(10)
        draws = np.concatenate([observe(np.zeros(60), op, rng) for _ in range(2500)])
        n = draws.size
        assert n == 100_000
        assert abs(draws.mean()) <= 4.0 * r / np.sqrt(n)
        assert abs(draws.var() - r**2) <= 0.05 * r**2

    def test_deterministic_given_seed(self):
        op = build_observation_operator(6, 1.0)
        u = np.arange(6.0)
        y1 = observe(u, op, np.random.default_rng(42))
        y2 = observe(u, op, np.random.default_rng(42))
        np.testing.assert_array_equal(y1, y2)

    def test_independent_streams_differ_only_in_noise(self):
        op = build_observation_operator(60, 1.0)
        rng = np.random.default_rng(11)
        u = rng.standard_normal(60)
        diffs = np.array(
            [
                observe(u, op, np.random.default_rng(1000 + i))
                - observe(u, op, np.random.default_rng(5000 + i))
                for i in range(500)
            ]
        )
        # difference of two independent N(0, r^2) draws: mean 0, variance 2 r^2
        assert abs(diffs.mean()) <= 4.0 * np.sqrt(2.0 / diffs.size)

    def test_dimension_mismatch(self):
        op = build_observation_operator(6, 1.0)
        with pytest.raises(ValueError):
            observe_exact(np.ones(9), op)


class TestPnorm:
    def test_unobserved_support(self):
        op = build_observation_operator(9, 1.0)
        v = np.zeros(9)
        v[[2, 5, 8]] = [1.0, -2.0, 3.0]
        assert pnorm_sq(v, op) == pytest.approx(float(v @ v))

    def test_observed_support(self):
        op = build_observation_operator(9, 1.0)
        v = np.zeros(9)
        v[[0, 1, 3]] = [1.0, 2.0, -1.0]
        assert pnorm_sq(v, op) == pytest.approx(2.0 * float(v @ v))

    def test_hand_evaluated(self):
        op = build_observation_operator(6, 1.0)
        v = np.array([1.0, 0.0, 1.0, 0.0, 0.0, 1.0])
        assert pnorm_sq(v, op) == pytest.approx(4.0)

    def test_norm_equivalence(self):
        op = build_observation_operator(12, 1.0)
        rng = np.random.default_rng(12)
        for _ in range(200):
            v = rng.standard_normal(12)
            sq = float(v @ v)
            p = pnorm_sq(v, op)
            assert sq - 1e-12 <= p <= 2.0 * sq + 1e-12

    def test_h_norm_equals_projection_norm(self):
        op = build_observation_operator(12, 1.0)
        rng = np.random.default_rng(13)
        v = rng.standard_normal(12)
        assert np.linalg.norm(op.apply_H(v)) == pytest.approx(
            np.linalg.norm(op.project(v))
        )
