import numpy as np
import pytest
from numpy.testing import assert_allclose

from sdpd.errors import BadSpec, DataError, DegenerateModel, Explosion
from sdpd.moments import population_covariances, sample_covariances
from sdpd.process_sim import (
    CrossMode,
    ErrorSpec,
    PanelSeries,
    SdpdModel,
    gen_coefficients,
    gen_errors,
    population_error_cov,
    random_model,
    simulate,
)
from sdpd.spatial_weights import SpatialWeightMatrix, gen_spatial_matrix


def _rel_max(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


class TestCoefficients:
    def test_bounds(self):
        lam0, lam1 = gen_coefficients(10, seed=4)
        assert np.all(np.abs(lam0) <= 0.7) and np.all(np.abs(lam1) <= 0.7)

    def test_deterministic(self):
        a = gen_coefficients(10, seed=4)
        b = gen_coefficients(10, seed=4)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_constant_lambda1_redrawn(self, monkeypatch):
        import sdpd.process_sim as ps

        calls = {"n": 0}
        real = ps._is_constant

        def flaky(v):
            calls["n"] += 1
            return True if calls["n"] == 1 else real(v)

        monkeypatch.setattr(ps, "_is_constant", flaky)
        _, lam1 = gen_coefficients(2, seed=0, low=0.3, high=0.3 + 1e-3)
        assert calls["n"] >= 2
        assert not real(lam1)

    def test_impossible_constant_raises(self):
        # a degenerate interval can only ever produce constant vectors
        with pytest.raises(DegenerateModel):
            gen_coefficients(2, seed=0, low=0.3, high=np.nextafter(0.3, 1))

    def test_bad_bounds(self):
        with pytest.raises(DataError):
            gen_coefficients(3, 0, low=0.5, high=0.1)
        with pytest.raises(DataError):
            gen_coefficients(3, 0, low=-2, high=0.1)


class TestErrors:
    def test_independent_cov(self):
        spec = ErrorSpec(sigma=[1.0, 2.0])
        assert_allclose(population_error_cov(spec), np.diag([1.0, 4.0]))

    def test_common_factor_cov_analytic(self):
        # Cov(e_i - 0.7 e_2, e_j - 0.7 e_2) = 0.49 for i != j >= 3
        spec = ErrorSpec(sigma=np.ones(5), cross_mode="common_factor")
        V = population_error_cov(spec)
        for i in range(2, 5):
            for j in range(2, 5):
                assert V[i, j] == pytest.approx(1.49 if i == j else 0.49, abs=1e-15)
            assert V[i, 1] == pytest.approx(-0.7, abs=1e-15)
            assert V[i, 0] == 0.0
        assert V[0, 1] == 0.0
        assert np.all(np.linalg.eigvalsh(V) > -1e-12)

    def test_common_factor_needs_three(self):
        with pytest.raises(BadSpec):
            ErrorSpec(sigma=[1.0, 1.0], cross_mode="common_factor")

    def test_nonpositive_sigma(self):
        with pytest.raises(BadSpec):
            ErrorSpec(sigma=[1.0, 0.0])

    def test_monte_carlo_matches_population(self):
        spec = ErrorSpec(sigma=[0.6, 1.1, 1.4, 0.9], cross_mode="common_factor", seed=3)
        e = gen_errors(spec, 10**6)
        S = e.T @ e / e.shape[0]
        assert np.max(np.abs(S - population_error_cov(spec))) < 0.01

    def test_serial_independence(self):
        e = gen_errors(ErrorSpec(sigma=np.ones(3), seed=1), 10**5)
        lag = e[1:].T @ e[:-1] / e.shape[0]
        assert np.max(np.abs(lag)) < 3 / np.sqrt(10**5) * 2


class TestModel:
    def test_reject_unit_root(self, w3_hand):
        with pytest.raises(DegenerateModel):
            SdpdModel(w3_hand, [0.1] * 3, [0.1, 1.0, 0.2], ErrorSpec(np.ones(3)))

    def test_reject_constant_lambda1(self, w3_hand):
        with pytest.raises(DegenerateModel):
            SdpdModel(w3_hand, [0.1] * 3, [0.3] * 3, ErrorSpec(np.ones(3)))

    def test_reject_singular_filter(self):
        w = np.array([[0.0, 1.0], [1.0, 0.0]])
        W = SpatialWeightMatrix(w)
        with pytest.raises(DegenerateModel):
            SdpdModel(W, [1.0, 1.0], [0.1, 0.2], ErrorSpec(np.ones(2)))

    def test_transition_eigenvalues_are_lambda1(self, model10):
        ev = np.sort(np.linalg.eigvals(model10.transition).real)
        assert_allclose(ev, np.sort(model10.lambda1), atol=1e-8)


class TestSimulate:
    def test_white_noise(self):
        W = gen_spatial_matrix("W2", 6, 0)
        # lambda0 = 0 and lambda1 ~ 0: not allowed to be exactly constant
        lam1 = np.array([0, 0, 0, 0, 0, 1e-12])
        m = SdpdModel(W, np.zeros(6), lam1, ErrorSpec(np.ones(6), seed=2))
        T = 20000
        y = simulate(m, T)
        cov = sample_covariances(y)
        assert np.max(np.abs(cov.sigma1)) < 3 / np.sqrt(T)

    def test_scalar_ar1_variance(self):
        # p=1 analogue of the reduced-form recursion
        rng = np.random.default_rng(0)
        e = rng.standard_normal(10**5 + 200)
        y = np.zeros_like(e)
        for t in range(1, e.size):
            y[t] = 0.5 * y[t - 1] + e[t]
        assert np.var(y[200:]) == pytest.approx(4 / 3, rel=0.05)

    def test_matches_lyapunov(self, model10):
        y = simulate(model10, 10**5)
        pop = population_covariances(model10)
        assert _rel_max(sample_covariances(y).sigma0, pop.sigma0) < 0.05

    def test_burn_in_insensitive(self, model10):
        a = sample_covariances(simulate(model10, 10**5, burn_in=200)).sigma0
        b = sample_covariances(simulate(model10, 10**5, burn_in=2000)).sigma0
        assert _rel_max(a, b) < 0.05

    def test_deterministic(self, model10):
        a = simulate(model10, 300)
        b = simulate(model10, 300)
        assert np.array_equal(a.values, b.values)

    def test_explosion(self, model10, monkeypatch):
        monkeypatch.setattr(SdpdModel, "transition", property(lambda self: 1.5 * np.eye(self.p)))
        with pytest.raises(Explosion):
            simulate(model10, 500, burn_in=0)

    def test_panel_shape(self, model10):
        y = simulate(model10, 123, burn_in=7)
        assert isinstance(y, PanelSeries) and (y.T, y.p) == (123, 10)


def test_random_model_settings():
    W = gen_spatial_matrix("W1", 10, 0)
    m = random_model(W, 1)
    assert np.all((m.error_spec.sigma >= 0.5) & (m.error_spec.sigma <= 1.5))
    assert m.error_spec.cross_mode is CrossMode.COMMON_FACTOR
    assert np.all(np.abs(m.lambda0) <= 0.7)
