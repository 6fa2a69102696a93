import numpy as np
import pytest
from numpy.testing import assert_allclose

from sdpd.bench import ase_row1
from sdpd.errors import NearSingular, NotComputable, ZeroRow
from sdpd.moments import CovSource, LagCovariancePair, population_covariances, sample_covariances
from sdpd.process_sim import random_model, simulate
from sdpd.reduced_form import (
    Provenance,
    TransitionMatrix,
    build_reduced,
    check_representable,
    estimate_latent_w,
    read_transition_csv,
    sdpd_transition_estimator,
    var_yule_walker,
)
from sdpd.spatial_weights import SpatialWeightMatrix, gen_spatial_matrix, renormalize


class TestBuild:
    def test_zero_lambda0_is_diagonal(self):
        W = gen_spatial_matrix("W1", 6, 0)
        lam1 = np.linspace(-0.5, 0.5, 6)
        A = build_reduced(W, np.zeros(6), lam1)
        assert_allclose(A.entries, np.diag(lam1), atol=1e-15)

    def test_eigenvalues_are_lambda1(self, model10):
        A = build_reduced(model10.W, model10.lambda0, model10.lambda1)
        assert_allclose(np.sort(np.linalg.eigvals(A.entries).real), np.sort(model10.lambda1), atol=1e-8)

    def test_against_naive_inverse(self, model10):
        S = np.eye(10) - np.diag(model10.lambda0) @ model10.W.entries
        naive = np.linalg.inv(S) @ np.diag(model10.lambda1) @ S
        A = build_reduced(model10.W, model10.lambda0, model10.lambda1)
        assert np.max(np.abs(A.entries - naive)) < 1e-12
        # similarity: S A = D(lambda1) S
        assert_allclose(S @ A.entries, np.diag(model10.lambda1) @ S, atol=1e-12)

    def test_normalization_invariant(self):
        W = gen_spatial_matrix("W2", 8, 1, "none")
        W1n, d1 = renormalize(W, "l1")
        W2n, d2 = renormalize(W, "l2")
        lam0 = np.linspace(-0.4, 0.4, 8)
        lam1 = np.linspace(0.3, -0.3, 8)
        a = build_reduced(W1n, lam0 * d1, lam1)
        b = build_reduced(W2n, lam0 * d2, lam1)
        assert_allclose(a.entries, b.entries, atol=1e-12)

    def test_singular_filter(self):
        W = SpatialWeightMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        with pytest.raises(NearSingular):
            build_reduced(W, [1.0, 1.0], [0.1, 0.2])

    def test_csv_roundtrip(self, tmp_path, model10):
        A = build_reduced(model10.W, model10.lambda0, model10.lambda1, Provenance.SDPD_KNOWN_W)
        A.to_csv(tmp_path / "a.csv")
        back = read_transition_csv(tmp_path / "a.csv")
        assert back.provenance is Provenance.SDPD_KNOWN_W
        assert np.array_equal(back.entries, A.entries)


class TestVar:
    def test_population_exact(self, model10):
        A = var_yule_walker(population_covariances(model10))
        assert np.max(np.abs(A.entries - model10.transition)) < 1e-10

    def test_scalar(self):
        cov = LagCovariancePair(np.array([[4 / 3]]), np.array([[2 / 3]]), CovSource.POPULATION)
        assert var_yule_walker(cov).entries[0, 0] == pytest.approx(0.5)

    def test_orientation_on_sample(self, model10):
        y = simulate(model10, 50000)
        A = var_yule_walker(y)
        assert np.max(np.abs(A.entries - model10.transition)) < 0.05

    def test_t_equals_p(self):
        with pytest.raises(NotComputable):
            var_yule_walker(np.random.default_rng(0).standard_normal((5, 5)))

    def test_singular_sigma0(self):
        s0 = np.ones((2, 2))
        with pytest.raises(NotComputable):
            var_yule_walker(LagCovariancePair(s0, 0.5 * s0, CovSource.POPULATION))


class TestLatentW:
    def test_invariants(self, model10):
        W = estimate_latent_w(simulate(model10, 400))
        assert np.all(np.diag(W.entries) == 0.0)
        assert_allclose(np.linalg.norm(W.entries, axis=1), 1.0, atol=1e-12)
        assert_allclose(W.entries * np.linalg.norm(W.entries, axis=1)[:, None],
                        W.entries, atol=1e-12)

    def test_is_scaled_correlation(self, model10):
        cov = population_covariances(model10)
        W = estimate_latent_w(cov)
        sd = np.sqrt(np.diag(cov.sigma0))
        r = cov.sigma0 / np.outer(sd, sd)
        np.fill_diagonal(r, 0.0)
        ratio = W.entries[r != 0] / r[r != 0]
        rows = np.nonzero(r)[0]
        for i in range(10):
            assert np.ptp(ratio[rows == i]) < 1e-12

    def test_zero_row(self):
        s0 = np.diag([1.0, 2.0, 3.0])
        s0[1, 2] = s0[2, 1] = 0.5
        with pytest.raises(ZeroRow):
            estimate_latent_w(LagCovariancePair(s0, 0.1 * s0, CovSource.POPULATION))

    def test_p_greater_than_t(self):
        W = gen_spatial_matrix("W1", 100, 0)
        m = random_model(W, 0)
        y = simulate(m, 50)
        A, res, W_hat = sdpd_transition_estimator(y, None)
        assert A.provenance is Provenance.SDPD_ESTIMATED_W
        assert np.all(np.isfinite(A.entries))
        assert W_hat.p == 100
        with pytest.raises(NotComputable):
            var_yule_walker(y)


class TestSdpdTransition:
    def test_population_known_w(self, model10):
        A, res, W = sdpd_transition_estimator(population_covariances(model10), model10.W)
        assert W is model10.W
        assert np.max(np.abs(A.entries - model10.transition)) < 1e-8

    @pytest.mark.xfail(
        strict=True,
        reason="correlation-based W-hat leaves an O(1) misspecification bias; "
        "mean ASE ratio is about 9 at T=1000, p=10 (see decisions ledger)",
    )
    def test_latent_within_factor_three(self):
        W = gen_spatial_matrix("W1", 10, 0)
        known, latent = [], []
        for r in range(100):
            m = random_model(W, np.random.SeedSequence([0, r]))
            y = simulate(m, 1000)
            known.append(ase_row1(sdpd_transition_estimator(y, W)[0], m.transition))
            latent.append(ase_row1(sdpd_transition_estimator(y, None)[0], m.transition))
        assert np.mean(latent) <= 3 * np.mean(known)

    def test_latent_beats_var(self):
        W = gen_spatial_matrix("W1", 60, 0)
        latent, var = [], []
        for r in range(10):
            m = random_model(W, np.random.SeedSequence([0, r]))
            y = simulate(m, 500)
            latent.append(ase_row1(sdpd_transition_estimator(y, None)[0], m.transition))
            var.append(ase_row1(var_yule_walker(y), m.transition))
        assert np.median(latent) < np.median(var)


class TestRepresentable:
    def test_diagonal(self):
        rep = check_representable(np.diag([0.1, 0.5, -0.4]))
        assert rep.representable and rep.distinct

    def test_sdpd_model(self, model10):
        assert check_representable(TransitionMatrix(model10.transition, "true_model")).representable

    def test_jordan_block(self):
        rep = check_representable(np.array([[0.5, 1.0], [0.0, 0.5]]))
        assert not rep.diagonalizable and rep.eigen_real and not rep.representable
        assert rep.multiplicities[0][1:] == (2, 1)

    def test_rotation(self):
        rep = check_representable(np.array([[0.0, -0.5], [0.5, 0.0]]))
        assert not rep.eigen_real and not rep.representable

    def test_repeated_but_diagonalizable(self):
        rep = check_representable(0.3 * np.eye(3))
        assert rep.representable and not rep.distinct
        assert rep.multiplicities[0][1:] == (3, 3)


def test_transition_validation():
    from sdpd.errors import DataError

    with pytest.raises(DataError):
        TransitionMatrix(np.ones((2, 3)), "true_model")
    with pytest.raises(DataError):
        TransitionMatrix(np.array([[np.nan]]), "true_model")


def test_sample_cov_input_accepted(model10):
    cov = sample_covariances(simulate(model10, 200))
    assert var_yule_walker(cov).p == 10
