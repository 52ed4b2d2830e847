import numpy as np
import pytest

from mixmnl import (
    RankDeficiencyError,
    ValidationError,
    altmin_complete,
    symmetrize_and_eig,
)
from mixmnl.altmin import default_iteration_count


def low_rank_offdiag(n, rank, seed):
    """Random PSD rank-r matrix with its diagonal removed, plus the truth."""
    rng = np.random.default_rng(seed)
    factors = rng.standard_normal((n, rank))
    full = factors @ factors.T
    hollow = full.copy()
    np.fill_diagonal(hollow, 0.0)
    return hollow, full


class TestCompletion:
    def test_recovers_noiseless_low_rank(self):
        hollow, full = low_rank_offdiag(40, 2, 0)
        result = altmin_complete(hollow, 2, n_iterations=30)
        sigma_r = np.linalg.svd(full, compute_uv=False)[1]
        off = ~np.eye(40, dtype=bool)
        assert np.abs(result.matrix - full)[off].max() <= 1e-6 * sigma_r

    def test_recovers_diagonal_too(self):
        # The completed matrix restores what the hollow input erased.
        hollow, full = low_rank_offdiag(30, 3, 1)
        result = altmin_complete(hollow, 3, n_iterations=40)
        np.testing.assert_allclose(np.diag(result.matrix), np.diag(full), atol=1e-5)

    def test_objective_monotone(self):
        hollow, _ = low_rank_offdiag(25, 2, 2)
        result = altmin_complete(hollow, 2, n_iterations=12)
        objectives = np.asarray(result.objectives)
        assert len(objectives) == 12
        assert (np.diff(objectives) <= 1e-9 * (1 + objectives[:-1])).all()

    def test_objective_decays_geometrically(self):
        hollow, _ = low_rank_offdiag(25, 2, 3)
        result = altmin_complete(hollow, 2, n_iterations=25)
        objectives = np.asarray(result.objectives)
        # once past the transient, each sweep should cut the residual hard
        late = objectives[5:15]
        assert late[-1] <= 1e-6 * late[0]

    def test_default_iterations_suffice(self):
        hollow, full = low_rank_offdiag(40, 2, 4)
        result = altmin_complete(hollow, 2)
        off = ~np.eye(40, dtype=bool)
        sigma_r = np.linalg.svd(full, compute_uv=False)[1]
        assert np.abs(result.matrix - full)[off].max() <= 1e-6 * sigma_r

    def test_zero_iterations_rejected(self):
        hollow, _ = low_rank_offdiag(10, 1, 5)
        with pytest.raises(ValidationError):
            altmin_complete(hollow, 1, n_iterations=0)

    def test_rejects_asymmetric(self):
        m = np.zeros((5, 5))
        m[0, 1] = 1.0
        with pytest.raises(ValidationError):
            altmin_complete(m, 1)

    def test_rejects_nonfinite(self):
        m = np.zeros((5, 5))
        m[0, 1] = m[1, 0] = np.nan
        with pytest.raises(ValidationError):
            altmin_complete(m, 1)

    def test_input_diagonal_ignored(self):
        # Anything sitting on the input diagonal must not change the output.
        hollow, _ = low_rank_offdiag(20, 2, 6)
        spoiled = hollow.copy()
        np.fill_diagonal(spoiled, 123.0)
        a = altmin_complete(hollow, 2, n_iterations=10)
        b = altmin_complete(spoiled, 2, n_iterations=10)
        np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-12)

    def test_report_fields(self):
        hollow, _ = low_rank_offdiag(15, 2, 7)
        report = altmin_complete(hollow, 2, n_iterations=5).report()
        assert len(report["objectives"]) == 5
        assert report["ridge_steps"] == []

    def test_survives_rank_deficient_iterate(self):
        # A rank-1 target with rank-2 fitting makes the per-row normal
        # equations singular; the ridge fallback has to carry it through.
        rng = np.random.default_rng(8)
        v = rng.standard_normal(12)
        full = np.outer(v, v)
        hollow = full.copy()
        np.fill_diagonal(hollow, 0.0)
        result = altmin_complete(hollow, 2, n_iterations=25)
        off = ~np.eye(12, dtype=bool)
        assert np.abs(result.matrix - full)[off].max() <= 1e-6


class TestDefaultIterationCount:
    def test_grows_with_norm(self):
        small = np.ones((4, 4)) - np.eye(4)
        assert default_iteration_count(small * 1e6) > default_iteration_count(small)

    def test_at_least_one(self):
        assert default_iteration_count(np.zeros((4, 4))) >= 1


class TestSymmetrizeAndEig:
    def test_diagonal_oracle(self):
        basis_values = symmetrize_and_eig(np.diag([3.0, 2.0, 1.0]), 2)
        np.testing.assert_allclose(basis_values.values, [3.0, 2.0])
        np.testing.assert_allclose(
            np.abs(basis_values.vectors), np.eye(3)[:, :2], atol=1e-14
        )

    def test_symmetrizes_first(self):
        m = np.array([[2.0, 1.0], [0.0, 1.0]])
        result = symmetrize_and_eig(m, 1)
        sym = (m + m.T) / 2
        expected = np.linalg.eigvalsh(sym)[-1]
        assert result.values[0] == pytest.approx(expected)

    def test_nonpositive_spectrum_raises_with_details(self):
        m = np.diag([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        with pytest.raises(RankDeficiencyError) as info:
            symmetrize_and_eig(m, 2)
        assert info.value.spectrum is not None
        assert len(info.value.spectrum) == 8

    def test_negative_definite_raises(self):
        with pytest.raises(RankDeficiencyError):
            symmetrize_and_eig(-np.eye(4), 1)

    def test_whitening_identities(self):
        rng = np.random.default_rng(10)
        factors = rng.standard_normal((10, 3))
        m = factors @ factors.T
        basis = symmetrize_and_eig(m, 3)
        w = basis.whitening_map
        b = basis.coloring_map
        np.testing.assert_allclose(b.T @ w, np.eye(3), atol=1e-10)
        np.testing.assert_allclose(w.T @ m @ w, np.eye(3), atol=1e-8)

    def test_rank_bounds_checked(self):
        with pytest.raises(ValidationError):
            symmetrize_and_eig(np.eye(3), 4)
        with pytest.raises(ValidationError):
            symmetrize_and_eig(np.eye(3), 0)
