"""Tests for subspaces, projections and seeded sampling."""

import numpy as np
import pytest

from colorful_balancing.linalg import (
    Rng,
    Subspace,
    gaussian_batch,
    gaussian_on,
    gram_schmidt,
    null_space_basis,
    project,
)


class TestGramSchmidt:
    """Test suite for gram_schmidt."""

    def test_orthonormal_output(self):
        """Test that the output rows are orthonormal."""
        vectors = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
        basis = gram_schmidt(vectors)
        assert basis.shape == (3, 3)
        assert np.allclose(basis @ basis.T, np.eye(3), atol=1e-12)

    def test_dependent_rows_dropped(self):
        """Test that a linear combination of earlier rows is skipped."""
        vectors = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, -3.0, 0.0]])
        assert gram_schmidt(vectors).shape == (2, 3)

    def test_orthogonal_to_fixed_rows(self):
        """Test that candidates are orthogonalized against the given rows."""
        against = np.array([[1.0, 0.0, 0.0]])
        basis = gram_schmidt(np.array([[1.0, 1.0, 0.0]]), against=against)
        assert np.allclose(basis, [[0.0, 1.0, 0.0]])

    def test_all_dependent(self):
        """Test that an empty array of the right width comes back."""
        basis = gram_schmidt(np.zeros((2, 4)))
        assert basis.shape == (0, 4)


class TestNullSpace:
    """Test suite for null_space_basis."""

    def test_dimension_drops_by_rank(self):
        """Test that the dimension drops by the rank of the normals."""
        normals = [[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0]]
        sub = null_space_basis(normals, Subspace.full(4))
        assert sub.dim == 2
        assert sub.orthonormality_error() < 1e-12
        assert sub.annihilation_error() < 1e-12

    def test_nested_constraints(self):
        """Test that constraints accumulate when cutting a subspace again."""
        first = null_space_basis([[1.0, 0.0, 0.0, 0.0]], Subspace.full(4))
        second = null_space_basis([[0.0, 1.0, 1.0, 0.0]], first)
        assert second.dim == 2
        assert second.normals.shape == (2, 4)
        assert second.annihilation_error() < 1e-12
        assert np.allclose(second.basis[:, 0], 0.0)

    def test_zero_subspace(self):
        """Test that cutting the zero subspace stays zero."""
        sub = null_space_basis([[1.0, 0.0]], Subspace.zero(2))
        assert sub.dim == 0

    def test_no_normals(self):
        """Test that no normals leave the subspace unchanged."""
        sub = null_space_basis(np.zeros((0, 3)), Subspace.full(3))
        assert sub.dim == 3

    def test_full_rank_normals(self):
        """Test that a complete set of normals gives the zero subspace."""
        sub = null_space_basis(np.eye(3), Subspace.full(3))
        assert sub.dim == 0
        assert sub.basis.shape == (0, 3)

    def test_embed_keeps_outside_zero(self):
        """Test that embedded basis vectors are exactly zero off the columns."""
        sub = null_space_basis([[1.0, 1.0]], Subspace.full(2))
        embedded = sub.embed([1, 3], 5)
        assert embedded.basis.shape == (1, 5)
        assert np.all(embedded.basis[:, [0, 2, 4]] == 0.0)
        assert embedded.orthonormality_error() < 1e-12


class TestProjection:
    """Test suite for project."""

    def test_idempotent(self):
        """Test that projecting twice equals projecting once."""
        sub = null_space_basis([[1.0, 2.0, 3.0]], Subspace.full(3))
        u = np.array([0.3, -1.2, 2.5])
        once = project(sub, u)
        assert np.allclose(project(sub, once), once, atol=1e-12)
        assert abs(np.dot(once, [1.0, 2.0, 3.0])) < 1e-12

    def test_zero_subspace(self):
        """Test that the projection onto the zero subspace is zero."""
        assert project(Subspace.zero(3), [1.0, 2.0, 3.0]).tolist() == [0.0, 0.0, 0.0]

    def test_trace_equals_dimension(self):
        """Test that the squared projections of the unit vectors sum to the dimension."""
        normals = [[1.0, 1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 0.0, 0.0, 0.0]]
        sub = null_space_basis(normals, Subspace.full(5))
        total = sum(float(np.sum(project(sub, e) ** 2)) for e in np.eye(5))
        assert total == pytest.approx(sub.dim)


class TestRng:
    """Test suite for the seeded random stream."""

    def test_same_seed_same_stream(self):
        """Test that equal seeds reproduce the same draws."""
        assert np.array_equal(Rng(5).standard_normal(8), Rng(5).standard_normal(8))

    def test_derived_streams_differ(self):
        """Test that derived streams are independent of their parent and siblings."""
        parent = Rng(5)
        a = parent.derive(0).standard_normal(4)
        b = parent.derive(1).standard_normal(4)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, Rng(5).standard_normal(4))

    def test_derive_is_reproducible(self):
        """Test that deriving the same key twice gives the same stream."""
        first = Rng(9).derive(2, 3).standard_normal(3)
        second = Rng(9, key=(2,)).derive(3).standard_normal(3)
        assert np.array_equal(first, second)

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        """Test that seeds outside the unsigned 64-bit range are rejected."""
        with pytest.raises(ValueError):
            Rng(seed)

    def test_choice_degenerate(self, rng):
        """Test that a point mass is always drawn."""
        assert rng.choice(np.array([0.0, 1.0, 0.0])) == 1


class TestGaussian:
    """Test suite for Gaussian sampling on subspaces."""

    def test_sample_lies_in_subspace(self, rng):
        """Test that samples are annihilated by the constraint normals."""
        sub = null_space_basis([[1.0, 1.0, 1.0]], Subspace.full(3))
        sample = gaussian_on(sub, rng)
        assert abs(sample.sum()) < 1e-12

    def test_zero_subspace(self, rng):
        """Test that sampling the zero subspace gives zeros."""
        assert gaussian_on(Subspace.zero(2), rng).tolist() == [0.0, 0.0]
        assert gaussian_batch(Subspace.zero(2), rng, 3).shape == (3, 2)

    def test_batch_shape(self, rng):
        """Test the shape of a batch of samples."""
        sub = null_space_basis([[1.0, 0.0, 0.0, 0.0]], Subspace.full(4))
        batch = gaussian_batch(sub, rng, 10)
        assert batch.shape == (10, 4)
        assert np.all(batch[:, 0] == 0.0)
