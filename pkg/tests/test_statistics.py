"""Statistical checks of the random components; slow."""

import math

import numpy as np
import pytest

from colorful_balancing.euclid import sample_selection
from colorful_balancing.generators import GenSpec, generate
from colorful_balancing.linalg import (
    Rng,
    Subspace,
    gaussian_batch,
    gaussian_on,
    null_space_basis,
    project,
)
from colorful_balancing.maxnorm import (
    GaussianWalk,
    SlabSystem,
    WalkConfig,
    WalkStatus,
    run_skeleton_round,
)
from colorful_balancing.model import Coefficients, Instance

DRAWS = 100_000


@pytest.fixture(scope="module")
def sharp_runs():
    """Displacements of fixed-horizon walks on twenty signed pairs.

    Each pair walks along its own direction, so one run gives twenty
    independent coordinate displacements and twenty slab displacements.
    """
    inst, _ = generate(GenSpec(d=20, n=20, kind="sharp", norm="linf"))
    anchor = np.full(inst.m, 0.5)
    system = SlabSystem.around(inst, anchor)
    epsilon, horizon = 5e-3, 200
    moved, slabs = [], []
    for seed in range(2000):
        outcome = GaussianWalk(system, epsilon, 0.05, Rng(seed)).run(horizon, early_exit=False)
        assert outcome.status is WalkStatus.HORIZON
        moved.append(outcome.state.gamma[0::2] - 0.5)
        slabs.append(system.displacement(outcome.state.gamma))
    return epsilon, horizon, np.concatenate(moved), np.concatenate(slabs)


@pytest.mark.slow
class TestSampling:
    """Test suite for independent sampling."""

    def test_sampler_mean_squared_error(self, mixed_instance, rng):
        """Test that the mean squared error matches the summed family variances."""
        lam = Coefficients([0.2, 0.3, 0.5, 0.6, 0.4, 0.1, 0.9], mixed_instance)
        target = lam.image()
        errors = []
        for _ in range(4000):
            diff = sample_selection(mixed_instance, lam, rng).vector_sum(mixed_instance) - target
            errors.append(float(diff @ diff))
        mean = float(np.mean(errors))
        assert mean <= mixed_instance.n
        assert mean == pytest.approx(0.5525 + 0.96 + 0.18, rel=0.1)

    @pytest.mark.parametrize("seed", range(10))
    def test_sampler_error_below_family_count(self, seed):
        """Test E||sum w_i||^2 <= 1.05 k + 3 stderr around a witness."""
        inst, witness = generate(GenSpec(d=3, n=4, kind="dirichlet", seed=100 + seed))
        rng = Rng(seed)
        errors = np.empty(10_000)
        for draw in range(errors.size):
            total = sample_selection(inst, witness, rng).vector_sum(inst)
            errors[draw] = float(total @ total)
        stderr = float(np.std(errors)) / math.sqrt(errors.size)
        assert float(np.mean(errors)) <= 1.05 * inst.n + 3.0 * stderr

    def test_sampler_marginals(self):
        """Test that a half-half family picks its first member half of the time."""
        inst = Instance.from_families([[[1.0], [-1.0]]], "l2")
        lam = Coefficients([0.5, 0.5], inst)
        rng = Rng(17)
        first = sum(sample_selection(inst, lam, rng).choices[0] == 0 for _ in range(DRAWS))
        assert 0.49 <= first / DRAWS <= 0.51

    def test_projection_trace(self, rng):
        """Test that the squared projections of the unit vectors sum to the dimension."""
        normals = rng.standard_normal((13, 40))
        sub = null_space_basis(normals, Subspace.full(40))
        total = sum(float(np.sum(project(sub, e) ** 2)) for e in np.eye(40))
        assert sub.dim == 27
        assert total == pytest.approx(27.0, abs=1e-8)


@pytest.mark.slow
class TestGaussianProjection:
    """Test suite for Gaussians restricted to a subspace."""

    def test_unit_variance_on_line(self):
        """Test that single draws on R^1 have unit variance."""
        rng = Rng(3)
        sub = Subspace.full(1)
        samples = np.array([gaussian_on(sub, rng)[0] for _ in range(DRAWS)])
        assert 0.98 <= float(np.var(samples)) <= 1.02

    def test_variance_is_projected_norm(self, rng):
        """Test that Var<G, u> equals ||P(u)||^2 within 3%."""
        sub = null_space_basis(rng.standard_normal((3, 8)), Subspace.full(8))
        u = rng.standard_normal(8)
        samples = gaussian_batch(sub, rng, DRAWS) @ u
        expected = float(np.sum(project(sub, u) ** 2))
        assert float(np.var(samples)) == pytest.approx(expected, rel=0.03)

    def test_gaussian_tail(self, rng):
        """Test P(|G| >= t) <= 1.1 exp(-t^2 / 2) + 5 / sqrt(N) at t = 1, 2, 3."""
        sub = null_space_basis(rng.standard_normal((2, 6)), Subspace.full(6))
        u = rng.standard_normal(6)
        sigma = math.sqrt(float(np.sum(project(sub, u) ** 2)))
        standardized = np.abs(gaussian_batch(sub, rng, DRAWS) @ u) / sigma
        for t in (1.0, 2.0, 3.0):
            frequency = float(np.mean(standardized >= t))
            assert frequency <= 1.1 * math.exp(-(t**2) / 2) + 5.0 / math.sqrt(DRAWS)

    @pytest.mark.parametrize(("horizon", "repeats"), [(100, 200), (10_000, 20)])
    def test_expected_maximum(self, rng, horizon, repeats):
        """Test that the mean largest of T projected samples stays below 6 sqrt(ln T)."""
        sub = null_space_basis(rng.standard_normal((3, 12)), Subspace.full(12))
        normals = np.vstack([np.eye(12), rng.standard_normal((4, 12)) / math.sqrt(12)])
        maxima = []
        for _ in range(repeats):
            samples = gaussian_batch(sub, rng, horizon)
            maxima.append(float(np.max(np.abs(samples @ normals.T))))
        assert float(np.mean(maxima)) <= 6.0 * math.sqrt(math.log(horizon))


@pytest.mark.slow
class TestWalkStatistics:
    """Test suite for the walk's distribution."""

    def test_displacement_variance(self, sharp_runs):
        """Test that T steps of scale epsilon spread a coordinate by epsilon^2 T / 2."""
        epsilon, horizon, moved, _ = sharp_runs
        assert float(np.mean(moved**2)) == pytest.approx(epsilon**2 * horizon / 2, rel=0.03)

    def test_steps_have_mean_zero(self, sharp_runs):
        """Test that the summed steps average to zero within three standard errors."""
        _, _, moved, _ = sharp_runs
        stderr = float(np.std(moved)) / math.sqrt(moved.size)
        assert abs(float(np.mean(moved))) <= 3.0 * stderr

    def test_slab_martingale_tail(self, sharp_runs):
        """Test the slab displacement tail against 2.2 exp(-c^2 / 2) + 5 / sqrt(N)."""
        epsilon, horizon, _, slabs = sharp_runs
        # Each row meets its pair's direction (1, -1) / sqrt(2) with weight sqrt(2).
        sigma = epsilon * math.sqrt(2.0)
        for c in (2.0, 3.0):
            frequency = float(np.mean(np.abs(slabs) >= c * sigma * math.sqrt(horizon)))
            assert frequency <= 2.2 * math.exp(-(c**2) / 2) + 5.0 / math.sqrt(slabs.size)

    def test_practical_rounds_rarely_restart(self, sharp_linf):
        """Test that practical rounds on the sharp family almost never restart."""
        gamma = Coefficients([0.5] * 8, sharp_linf)
        restarts = 0
        for seed in range(20):
            result = run_skeleton_round(sharp_linf, gamma, WalkConfig(), Rng(seed))
            restarts += result.restarts
        assert restarts <= 2

    def test_faithful_smoke(self):
        """Test one faithful round in dimension one started next to the threshold."""
        inst = Instance.from_families([[[1.0], [-1.0]]], "linf")
        gamma = Coefficients([0.0501, 0.9499], inst)
        cfg = WalkConfig(delta=0.05, mode="faithful")
        result = run_skeleton_round(inst, gamma, cfg, Rng(1))
        assert result.epsilon == 2.0**-18
        assert result.frozen_count == 1
        assert result.coefficients.entries.sum() == pytest.approx(1.0, abs=1e-8)
