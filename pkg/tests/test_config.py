"""Tests for walk parameters."""

import math

import pytest

from colorful_balancing.maxnorm import (
    FidelityMode,
    WalkConfig,
    default_delta,
    horizon,
    omega,
    practical_epsilon,
    solve_epsilon,
)
from colorful_balancing.maxnorm.config import faithful_violations


class TestOmega:
    """Test suite for the slab half-width."""

    def test_single_coordinate(self):
        """Test omega(1) in dimension one."""
        assert omega(1, 1) == pytest.approx(4.0 * math.sqrt(math.log(8.0)))
        assert omega(1, 1) == pytest.approx(5.768108, abs=1e-6)

    def test_full_width(self):
        """Test omega(2d) = 4 sqrt(2d ln 4)."""
        for d in (1, 3, 10):
            assert omega(2 * d, d) == pytest.approx(4.0 * math.sqrt(2 * d * math.log(4.0)))
        assert omega(2, 1) == pytest.approx(6.660437, abs=1e-6)

    @pytest.mark.parametrize("m", [0, 5])
    def test_out_of_range(self, m):
        """Test that m outside [1, 2d] is rejected."""
        with pytest.raises(ValueError):
            omega(m, 2)


class TestStepScale:
    """Test suite for epsilon selection."""

    def test_faithful_epsilon_small_case(self):
        """Test the largest admissible power of two for m=4, d=2."""
        assert solve_epsilon(4, 2, 0.05) == 2.0**-21

    def test_faithful_epsilon_one_dimension(self):
        """Test the largest admissible power of two for m=2, d=1."""
        epsilon = solve_epsilon(2, 1, 0.05)
        assert epsilon == 2.0**-18
        assert horizon(epsilon) == 549_755_813_888

    def test_faithful_epsilon_is_largest(self):
        """Test that doubling the solved epsilon violates a constraint."""
        epsilon = solve_epsilon(4, 2, 0.05)
        assert faithful_violations(epsilon, 4, 2, 0.05) == []
        assert faithful_violations(2 * epsilon, 4, 2, 0.05)

    def test_faithful_delta_range(self):
        """Test that delta must lie in (0, 0.1)."""
        with pytest.raises(ValueError):
            solve_epsilon(4, 2, 0.1)

    def test_practical_epsilon(self):
        """Test that the practical scale is delta / 4 for usual deltas."""
        assert practical_epsilon(0.05) == 0.0125
        assert practical_epsilon(0.099) == pytest.approx(0.02475)

    def test_horizon(self):
        """Test T = ceil(K / epsilon^2)."""
        assert horizon(0.5) == 32
        assert horizon(0.5, k=3) == 12


class TestDefaultDelta:
    """Test suite for default_delta."""

    def test_capped(self):
        """Test that small dimensions hit the 0.099 cap."""
        assert default_delta(1, 2) == 0.099
        assert default_delta(4, 4) == 0.099

    def test_dimension_term(self):
        """Test the d^(-3/2) term in larger dimensions."""
        assert default_delta(16, 2) == pytest.approx(1.0 / 64.0)

    def test_family_term(self):
        """Test the 1 / (1 + max family size) term."""
        assert default_delta(2, 20) == pytest.approx(1.0 / 21.0)


class TestWalkConfig:
    """Test suite for WalkConfig."""

    def test_defaults(self):
        """Test the default configuration."""
        cfg = WalkConfig()
        assert cfg.mode is FidelityMode.PRACTICAL
        assert cfg.max_restarts == 200
        assert cfg.epsilon is None and cfg.delta is None

    @pytest.mark.parametrize(
        "kwargs",
        [{"delta": 0.0}, {"delta": 0.1}, {"epsilon": -1.0}, {"max_restarts": 0}],
    )
    def test_invalid(self, kwargs):
        """Test that invalid parameters are rejected."""
        with pytest.raises(ValueError):
            WalkConfig(**kwargs)

    def test_practical_round(self):
        """Test that a practical round resolves delta and epsilon."""
        cfg = WalkConfig().for_round(4, 2, 2)
        assert cfg.delta == 0.099
        assert cfg.epsilon == pytest.approx(0.02475)
        assert cfg.horizon == math.ceil(8 / cfg.epsilon**2)

    def test_faithful_round(self):
        """Test that a faithful round solves for epsilon."""
        cfg = WalkConfig(delta=0.05, mode="faithful").for_round(4, 2, 2)
        assert cfg.epsilon == 2.0**-21

    def test_faithful_rejects_large_epsilon(self):
        """Test that a faithful walk refuses an inadmissible epsilon."""
        cfg = WalkConfig(delta=0.05, epsilon=0.01, mode=FidelityMode.FAITHFUL)
        with pytest.raises(ValueError, match="rejected"):
            cfg.for_round(4, 2, 2)

    def test_explicit_delta_kept(self):
        """Test that a given delta is not replaced by the default."""
        assert WalkConfig(delta=0.02).with_delta(1, 2).delta == 0.02

    def test_unresolved_horizon(self):
        """Test that the horizon needs epsilon."""
        with pytest.raises(ValueError):
            WalkConfig().horizon

    def test_dict_round_trip(self):
        """Test the JSON mapping, ignoring unknown keys."""
        cfg = WalkConfig(delta=0.05, seed=3, mode="faithful")
        data = cfg.to_dict()
        assert data["mode"] == "faithful"
        assert WalkConfig.from_dict({**data, "unknown": 1}) == cfg
