"""Tests for skeleton iteration, snapping and max-norm rounding."""

import json
import logging
import math

import numpy as np
import pytest

from colorful_balancing.exceptions import (
    AmbiguousFamilyError,
    InvariantViolationError,
    PreconditionViolatedError,
)
from colorful_balancing.linalg import Rng
from colorful_balancing.maxnorm import (
    WalkConfig,
    iterate_skeleton,
    maxnorm_bound,
    maxnorm_select,
    omega,
    snap_to_vertex,
)
from colorful_balancing.model import Coefficients, Instance, NormKind, Selection


@pytest.fixture
def triple_family():
    """A family of three members and a pair in dimension three."""
    return Instance.from_families(
        [
            [[1.0, 0.0, 0.0], [-0.5, 0.5, 0.0], [-0.5, -0.5, 0.0]],
            [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
        ],
        "linf",
    )


class TestIterateSkeleton:
    """Test suite for iterate_skeleton."""

    def test_sharp_family(self, sharp_linf, practical_cfg):
        """Test that one round leaves a single large coordinate per family."""
        lam = Coefficients([0.5] * 8, sharp_linf)
        mu_hat, stats = iterate_skeleton(sharp_linf, lam, practical_cfg)
        above = mu_hat.entries > 0.099
        assert np.bincount(sharp_linf.family_index[above], minlength=4).tolist() == [1] * 4
        assert stats.rounds >= 1
        assert stats.round_sizes[0] == 8
        assert stats.movement <= min(stats.movement_budget, stats.local_budget)
        assert mu_hat.in_simplex()

    def test_round_sizes_halve(self, triple_family, practical_cfg):
        """Test that every round at most halves the active set."""
        lam = Coefficients([0.4, 0.3, 0.3, 0.5, 0.5], triple_family)
        mu_hat, stats = iterate_skeleton(triple_family, lam, practical_cfg, Rng(4))
        sizes = stats.round_sizes
        assert sizes[0] == 5
        assert all(2 * b <= a for a, b in zip(sizes, sizes[1:]))
        assert stats.movement == pytest.approx(sum(omega(m, 3) for m in sizes))
        assert np.allclose(mu_hat.family_sums(), 1.0, atol=1e-8)

    def test_selection_needs_no_round(self, triple_family, practical_cfg):
        """Test that a selection vector is returned untouched."""
        lam = Selection((1, 0)).to_coefficients(triple_family)
        mu_hat, stats = iterate_skeleton(triple_family, lam, practical_cfg)
        assert stats.rounds == 0
        assert mu_hat.entries.tolist() == lam.entries.tolist()

    def test_reproducible(self, sharp_linf, practical_cfg):
        """Test that the iteration is a function of the seed."""
        lam = Coefficients([0.5] * 8, sharp_linf)
        first, _ = iterate_skeleton(sharp_linf, lam, practical_cfg)
        second, _ = iterate_skeleton(sharp_linf, lam, practical_cfg)
        assert np.array_equal(first.entries, second.entries)

    def test_telemetry(self, sharp_linf, practical_cfg, caplog):
        """Test that every round emits one JSON telemetry record."""
        lam = Coefficients([0.5] * 8, sharp_linf)
        with caplog.at_level(logging.INFO, logger="colorful_balancing.telemetry"):
            _, stats = iterate_skeleton(sharp_linf, lam, practical_cfg)
        records = [
            json.loads(r.getMessage())
            for r in caplog.records
            if r.name == "colorful_balancing.telemetry"
        ]
        assert len(records) == stats.rounds
        assert records[0]["round"] == 1
        assert records[0]["m"] == 8
        keys = {"round", "m", "omega", "steps_taken", "restarts", "frozen_count"}
        assert set(records[0]) == keys

    def test_too_many_columns(self, mixed_instance, practical_cfg):
        """Test that m > 2d is rejected."""
        lam = Coefficients([1 / 3, 1 / 3, 1 / 3, 0.5, 0.5, 0.5, 0.5], mixed_instance)
        with pytest.raises(PreconditionViolatedError):
            iterate_skeleton(mixed_instance, lam, practical_cfg)

    def test_not_in_simplex(self, triple_family, practical_cfg):
        """Test that the start must lie in Delta_U."""
        lam = Coefficients([0.4, 0.3, 0.3, 0.5, 0.6], triple_family)
        with pytest.raises(ValueError):
            iterate_skeleton(triple_family, lam, practical_cfg)

    def test_delta_too_large_for_family(self):
        """Test that delta must stay below one over the largest family size."""
        member = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        inst = Instance.from_families([[member] * 11], "linf")
        lam = Coefficients([1 / 11] * 11, inst)
        with pytest.raises(PreconditionViolatedError):
            iterate_skeleton(inst, lam, WalkConfig(delta=0.099))


class TestSnapToVertex:
    """Test suite for snap_to_vertex."""

    def test_snap(self, triple_family):
        """Test that the single large coordinate of each family is chosen."""
        mu_hat = Coefficients([0.02, 0.9, 0.08, 0.05, 0.95], triple_family)
        assert snap_to_vertex(triple_family, mu_hat, 0.099).choices == (1, 1)

    @pytest.mark.parametrize(
        "entries", [[0.5, 0.5, 0.0, 0.05, 0.95], [0.04, 0.03, 0.03, 0.05, 0.95]]
    )
    def test_ambiguous(self, triple_family, entries):
        """Test that zero or several large coordinates are rejected."""
        with pytest.raises(AmbiguousFamilyError):
            snap_to_vertex(triple_family, Coefficients(entries, triple_family), 0.05)

    def test_correction_budget(self):
        """Test that a correction above 8 d^2 delta is flagged."""
        inst = Instance.from_families([[[1.0], [-1.0], [0.0]]], "linf")
        mu_hat = Coefficients([0.5, 0.04, 0.04], inst)
        with pytest.raises(InvariantViolationError):
            snap_to_vertex(inst, mu_hat, 0.05)


class TestMaxnormSelect:
    """Test suite for maxnorm_select."""

    def test_bound(self):
        """Test the constant of the end-to-end guarantee."""
        assert maxnorm_bound(4) == 96.0
        assert maxnorm_bound(2) == pytest.approx(48 * math.sqrt(2))

    def test_sharp_family(self, sharp_linf, practical_cfg):
        """Test the rounding error on the sharp family."""
        lam = Coefficients([0.5] * 8, sharp_linf)
        selection, stats = maxnorm_select(sharp_linf, lam, practical_cfg)
        error = NormKind.MAXIMUM.of(lam.image() - selection.vector_sum(sharp_linf))
        assert error == pytest.approx(1.0)
        assert stats.snap_error <= 8 * 16 * 0.099

    def test_three_member_family(self, triple_family, practical_cfg):
        """Test the rounding error with a family of three."""
        lam = Coefficients([0.4, 0.3, 0.3, 0.5, 0.5], triple_family)
        selection, stats = maxnorm_select(triple_family, lam, practical_cfg)
        error = NormKind.MAXIMUM.of(lam.image() - selection.vector_sum(triple_family))
        assert error <= maxnorm_bound(3)
        assert stats.to_dict()["rounds"] == stats.rounds
