"""Pytest configuration and fixtures for the balancing tests."""

import logging

import pytest

from colorful_balancing.generators import GenSpec, generate
from colorful_balancing.linalg import Rng
from colorful_balancing.maxnorm import WalkConfig
from colorful_balancing.model import Coefficients, Instance
from colorful_balancing.utils.utils import TELEMETRY_LOGGER


@pytest.fixture
def signed_pair():
    """A single family {e_1, -e_1} in dimension one."""
    return Instance.from_families([[[1.0], [-1.0]]], "linf")


@pytest.fixture
def sharp_l2():
    """Families {+e_i, -e_i} for i = 1..4 in the Euclidean ball."""
    inst, _ = generate(GenSpec(d=4, n=4, kind="sharp"))
    return inst


@pytest.fixture
def sharp_linf(sharp_l2):
    """The families of ``sharp_l2`` declared in the maximum norm."""
    return sharp_l2.with_norm("linf")


@pytest.fixture
def half_weights(sharp_l2):
    """The witness with every coefficient one half."""
    return Coefficients([0.5] * sharp_l2.m, sharp_l2)


@pytest.fixture
def mixed_instance():
    """Three small families in the plane with 0 in the sum of their hulls."""
    return Instance.from_families(
        [
            [[1.0, 0.0], [-1.0, 0.0], [0.0, 0.5]],
            [[0.0, 1.0], [0.0, -1.0]],
            [[0.5, 0.5], [-0.5, -0.5]],
        ],
        "l2",
    )


@pytest.fixture
def dirichlet_case():
    """A generated Dirichlet instance with its witness."""
    return generate(GenSpec(d=4, n=6, sizes=(2, 4), kind="dirichlet", seed=7))


@pytest.fixture
def practical_cfg():
    """Practical-mode walk parameters with a fixed seed."""
    return WalkConfig(seed=11)


@pytest.fixture
def rng():
    """A fixed random stream."""
    return Rng(2024)


@pytest.fixture
def telemetry_logger():
    """The telemetry logger, restored to propagating with no handlers afterwards."""
    telemetry = logging.getLogger(TELEMETRY_LOGGER)
    yield telemetry
    for handler in list(telemetry.handlers):
        telemetry.removeHandler(handler)
        handler.close()
    telemetry.propagate = True
    telemetry.setLevel(logging.NOTSET)
