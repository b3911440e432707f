"""Shared fixtures.

The expensive Monte Carlo measures are session-scoped so the acceptance
suite and the unit tests share one sampling run each.
"""

import pytest

from cantorlab import Circle, Segment, WalkConfig, preset, sample_harmonic_measure


@pytest.fixture(scope="session")
def corner():
    return preset("corner4")


@pytest.fixture(scope="session")
def thirds():
    return preset("middle-thirds")


@pytest.fixture(scope="session")
def circle_em():
    return sample_harmonic_measure(
        Circle(), WalkConfig(samples=100_000, seed=1, threads=4)
    )


@pytest.fixture(scope="session")
def segment_em():
    return sample_harmonic_measure(
        Segment(), WalkConfig(samples=100_000, seed=2, threads=4)
    )


@pytest.fixture(scope="session")
def corner_em_1m(corner):
    return sample_harmonic_measure(
        corner, WalkConfig(samples=1_000_000, seed=1, threads=4)
    )


@pytest.fixture(scope="session")
def corner_em_100k(corner):
    return sample_harmonic_measure(
        corner, WalkConfig(samples=100_000, seed=3, threads=4)
    )


@pytest.fixture(scope="session")
def corner_em_200k(corner):
    return sample_harmonic_measure(
        corner, WalkConfig(samples=200_000, seed=3, threads=4)
    )
