"""Shared fixtures: reference channels used across the test modules."""

import pytest

from uvscatter.channel import build_channel

# strong-turbulence shape pairs for the two legs (first leg is the longer
# transmitter-to-volume path, hence the more developed turbulence)
LINK1_STRONG = (6.99, 1.05)
LINK2_STRONG = (4.59, 1.23)


@pytest.fixture(scope="session")
def strong_channel():
    """Cascade with the strong-turbulence shapes and unit leg means.

    Error rates depend only on the mean SNR and the shapes, so unit means
    keep the numbers readable without losing generality.
    """
    return build_channel(1.0, 1.0, LINK1_STRONG, LINK2_STRONG)


@pytest.fixture(scope="session")
def scaled_channel():
    """Same shapes at a realistic sub-nanowatt power scale."""
    return build_channel(3.7e-9, 2.1e-4, LINK1_STRONG, LINK2_STRONG)
