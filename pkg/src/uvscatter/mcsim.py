"""Monte-Carlo oracle for the cascaded channel and its error rates.

Samples the product of two Gamma-Gamma legs directly (each leg as the
product of independent Gamma variates for its large- and small-scale
eddies), then averages the conditional error probability over the draws.
Streams come from a counter-based generator through the seed-spawning
protocol, so results are reproducible for any stream count, and the
reduction runs in stream order so they are bit-identical across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import GammaGammaParams, NlosChannel
from .errors import StatisticalPowerError
from .modem import ErrorRateResult, ModulationScheme, conditional_error

__all__ = [
    "SimConfig",
    "empirical_error_rate",
    "philox_streams",
    "sample_gamma_gamma",
    "sample_nlos",
]

_CHUNK = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    """Sampling budget and reproducibility knobs."""

    sample_count: int
    rng_seed: int
    stream_count: int = 1
    histogram_bins: int = 50

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be >= 0")
        if self.stream_count < 1:
            raise ValueError("stream_count must be >= 1")
        if self.histogram_bins < 2:
            raise ValueError("histogram_bins must be >= 2")


def philox_streams(seed: int, count: int) -> list:
    """Independent counter-based generators spawned from one seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def sample_gamma_gamma(params: GammaGammaParams, rng: np.random.Generator,
                       size=None):
    """Draws of one Gamma-Gamma leg with the requested mean."""
    large = rng.gamma(params.alpha, 1.0 / params.alpha, size)
    small = rng.gamma(params.beta, params.mean_power / params.beta, size)
    return large * small


def sample_nlos(channel: NlosChannel, rng: np.random.Generator, size=None):
    """Draws of the cascaded received power (both legs compounded)."""
    first = sample_gamma_gamma(channel.link1, rng, size)
    second = (
        rng.gamma(channel.link2_alpha, 1.0 / channel.link2_alpha, size)
        * rng.gamma(channel.link2_beta, 1.0 / channel.link2_beta, size)
    )
    return first * channel.e2 * second


def empirical_error_rate(channel: NlosChannel, mean_snr,
                         scheme: ModulationScheme,
                         config: SimConfig) -> ErrorRateResult:
    """Sample-average error rate with its standard error.

    Raises :class:`StatisticalPowerError` when the expected number of
    errors in the budget falls below 100, since the estimate would carry
    more than ~10% relative noise.
    """
    snr = float(mean_snr)
    if snr <= 0.0:
        raise ValueError("mean_snr must be positive")
    streams = philox_streams(config.rng_seed, config.stream_count)
    base, extra = divmod(config.sample_count, config.stream_count)

    total = 0.0
    total_sq = 0.0
    for index, rng in enumerate(streams):
        need = base + (1 if index < extra else 0)
        while need > 0:
            block = min(need, _CHUNK)
            power = sample_nlos(channel, rng, block)
            irradiance = power / channel.omega_r
            rates = conditional_error(scheme, snr * irradiance * irradiance)
            total += float(np.sum(rates))
            total_sq += float(np.sum(rates * rates))
            need -= block

    n = config.sample_count
    mean = total / n
    variance = max(total_sq / n - mean * mean, 0.0)
    if n > 1:
        variance *= n / (n - 1.0)
    stderr = math.sqrt(variance / n)
    if mean * n < 100.0:
        raise StatisticalPowerError(
            f"expected error count {mean * n:.1f} below 100; "
            "raise sample_count or mean error rate"
        )
    return ErrorRateResult(mean, "monte_carlo", stderr=stderr,
                           perturbation_applied=channel.perturbation_applied)
