"""Non-line-of-sight ultraviolet scattering link modeling.

A single-scattering UV communication link fades as the cascade of two
Gamma-Gamma turbulence processes: transmitter to common scattering volume,
then common volume to receiver.  This package builds that cascaded channel,
evaluates its received-power density by three independent routes (adaptive
quadrature of the Bessel-kernel integral, a Meijer G-function closed form,
and a truncated power series with computable error bounds), and derives
average error rates for subcarrier BPSK/QPSK/DPSK/NCFSK modulation along
with high-SNR asymptotes and SNR penalty factors.  A Monte-Carlo sampler
and a batch CLI (CSV tables, optional SVG plots) sit on top.
"""

from .channel import (
    GammaGammaParams,
    NlosChannel,
    build_channel,
    gg_params_from_rytov,
    gg_pdf,
    pdf_meijer,
    pdf_quadrature,
    pdf_series,
)
from .errors import (
    AccuracyError,
    ConfigError,
    NoIntersectionError,
    PoleCollisionError,
    StatisticalPowerError,
)
from .geometry import (
    Atmosphere,
    LinkGeometry,
    derive_common_volume,
    e2_gain,
    ellipse_configuration,
    mean_snr,
    omega_v,
    phase_function,
)
from .mcsim import (
    SimConfig,
    empirical_error_rate,
    sample_gamma_gamma,
    sample_nlos,
)
from .modem import (
    BPSK,
    DPSK,
    NCFSK,
    QPSK,
    ErrorRateResult,
    ModulationScheme,
    SnrPenalty,
    TruncationBounds,
    asymptotic_error,
    ber_bpsk,
    ber_dpsk_ncfsk,
    error_rate_quadrature,
    ser_qpsk_meijer,
    ser_qpsk_series,
    snr_penalty,
    truncation_bounds,
)
from .specfun import (
    ContourConfig,
    MeijerGSpec,
    bessel_k,
    beta_fn,
    g_quarter,
    ln_gamma,
    meijer_g,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "Atmosphere",
    "BPSK",
    "ConfigError",
    "ContourConfig",
    "DPSK",
    "ErrorRateResult",
    "GammaGammaParams",
    "LinkGeometry",
    "MeijerGSpec",
    "ModulationScheme",
    "NCFSK",
    "NlosChannel",
    "NoIntersectionError",
    "PoleCollisionError",
    "QPSK",
    "SimConfig",
    "SnrPenalty",
    "StatisticalPowerError",
    "TruncationBounds",
    "asymptotic_error",
    "ber_bpsk",
    "ber_dpsk_ncfsk",
    "bessel_k",
    "beta_fn",
    "build_channel",
    "derive_common_volume",
    "e2_gain",
    "ellipse_configuration",
    "empirical_error_rate",
    "error_rate_quadrature",
    "g_quarter",
    "gg_params_from_rytov",
    "gg_pdf",
    "ln_gamma",
    "mean_snr",
    "meijer_g",
    "omega_v",
    "pdf_meijer",
    "pdf_quadrature",
    "pdf_series",
    "phase_function",
    "sample_gamma_gamma",
    "sample_nlos",
    "ser_qpsk_meijer",
    "ser_qpsk_series",
    "snr_penalty",
    "truncation_bounds",
]
