"""Cascaded Gamma-Gamma fading channel for a two-leg scattering link.

The received power is the product of two Gamma-Gamma variates: transmitter
to common scattering volume (mean ``omega_v``) and common volume to
receiver (conditional mean ``p_v * e2``).  Three independent density
routes are provided:

* ``pdf_quadrature`` - adaptive quadrature of the exact Bessel-kernel
  integral (the ground-truth oracle, works directly in received power);
* ``pdf_meijer``     - closed form through a 4x4 Meijer G kernel
  (normalized irradiance);
* ``pdf_series``     - truncated power series around zero, four exponent
  families, shared with the error-rate series in :mod:`uvscatter.modem`.

The series machinery cancels violently for large arguments, so every
series-type sum runs a float64 log-space pass first and redoes itself
under ``mpmath`` with an adaptive working precision when too many digits
cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError
from .specfun import MeijerGSpec, meijer_g
from .specfun import _sum_signed_logs

__all__ = [
    "GammaGammaParams",
    "NlosChannel",
    "SeriesFamily",
    "build_channel",
    "gg_params_from_rytov",
    "gg_pdf",
    "pdf_meijer",
    "pdf_quadrature",
    "pdf_series",
    "series_families",
    "series_reduce",
]

_LN2 = math.log(2.0)
# shape differences must clear integers by at least this much, both for the
# full-kernel parameters and for their halved quarter-kernel counterparts
_SHAPE_CLEARANCE = 2.5e-5


# =====================================================================
# Types
# =====================================================================


@dataclass(frozen=True)
class GammaGammaParams:
    """Shape pair and mean of one Gamma-Gamma fading leg."""

    alpha: float       # effective large-scale eddy count, > beta
    beta: float        # effective small-scale eddy count, > 0
    mean_power: float  # expected power without turbulence, watts

    def __post_init__(self):
        if not (self.alpha > self.beta > 0.0):
            raise ValueError(
                f"need alpha > beta > 0, got alpha={self.alpha}, beta={self.beta}"
            )
        if not (self.mean_power > 0.0 and math.isfinite(self.mean_power)):
            raise ValueError(f"mean_power must be positive, got {self.mean_power}")


@dataclass(frozen=True)
class NlosChannel:
    """Immutable cascade descriptor with its precomputed density constants.

    ``s``, ``a`` and ``h`` are the prefactor, exponent and composite scale
    of the cascaded density; ``omega_r`` is the mean received power (it
    equals ``omega_v * e2`` and the closed gamma-product form to
    round-off).
    """

    link1: GammaGammaParams
    link2_alpha: float
    link2_beta: float
    e2: float
    s: float
    a: float
    h: float
    omega_r: float
    perturbation_applied: bool = False

    @property
    def alpha1(self) -> float:
        return self.link1.alpha

    @property
    def beta1(self) -> float:
        return self.link1.beta

    @property
    def omega_v(self) -> float:
        return self.link1.mean_power

    @property
    def exponent_mid(self) -> float:
        """Half the sum of the second-leg shapes; recurring exponent mu."""
        return 0.5 * (self.link2_alpha + self.link2_beta)

    @property
    def kernel_b_params(self) -> tuple:
        """Lower parameters of the 4x4 Meijer kernel of the density."""
        mu = self.exponent_mid
        return (
            self.beta1 - mu,
            self.alpha1 - mu,
            0.5 * (self.link2_beta - self.link2_alpha),
            0.5 * (self.link2_alpha - self.link2_beta),
        )


class SeriesFamily(NamedTuple):
    """One of the four exponent families of the small-argument expansion.

    ``exponent`` is the shape parameter w whose family contributes terms
    proportional to p^(k + w - 1); x, y, z are its differences against the
    three other shapes (the gamma-shift arguments of the coefficients).
    """

    exponent: float
    x: float
    y: float
    z: float


def series_families(channel: NlosChannel) -> tuple:
    a1, b1 = channel.alpha1, channel.beta1
    a2, b2 = channel.link2_alpha, channel.link2_beta
    return (
        SeriesFamily(a2, a2 - b2, a2 - a1, a2 - b1),
        SeriesFamily(b2, b2 - a2, b2 - a1, b2 - b1),
        SeriesFamily(a1, a1 - b1, a1 - a2, a1 - b2),
        SeriesFamily(b1, b1 - a1, b1 - a2, b1 - b2),
    )


# =====================================================================
# Turbulence parameterization
# =====================================================================


def gg_params_from_rytov(cn2, path_length, wavelength):
    """Gamma-Gamma shapes (alpha, beta) from the plane-wave Rytov variance.

    sigma_R^2 = 1.23 Cn^2 k^(7/6) L^(11/6) with k = 2 pi / wavelength;
    the usual effective-eddy-count closures then give alpha and beta.
    All inputs must be strictly positive.
    """
    cn2, path_length, wavelength = float(cn2), float(path_length), float(wavelength)
    if cn2 <= 0.0 or path_length <= 0.0 or wavelength <= 0.0:
        raise ValueError("gg_params_from_rytov requires positive cn2, length, wavelength")
    wavenumber = 2.0 * math.pi / wavelength
    sigma2 = 1.23 * cn2 * wavenumber ** (7.0 / 6.0) * path_length ** (11.0 / 6.0)
    sigma_12_5 = sigma2 ** (6.0 / 5.0)
    alpha = 1.0 / math.expm1(0.49 * sigma2 / (1.0 + 1.11 * sigma_12_5) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * sigma2 / (1.0 + 0.69 * sigma_12_5) ** (5.0 / 6.0))
    if not alpha > beta:
        raise ValueError(
            f"parameterization returned alpha={alpha} <= beta={beta}; "
            "outside the model's validity"
        )
    return alpha, beta


# =====================================================================
# Single-leg density
# =====================================================================


def gg_pdf(params: GammaGammaParams, power):
    """Gamma-Gamma probability density of one leg, per watt.

    Vectorized over ``power``; densities that underflow double precision
    come back as exact 0.0.
    """
    p = np.asarray(power, dtype=float)
    if np.any(p <= 0.0):
        raise ValueError("gg_pdf requires power > 0")
    al, be, om = params.alpha, params.beta, params.mean_power
    order = al - be
    xarg = 2.0 * np.sqrt(al * be * p / om)
    log_density = (
        _LN2
        + 0.5 * (al + be) * math.log(al * be / om)
        - special.gammaln(al)
        - special.gammaln(be)
        + (0.5 * (al + be) - 1.0) * np.log(p)
        # scaled Bessel keeps the log finite far into the tail
        + np.log(special.kve(order, xarg))
        - xarg
    )
    out = np.where(log_density > -745.0, np.exp(log_density), 0.0)
    return float(out) if np.ndim(power) == 0 else out


# =====================================================================
# Channel construction
# =====================================================================


def _integer_proximity(value: float) -> float:
    return abs(value - round(value))


def _shape_collision(a1, b1, a2, b2) -> bool:
    """True when any shape difference sits too close to an integer.

    The six differences are exactly the gamma arguments of the series
    coefficients and the pairwise gaps of the Meijer kernel parameters;
    the clearance is twice the evaluator's 1e-5 threshold so that the
    halved quarter-kernel parameters stay clear as well.
    """
    diffs = (a1 - b1, a2 - b2, a1 - a2, a1 - b2, b1 - a2, b1 - b2)
    return any(_integer_proximity(d) <= _SHAPE_CLEARANCE for d in diffs)


def build_channel(omega_v, e2, link1, link2) -> NlosChannel:
    """Assemble the cascade constants from leg means and shape pairs.

    ``link1`` and ``link2`` are (alpha, beta) tuples.  Shape sets whose
    differences collide with integers are nudged by multiples of
    (1, 2, 4, 8) * 1e-6 until clear; the result records that a
    perturbation was applied.
    """
    omega_v, e2 = float(omega_v), float(e2)
    if omega_v <= 0.0 or e2 <= 0.0:
        raise ValueError("omega_v and e2 must be positive")
    a1, b1 = (float(v) for v in link1)
    a2, b2 = (float(v) for v in link2)
    for name, (al, be) in (("link1", (a1, b1)), ("link2", (a2, b2))):
        if not (al > be > 0.0):
            raise ValueError(f"{name}: need alpha > beta > 0, got ({al}, {be})")

    perturbed = False
    if _shape_collision(a1, b1, a2, b2):
        base = (a1, b1, a2, b2)
        for step in range(1, 2001):
            bump = step * 1e-6
            a1 = base[0] + 1.0 * bump
            b1 = base[1] + 2.0 * bump
            a2 = base[2] + 4.0 * bump
            b2 = base[3] + 8.0 * bump
            if not _shape_collision(a1, b1, a2, b2) and a1 > b1 and a2 > b2:
                perturbed = True
                break
        else:
            raise AccuracyError("could not perturb shapes clear of pole collisions")

    mu = 0.5 * (a2 + b2)
    a = a1 + b1 - a2 - b2
    h = a1 * b1 * a2 * b2 / (omega_v * e2)
    log_gammas = (
        special.gammaln(a1) + special.gammaln(b1)
        + special.gammaln(a2) + special.gammaln(b2)
    )
    s = math.exp((3.0 - a) * _LN2 + mu * math.log(h) - log_gammas)
    log_s = (3.0 - a) * _LN2 + mu * math.log(h) - log_gammas
    omega_r = math.exp(
        (a - 3.0) * _LN2
        + log_s
        - (mu + 1.0) * math.log(h)
        + special.gammaln(a1 + 1.0) + special.gammaln(b1 + 1.0)
        + special.gammaln(a2 + 1.0) + special.gammaln(b2 + 1.0)
    )
    return NlosChannel(
        link1=GammaGammaParams(a1, b1, omega_v),
        link2_alpha=a2,
        link2_beta=b2,
        e2=e2,
        s=s,
        a=a,
        h=h,
        omega_r=omega_r,
        perturbation_applied=perturbed,
    )


# =====================================================================
# Density route 1: Bessel-kernel quadrature (ground truth)
# =====================================================================


def pdf_quadrature(channel: NlosChannel, power) -> float:
    """Received-power density via the exact product-Bessel integral.

    The kernel integrand t^(a-1) K_nu1(t) K_nu2(4 sqrt(h p)/t) peaks where
    both Bessel arguments are equal, at t* = 2 (h p)^(1/4); the integral
    is split there and each side handled by adaptive quadrature.
    Densities below double-precision range return exact 0.0.
    """
    p = float(power)
    if p <= 0.0:
        raise ValueError("pdf_quadrature requires power > 0")
    nu1 = channel.alpha1 - channel.beta1
    nu2 = channel.link2_alpha - channel.link2_beta
    expo = channel.a - 1.0
    root = 4.0 * math.sqrt(channel.h * p)
    tstar = 2.0 * (channel.h * p) ** 0.25

    def integrand(t):
        return t ** expo * special.kv(nu1, t) * special.kv(nu2, root / t)

    left, err_left = integrate.quad(
        integrand, 0.0, tstar, epsabs=1e-300, epsrel=1e-11, limit=500
    )
    right, err_right = integrate.quad(
        integrand, tstar, np.inf, epsabs=1e-300, epsrel=1e-11, limit=500
    )
    kernel = left + right
    if kernel <= 0.0:
        return 0.0
    err = err_left + err_right
    if err > 1e-8 * kernel:
        raise AccuracyError(
            f"density quadrature achieved only {err / kernel:.2e} relative"
        )
    mu = channel.exponent_mid
    log_value = math.log(channel.s) + (mu - 1.0) * math.log(p) + math.log(kernel)
    if log_value < -745.0:
        return 0.0
    return math.exp(log_value)


# =====================================================================
# Series kernel shared by density and error-rate expansions
# =====================================================================


def family_term_logs(channel: NlosChannel, fam: SeriesFamily, count: int):
    """Signs and log-magnitudes of the family's raw terms t_k, k = 0..count.

    t_k multiplies p^(k + w - 1) in the received-power series; weights for
    other integral transforms attach multiplicatively on top.
    """
    k = np.arange(count + 1, dtype=float)
    const_args = (-fam.x, -fam.y, -fam.z, 1.0 + fam.x, 1.0 + fam.y, 1.0 + fam.z)
    const_log = float(sum(special.gammaln(arg) for arg in const_args))
    const_sign = float(np.prod([special.gammasgn(arg) for arg in const_args]))
    logs = (
        math.log(channel.s)
        + (channel.a - 3.0) * _LN2
        + (fam.exponent - channel.exponent_mid + k) * math.log(channel.h)
        + const_log
        - special.gammaln(k + 1.0)
        - special.gammaln(1.0 + fam.x + k)
        - special.gammaln(1.0 + fam.y + k)
        - special.gammaln(1.0 + fam.z + k)
    )
    signs = (
        const_sign
        * special.gammasgn(1.0 + fam.x + k)
        * special.gammasgn(1.0 + fam.y + k)
        * special.gammasgn(1.0 + fam.z + k)
    )
    return signs, logs


def _family_term_mp(channel: NlosChannel, fam: SeriesFamily, k: int, mp):
    """Arbitrary-precision twin of one raw series term (call under workdps).

    The shape differences and the h exponent are rebuilt exactly in mp
    from the stored shapes: the four family sums cancel by many orders
    of magnitude, so per-family float64 rounding of these derived
    quantities would poison the reduced value no matter how high the
    working precision is pushed.
    """
    w = mp.mpf(fam.exponent)
    t = (
        mp.mpf(channel.s)
        * mp.power(2.0, channel.a - 3.0)
        * mp.power(channel.h, w - mp.mpf(channel.exponent_mid) + k)
        / mp.factorial(k)
    )
    shapes = (channel.link2_alpha, channel.link2_beta, channel.alpha1, channel.beta1)
    for other in shapes:
        if other == fam.exponent:
            continue
        d = w - mp.mpf(other)
        t *= mp.gamma(-d) * mp.gamma(1 + d) * mp.rgamma(1 + d + k)
    return t


def series_reduce(channel: NlosChannel, count: int,
                  weight64: Callable, weight_mp: Callable) -> float:
    """Sum the four weighted families through k = count, escalating precision.

    ``weight64(k_array, w) -> log-magnitude array`` supplies the strictly
    positive per-term weight in log space for the float64 pass;
    ``weight_mp(mp, k, w) -> mpf`` is its arbitrary-precision twin.  A
    float64 result is kept when fewer than ~6 digits cancel; otherwise the
    sum is redone under mpmath with dps sized to the observed cancellation.
    """
    signs_all, logs_all = [], []
    for fam in series_families(channel):
        signs, logs = family_term_logs(channel, fam, count)
        k = np.arange(count + 1, dtype=float)
        logs = logs + weight64(k, fam.exponent)
        signs_all.append(signs)
        logs_all.append(logs)
    value, lost = _sum_signed_logs(np.concatenate(signs_all), np.concatenate(logs_all))
    # all-underflow comes back as (0.0, 0.0) and is a genuine zero; exact
    # float64 cancellation comes back with lost = inf and must escalate
    if math.isfinite(value) and math.isfinite(lost) and lost <= 6.0:
        return value

    from mpmath import mp

    dps = min(max(30, int(20 + 1.2 * lost) if math.isfinite(lost) else 40), 300)
    for _ in range(5):
        with mp.workdps(dps):
            total = mp.mpf(0)
            peak = mp.mpf(0)
            for fam in series_families(channel):
                for k in range(count + 1):
                    term = _family_term_mp(channel, fam, k, mp)
                    term *= weight_mp(mp, k, fam.exponent)
                    total += term
                    peak = max(peak, abs(term))
            if total == 0:
                return 0.0
            lost_mp = float(mp.log10(peak / abs(total)))
            if dps - lost_mp >= 10.0:
                return float(total)
        dps = int(lost_mp) + 25
    raise AccuracyError(
        f"series summation unstable: {lost_mp:.1f} digits cancel at dps={dps}"
    )


# =====================================================================
# Density routes 2 and 3: Meijer closed form and truncated series
# =====================================================================


def pdf_meijer(channel: NlosChannel, i_n) -> float:
    """Normalized-irradiance density via the 4x4 Meijer kernel."""
    i = float(i_n)
    if i <= 0.0:
        raise ValueError("pdf_meijer requires i_n > 0")
    mu = channel.exponent_mid
    spec = MeijerGSpec(
        m=4, n=0, p=0, q=4,
        a_params=(), b_params=channel.kernel_b_params,
        z=channel.h * channel.omega_r * i,
    )
    kernel = meijer_g(spec)
    if kernel <= 0.0:
        return 0.0
    log_value = (
        (channel.a - 3.0) * _LN2
        + math.log(channel.s)
        + mu * math.log(channel.omega_r)
        + (mu - 1.0) * math.log(i)
        + math.log(kernel)
    )
    if log_value < -745.0:
        return 0.0
    return math.exp(log_value)


def pdf_series(channel: NlosChannel, i_n, terms: int) -> float:
    """Normalized-irradiance density from the truncated four-family series."""
    i = float(i_n)
    if i <= 0.0:
        raise ValueError("pdf_series requires i_n > 0")
    count = int(terms)
    if count < 0:
        raise ValueError("terms must be >= 0")
    ln_or = math.log(channel.omega_r)
    ln_i = math.log(i)

    def weight64(k, w):
        return (k + w) * ln_or + (k + w - 1.0) * ln_i

    def weight_mp(mp, k, w):
        kw = k + mp.mpf(w)
        return mp.power(channel.omega_r, kw) * mp.power(i, kw - 1)

    return series_reduce(channel, count, weight64, weight_mp)
