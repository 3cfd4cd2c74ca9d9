"""Average error rates of subcarrier intensity modulation on the cascade.

Every scheme's average error rate is the conditional error probability at
instantaneous electrical SNR ``mean_snr * i**2`` integrated against the
normalized-irradiance density.  Three routes are provided and expected to
agree: closed Meijer G forms, the truncated four-family power series with
computable truncation bounds, and direct quadrature against the
ground-truth density.  High-SNR asymptotes and SNR-penalty solvers build
on the series leading terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .channel import NlosChannel, family_term_logs, pdf_quadrature, series_families, series_reduce
from .errors import AccuracyError
from .specfun import MeijerGSpec, beta_fn, g_quarter, meijer_g
from .specfun import _sum_signed_logs

__all__ = [
    "BPSK",
    "DPSK",
    "ErrorRateResult",
    "ModulationScheme",
    "NCFSK",
    "QPSK",
    "SnrPenalty",
    "TruncationBounds",
    "asymptotic_error",
    "ber_bpsk",
    "ber_dpsk_ncfsk",
    "conditional_error",
    "error_rate_quadrature",
    "ser_qpsk_meijer",
    "ser_qpsk_series",
    "snr_penalty",
    "truncation_bounds",
]

_KINDS = ("BPSK", "QPSK", "DPSK", "NCFSK")


@dataclass(frozen=True)
class ModulationScheme:
    """Subcarrier modulation identifier.

    ``j`` is the exponential-decay divisor of the noncoherent schemes
    (1 for differential PSK, 2 for noncoherent FSK); phase-coherent
    schemes leave it None.
    """

    kind: str
    j: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind in ("BPSK", "QPSK"):
            if self.j is not None:
                raise ValueError(f"{self.kind} does not take a decay divisor")
        else:
            expected = 1 if self.kind == "DPSK" else 2
            if self.j != expected:
                raise ValueError(f"{self.kind} requires j={expected}, got {self.j}")

    @classmethod
    def from_name(cls, name: str) -> "ModulationScheme":
        kind = name.strip().upper()
        if kind == "DPSK":
            return cls("DPSK", 1)
        if kind == "NCFSK":
            return cls("NCFSK", 2)
        return cls(kind)


BPSK = ModulationScheme("BPSK")
QPSK = ModulationScheme("QPSK")
DPSK = ModulationScheme("DPSK", 1)
NCFSK = ModulationScheme("NCFSK", 2)


@dataclass(frozen=True)
class ErrorRateResult:
    """Error probability with provenance and, when available, error bars."""

    probability: float
    method: str
    terms_used: Optional[int] = None
    truncation_upper: Optional[float] = None
    truncation_lower: Optional[float] = None
    perturbation_applied: bool = False
    stderr: Optional[float] = None
    out_of_range: bool = False

    def __post_init__(self):
        if not math.isfinite(self.probability):
            raise AccuracyError(f"non-finite error probability from {self.method}")
        # asymptotes may legitimately leave [0, 1]; they carry a flag instead
        if self.method != "asymptotic" and not -1e-9 < self.probability < 1.0 + 1e-9:
            raise AccuracyError(
                f"{self.method} produced probability {self.probability} outside [0, 1]"
            )


@dataclass(frozen=True)
class TruncationBounds:
    """Tail bounds of the phase-coherent series truncated after ``terms``.

    ``upper`` bounds the half-range expansion tail in absolute value;
    ``lower`` is the signed quarter-range companion.  ``combined`` bounds
    the four-phase symbol error built from both expansions.
    """

    upper: float
    lower: float

    @property
    def combined(self) -> float:
        return 2.0 * self.upper - self.lower


@dataclass(frozen=True)
class SnrPenalty:
    """Mean-SNR gap between two schemes at a target error rate, in dB.

    ``closed_form_db`` is None for pairs without a closed high-SNR
    expression.
    """

    bisection_db: float
    closed_form_db: Optional[float]


# =====================================================================
# Conditional error probabilities
# =====================================================================


def conditional_error(scheme: ModulationScheme, inst_snr):
    """Error probability conditioned on instantaneous electrical SNR.

    Vectorized over ``inst_snr``; values must be >= 0.
    """
    snr = np.asarray(inst_snr, dtype=float)
    if np.any(snr < 0.0):
        raise ValueError("instantaneous SNR must be >= 0")
    if scheme.kind == "BPSK":
        out = 0.5 * special.erfc(np.sqrt(snr))
    elif scheme.kind == "QPSK":
        half = special.erfc(np.sqrt(snr))
        out = half - 0.25 * half * half
    elif scheme.kind == "DPSK":
        out = 0.5 * np.exp(-snr)
    else:  # NCFSK
        out = 0.5 * np.exp(-0.5 * snr)
    return float(out) if np.ndim(inst_snr) == 0 else out


# =====================================================================
# Route 1: direct quadrature against the ground-truth density
# =====================================================================


def error_rate_quadrature(channel: NlosChannel, mean_snr,
                          scheme: ModulationScheme) -> ErrorRateResult:
    """Average error rate by integrating the conditional error against the
    quadrature density.

    The integration axis is split where the conditional error rolls off
    (around 1/sqrt(mean_snr)) and where the density carries its mass
    (around 1) so the adaptive rule sees each feature in isolation.
    """
    snr = float(mean_snr)
    if snr <= 0.0:
        raise ValueError("mean_snr must be positive")

    def integrand(i):
        density = channel.omega_r * pdf_quadrature(channel, channel.omega_r * i)
        return conditional_error(scheme, snr * i * i) * density

    roll = 1.0 / math.sqrt(snr)
    breaks = sorted({0.3 * roll, roll, 3.0 * roll, 8.0 * roll, 0.3, 1.0, 3.0})
    edges = [0.0] + breaks
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        part, part_err = integrate.quad(
            integrand, lo, hi, epsabs=1e-300, epsrel=1e-10, limit=200
        )
        total += part
        err += part_err
    tail, tail_err = integrate.quad(
        integrand, edges[-1], np.inf, epsabs=1e-300, epsrel=1e-10, limit=200
    )
    total += tail
    err += tail_err
    if total <= 0.0:
        return ErrorRateResult(0.0, "quadrature",
                               perturbation_applied=channel.perturbation_applied)
    if err > 1e-8 * total:
        raise AccuracyError(
            f"error-rate quadrature achieved only {err / total:.2e} relative"
        )
    return ErrorRateResult(total, "quadrature",
                           perturbation_applied=channel.perturbation_applied)


# =====================================================================
# Route 2: Meijer G closed forms
# =====================================================================


def _quarter_b_params(channel: NlosChannel) -> tuple:
    """Lower parameters of the halved-argument error-rate kernel."""
    out = []
    for b in channel.kernel_b_params:
        out.append(0.5 * b)
        out.append(0.5 * b + 0.5)
    return tuple(out)


def _log_a_psk(channel: NlosChannel, snr: float) -> float:
    mu = channel.exponent_mid
    return (
        (2.0 * channel.a - 7.0) * math.log(2.0)
        + math.log(channel.s)
        + mu * math.log(channel.omega_r)
        - 3.0 * math.log(math.pi)
        - 0.5 * mu * math.log(snr)
    )


def _psk_half_range(channel: NlosChannel, snr: float) -> float:
    """Closed form of the half-range phase-coherent error integral."""
    mu = channel.exponent_mid
    z = (channel.h * channel.omega_r) ** 2 / (256.0 * snr)
    spec = MeijerGSpec(
        m=8, n=2, p=2, q=9,
        a_params=(1.0 - 0.5 * mu, 0.5 - 0.5 * mu),
        b_params=_quarter_b_params(channel) + (-0.5 * mu,),
        z=z,
    )
    kernel = meijer_g(spec)
    return math.exp(_log_a_psk(channel, snr)) * 0.5 * math.sqrt(math.pi) * kernel


def _psk_theta_integral(channel: NlosChannel, snr: float, upper: float) -> float:
    """Phase-coherent error integral over [0, upper] by Gauss-Legendre,
    node count doubled until two estimates agree to 1e-8 relative."""
    mu = channel.exponent_mid
    scale = (channel.h * channel.omega_r) ** 2 / (256.0 * snr)
    b_params = _quarter_b_params(channel)
    amp = math.exp(_log_a_psk(channel, snr))

    previous = None
    nodes = 64
    while nodes <= 1024:
        x, weights = np.polynomial.legendre.leggauss(nodes)
        theta = 0.5 * upper * (x + 1.0)
        acc = 0.0
        for th, wt in zip(theta, weights):
            sin_th = math.sin(th)
            spec = MeijerGSpec(
                m=8, n=1, p=1, q=8,
                a_params=(1.0 - 0.5 * mu,),
                b_params=b_params,
                z=scale * sin_th * sin_th,
            )
            acc += wt * sin_th ** mu * meijer_g(spec)
        estimate = amp * 0.5 * upper * acc
        if previous is not None and abs(estimate - previous) <= 1e-8 * max(abs(estimate), 1e-300):
            return estimate
        previous = estimate
        nodes *= 2
    raise AccuracyError("phase-coherent angle integral failed to settle by 1024 nodes")


def ser_qpsk_meijer(channel: NlosChannel, mean_snr) -> ErrorRateResult:
    """Four-phase symbol error rate from the closed Meijer G forms."""
    snr = float(mean_snr)
    if snr <= 0.0:
        raise ValueError("mean_snr must be positive")
    half = _psk_half_range(channel, snr)
    quarter = _psk_theta_integral(channel, snr, 0.25 * math.pi)
    return ErrorRateResult(2.0 * half - quarter, "meijer",
                           perturbation_applied=channel.perturbation_applied)


def ber_bpsk(channel: NlosChannel, mean_snr, route: str = "meijer",
             terms: int = 30) -> ErrorRateResult:
    """Binary phase-coherent bit error rate, closed form or series."""
    snr = float(mean_snr)
    if snr <= 0.0:
        raise ValueError("mean_snr must be positive")
    if route == "meijer":
        return ErrorRateResult(_psk_half_range(channel, snr), "meijer",
                               perturbation_applied=channel.perturbation_applied)
    if route == "series":
        value = _psk_series_sum(channel, snr, terms, upper_angle="half")
        bounds = truncation_bounds(channel, snr, terms)
        return ErrorRateResult(
            value, "series", terms_used=terms,
            truncation_upper=bounds.upper,
            perturbation_applied=channel.perturbation_applied,
        )
    raise ValueError(f"unknown route {route!r}; expected 'meijer' or 'series'")


def ber_dpsk_ncfsk(channel: NlosChannel, mean_snr, j: int,
                   route: str = "meijer", terms: int = 30) -> ErrorRateResult:
    """Noncoherent bit error rate (j=1 differential PSK, j=2 FSK)."""
    snr = float(mean_snr)
    if snr <= 0.0:
        raise ValueError("mean_snr must be positive")
    if j not in (1, 2):
        raise ValueError(f"decay divisor must be 1 or 2, got {j}")
    if route == "meijer":
        mu = channel.exponent_mid
        z = (channel.h * channel.omega_r) ** 2 * j / (256.0 * snr)
        spec = MeijerGSpec(
            m=8, n=1, p=1, q=8,
            a_params=(1.0 - 0.5 * mu,),
            b_params=_quarter_b_params(channel),
            z=z,
        )
        log_pref = (
            (2.0 * channel.a - 8.0) * math.log(2.0)
            + math.log(channel.s)
            + mu * math.log(channel.omega_r)
            - 2.0 * math.log(math.pi)
            - 0.5 * mu * math.log(snr / j)
        )
        value = math.exp(log_pref) * meijer_g(spec)
        return ErrorRateResult(value, "meijer",
                               perturbation_applied=channel.perturbation_applied)
    if route == "series":
        ln_scale = math.log(channel.omega_r) - 0.5 * math.log(snr / j)

        def weight64(k, w):
            return (
                special.gammaln(0.5 * (k + w))
                - math.log(4.0)
                + (k + w) * ln_scale
            )

        def weight_mp(mp, k, w):
            kw = k + mp.mpf(w)
            return (
                mp.gamma(kw / 2) / 4
                * mp.power(channel.omega_r, kw)
                * mp.power(snr / j, -kw / 2)
            )

        value = series_reduce(channel, int(terms), weight64, weight_mp)
        return ErrorRateResult(value, "series", terms_used=int(terms),
                               perturbation_applied=channel.perturbation_applied)
    raise ValueError(f"unknown route {route!r}; expected 'meijer' or 'series'")


# =====================================================================
# Route 3: truncated series
# =====================================================================


def _psk_series_sum(channel: NlosChannel, snr: float, terms: int,
                    upper_angle: str) -> float:
    """Truncated series of the phase-coherent error integral.

    ``upper_angle`` selects the half-range ('half') or quarter-range
    ('quarter') angular integral; the two differ only in the angular
    moment attached to each term.
    """
    ln_scale = math.log(channel.omega_r) - 0.5 * math.log(snr)
    count = int(terms)
    if count < 0:
        raise ValueError("terms must be >= 0")

    if upper_angle == "half":

        def weight64(k, w):
            logs = [
                special.gammaln(0.5 * (kk + w))
                + math.log(beta_fn(0.5, 0.5 * (kk + w + 1.0)))
                + (kk + w) * ln_scale
                - math.log(4.0 * math.pi)
                for kk in k
            ]
            return np.array(logs)

        def weight_mp(mp, k, w):
            kw = k + mp.mpf(w)
            return (
                mp.gamma(kw / 2)
                * mp.beta(mp.mpf(0.5), (kw + 1) / 2)
                * mp.power(channel.omega_r, kw)
                * mp.power(snr, -kw / 2)
                / (4 * mp.pi)
            )

    elif upper_angle == "quarter":

        def weight64(k, w):
            logs = [
                special.gammaln(0.5 * (kk + w))
                + math.log(g_quarter(kk + w))
                + (kk + w) * ln_scale
                - math.log(2.0 * math.pi)
                for kk in k
            ]
            return np.array(logs)

        def weight_mp(mp, k, w):
            kw = k + mp.mpf(w)
            half = mp.mpf(0.5)
            angular = mp.betainc((kw + 1) / 2, half, 0, half) / 2
            return (
                mp.gamma(kw / 2)
                * angular
                * mp.power(channel.omega_r, kw)
                * mp.power(snr, -kw / 2)
                / (2 * mp.pi)
            )

    else:
        raise ValueError(f"unknown angle selector {upper_angle!r}")

    return series_reduce(channel, count, weight64, weight_mp)


def ser_qpsk_series(channel: NlosChannel, mean_snr, terms: int = 30) -> ErrorRateResult:
    """Four-phase symbol error rate from the truncated series pair."""
    snr = float(mean_snr)
    if snr <= 0.0:
        raise ValueError("mean_snr must be positive")
    half = _psk_series_sum(channel, snr, terms, upper_angle="half")
    quarter = _psk_series_sum(channel, snr, terms, upper_angle="quarter")
    bounds = truncation_bounds(channel, snr, terms)
    return ErrorRateResult(
        2.0 * half - quarter, "series", terms_used=int(terms),
        truncation_upper=bounds.upper, truncation_lower=bounds.lower,
        perturbation_applied=channel.perturbation_applied,
    )


# =====================================================================
# Truncation bounds
# =====================================================================


def truncation_bounds(channel: NlosChannel, mean_snr, terms: int) -> TruncationBounds:
    """Tail bounds for the phase-coherent series truncated after ``terms``.

    Each dropped term factors into exp-series mass zeta^k / k! times a
    slowly varying coefficient; bounding the coefficients by their
    extremum over k > terms and the mass by exp(zeta) gives the pair.
    The coefficient scan stops after 20 consecutive terms below 1e-3 of
    the running extremum.
    """
    snr = float(mean_snr)
    if snr <= 0.0:
        raise ValueError("mean_snr must be positive")
    count = int(terms)
    if count < 0:
        raise ValueError("terms must be >= 0")

    zeta = channel.h * channel.omega_r / math.sqrt(snr)
    ln_or_scaled = math.log(channel.omega_r) - 0.5 * math.log(snr)
    fams = series_families(channel)
    leads = []
    for fam in fams:
        signs, logs = family_term_logs(channel, fam, 0)
        # the scanned coefficient is t_0 times the ratio of shifted gamma
        # products; precompute the constant numerator of that ratio
        num_log = float(sum(
            special.gammaln(1.0 + v) for v in (fam.x, fam.y, fam.z)
        ))
        num_sign = float(np.prod([
            special.gammasgn(1.0 + v) for v in (fam.x, fam.y, fam.z)
        ]))
        leads.append((fam, float(signs[0]) * num_sign, float(logs[0]) + num_log))

    max_abs_v = 0.0
    max_abs_u = 0.0
    min_u = math.inf
    quiet = 0
    k = count + 1
    while quiet < 20:
        if k > count + 4000:
            raise AccuracyError("truncation-bound scan failed to settle")
        v_signs, v_logs, u_signs, u_logs = [], [], [], []
        for fam, sign0, log0 in leads:
            shift = -(
                special.gammaln(1.0 + fam.x + k)
                + special.gammaln(1.0 + fam.y + k)
                + special.gammaln(1.0 + fam.z + k)
            )
            sign = (
                sign0
                * special.gammasgn(1.0 + fam.x + k)
                * special.gammasgn(1.0 + fam.y + k)
                * special.gammasgn(1.0 + fam.z + k)
            )
            base = (
                log0 + shift
                + special.gammaln(0.5 * (k + fam.exponent))
                + fam.exponent * ln_or_scaled
            )
            # deep-tail angular moments may underflow to an exact zero;
            # their contribution is then a genuine nothing, not an error
            gq = g_quarter(k + fam.exponent)
            v_signs.append(sign)
            v_logs.append(base + math.log(beta_fn(0.5, 0.5 * (k + fam.exponent + 1.0))))
            u_signs.append(sign)
            u_logs.append(base + (math.log(gq) if gq > 0.0 else -math.inf))
        v_k, _ = _sum_signed_logs(np.array(v_signs), np.array(v_logs))
        u_k, _ = _sum_signed_logs(np.array(u_signs), np.array(u_logs))
        max_abs_v = max(max_abs_v, abs(v_k))
        max_abs_u = max(max_abs_u, abs(u_k))
        min_u = min(min_u, u_k)
        if abs(v_k) <= 1e-3 * max_abs_v and abs(u_k) <= 1e-3 * max_abs_u:
            quiet += 1
        else:
            quiet = 0
        k += 1

    mass = math.exp(zeta) if zeta < 709.0 else math.inf
    return TruncationBounds(
        upper=mass * max_abs_v / (4.0 * math.pi),
        lower=mass * min_u / (2.0 * math.pi),
    )


# =====================================================================
# Asymptotics and SNR penalties
# =====================================================================


def _scheme_weight_log(scheme: ModulationScheme, w: float, snr: float,
                       channel: NlosChannel):
    """(sign, log) of the leading-order weight attached to exponent w."""
    ln_scale = math.log(channel.omega_r) - 0.5 * math.log(snr)
    ln_gamma_half = special.gammaln(0.5 * w)
    if scheme.kind == "BPSK":
        return 1.0, (ln_gamma_half + math.log(beta_fn(0.5, 0.5 * (w + 1.0)))
                     + w * ln_scale - math.log(4.0 * math.pi))
    if scheme.kind == "QPSK":
        angular = beta_fn(0.5, 0.5 * (w + 1.0)) - g_quarter(w)
        return 1.0, (ln_gamma_half + math.log(angular)
                     + w * ln_scale - math.log(2.0 * math.pi))
    # noncoherent schemes: divisor j rescales the mean SNR
    ln_scale_j = math.log(channel.omega_r) - 0.5 * math.log(snr / scheme.j)
    return 1.0, ln_gamma_half - math.log(4.0) + w * ln_scale_j


def asymptotic_error(channel: NlosChannel, mean_snr, scheme: ModulationScheme,
                     two_term: bool = True) -> ErrorRateResult:
    """High-SNR error-rate asymptote from the small-shape series heads.

    The slowest-decaying families are the two small shapes; ``two_term``
    keeps both, otherwise only the smaller.  Out-of-range values are
    reported raw with the flag set, never clamped.
    """
    snr = float(mean_snr)
    if snr <= 0.0:
        raise ValueError("mean_snr must be positive")
    fams = series_families(channel)
    beta_fams = [fams[1], fams[3]]  # exponents beta2 and beta1
    if not two_term:
        beta_fams = [min(beta_fams, key=lambda f: f.exponent)]
    signs, logs = [], []
    for fam in beta_fams:
        fam_signs, fam_logs = family_term_logs(channel, fam, 0)
        w_sign, w_log = _scheme_weight_log(scheme, fam.exponent, snr, channel)
        signs.append(float(fam_signs[0]) * w_sign)
        logs.append(float(fam_logs[0]) + w_log)
    value, _ = _sum_signed_logs(np.array(signs), np.array(logs))
    flagged = not 0.0 <= value <= 1.0
    return ErrorRateResult(
        value, "asymptotic", terms_used=len(beta_fams),
        perturbation_applied=channel.perturbation_applied,
        out_of_range=flagged,
    )


def _required_snr_db(channel: NlosChannel, scheme: ModulationScheme,
                     target: float) -> float:
    """Mean SNR in dB at which the two-term asymptote meets the target,
    located by a descending scan from 200 dB and bisection to 1e-4 dB."""

    def rate(db: float) -> float:
        return asymptotic_error(channel, 10.0 ** (0.1 * db), scheme).probability

    if rate(200.0) >= target:
        raise ValueError("target error rate not reachable below 200 dB mean SNR")
    hi = 200.0
    lo = None
    db = 199.0
    while db >= 0.0:
        if rate(db) >= target:
            lo = db
            hi = db + 1.0
            break
        db -= 1.0
    if lo is None:
        raise ValueError("target error rate not reachable above 0 dB mean SNR")
    while hi - lo > 1e-4:
        mid = 0.5 * (lo + hi)
        if rate(mid) >= target:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    achieved = rate(root)
    if abs(achieved - target) > 1e-3 * target:
        raise AccuracyError(
            f"penalty bisection landed at {achieved:.6e} for target {target:.6e}"
        )
    return root


def _closed_form_penalty(channel: NlosChannel, scheme_a: ModulationScheme,
                         scheme_b: ModulationScheme) -> Optional[float]:
    """Single-shape high-SNR penalty in dB, when a closed form exists."""
    if scheme_a.kind == scheme_b.kind:
        return 0.0
    small_beta = min(channel.beta1, channel.link2_beta)

    def coherent_vs_noncoherent(j: int) -> float:
        ratio = math.pi * j ** (0.5 * small_beta) / beta_fn(0.5, 0.5 * (small_beta + 1.0))
        return 20.0 / small_beta * math.log10(ratio)

    pair = (scheme_a.kind, scheme_b.kind)
    forward = {
        ("BPSK", "DPSK"): lambda: coherent_vs_noncoherent(1),
        ("BPSK", "NCFSK"): lambda: coherent_vs_noncoherent(2),
        ("DPSK", "NCFSK"): lambda: 10.0 * math.log10(2.0),
    }
    if pair in forward:
        return forward[pair]()
    reverse = (pair[1], pair[0])
    if reverse in forward:
        return -forward[reverse]()
    return None


def snr_penalty(channel: NlosChannel, scheme_a: ModulationScheme,
                scheme_b: ModulationScheme, target_error) -> SnrPenalty:
    """Extra mean SNR scheme_b needs over scheme_a to hit the target rate.

    The bisection route works on the two-term asymptotes of both schemes;
    the closed form (when one exists) keeps only the smaller shape's
    leading term, so the two estimates differ slightly by construction.
    """
    target = float(target_error)
    if not 0.0 < target < 0.5:
        raise ValueError(f"target error rate must lie in (0, 0.5), got {target}")
    needed_b = _required_snr_db(channel, scheme_b, target)
    needed_a = _required_snr_db(channel, scheme_a, target)
    return SnrPenalty(
        bisection_db=needed_b - needed_a,
        closed_form_db=_closed_form_penalty(channel, scheme_a, scheme_b),
    )
