"""Non-line-of-sight link geometry, scattering phase function, power budget.

The transmitter beam and receiver field of view intersect in a common
scattering volume.  Elevation angles and the baseline fix the two leg
lengths by the law of sines; the single-scattering budget then gives the
mean power arriving at the common volume (``omega_v``) and the geometric
gain of the second leg (``e2_gain``).  ``ellipse_configuration`` places
both terminals on a prolate ellipse of given eccentricity, the standard
equal-total-path family used for coplanar geometry sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants

from .errors import NoIntersectionError

__all__ = [
    "Atmosphere",
    "LinkGeometry",
    "derive_common_volume",
    "e2_gain",
    "ellipse_configuration",
    "mean_snr",
    "omega_v",
    "phase_function",
]


@dataclass(frozen=True)
class Atmosphere:
    """Scattering and absorption state of the propagation medium."""

    k_a: float         # absorption coefficient, 1/m
    k_r: float         # molecular (Rayleigh) scattering coefficient, 1/m
    k_m: float         # aerosol (Mie) scattering coefficient, 1/m
    gamma_ray: float   # molecular phase-function anisotropy parameter
    g_asym: float      # aerosol asymmetry factor, |g| < 1
    f_mie: float       # aerosol forward-peak correction weight
    cn2: float = 0.0   # refractive-index structure constant, m^(-2/3)

    def __post_init__(self):
        for name in ("k_a", "k_r", "k_m"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.k_r + self.k_m <= 0.0:
            raise ValueError("total scattering coefficient must be positive")
        if not abs(self.g_asym) < 1.0:
            raise ValueError("asymmetry factor must satisfy |g| < 1")
        if self.cn2 < 0.0:
            raise ValueError("cn2 must be >= 0")

    @property
    def k_s(self) -> float:
        """Total scattering coefficient, 1/m."""
        return self.k_r + self.k_m

    @property
    def k_e(self) -> float:
        """Total extinction coefficient, 1/m."""
        return self.k_a + self.k_s


@dataclass(frozen=True)
class LinkGeometry:
    """Coplanar transmitter/receiver arrangement.

    Angles in radians, lengths in meters, aperture in square meters.
    """

    theta_t: float       # transmitter elevation angle
    beta_t: float        # transmitter full beam divergence
    theta_r: float       # receiver elevation angle
    beta_r: float        # receiver full field-of-view angle
    baseline_r: float    # transmitter-receiver ground separation
    aperture_a_r: float  # receiver aperture area

    def __post_init__(self):
        if not 0.0 < self.theta_t < math.pi:
            raise ValueError(f"theta_t must lie in (0, pi), got {self.theta_t}")
        if not 0.0 < self.theta_r < math.pi:
            raise ValueError(f"theta_r must lie in (0, pi), got {self.theta_r}")
        if not 0.0 < self.beta_t < math.pi:
            raise ValueError(f"beta_t must lie in (0, pi), got {self.beta_t}")
        if not 0.0 < self.beta_r < math.pi:
            raise ValueError(f"beta_r must lie in (0, pi), got {self.beta_r}")
        if self.baseline_r <= 0.0:
            raise ValueError("baseline_r must be positive")
        if self.aperture_a_r <= 0.0:
            raise ValueError("aperture_a_r must be positive")

    @property
    def r1(self) -> float:
        """Transmitter-to-common-volume leg length, m."""
        return derive_common_volume(self)[0]

    @property
    def r2(self) -> float:
        """Common-volume-to-receiver leg length, m."""
        return derive_common_volume(self)[1]

    @property
    def theta_s(self) -> float:
        """Scattering angle between the two legs, rad."""
        return derive_common_volume(self)[2]


def derive_common_volume(geom: LinkGeometry):
    """Leg lengths and scattering angle (r1, r2, theta_s) by the law of sines.

    Raises :class:`NoIntersectionError` when the beam and field-of-view
    axes do not cross above the baseline (theta_t + theta_r >= pi).
    """
    theta_s = geom.theta_t + geom.theta_r
    if theta_s >= math.pi:
        raise NoIntersectionError(
            f"axes do not intersect: theta_t + theta_r = {theta_s:.6f} >= pi"
        )
    sin_s = math.sin(theta_s)
    r1 = geom.baseline_r * math.sin(geom.theta_r) / sin_s
    r2 = geom.baseline_r * math.sin(geom.theta_t) / sin_s
    return r1, r2, theta_s


def phase_function(mu, atm: Atmosphere) -> float:
    """Composite scattering phase function at cosine ``mu`` of the angle.

    Scattering-weighted mix of the anisotropic molecular term and the
    generalized Henyey-Greenstein aerosol term; normalized over the
    sphere.
    """
    mu = float(mu)
    if not -1.0 <= mu <= 1.0:
        raise ValueError(f"cosine argument must lie in [-1, 1], got {mu}")
    gam = atm.gamma_ray
    ray = (
        3.0 * (1.0 + 3.0 * gam + (1.0 - gam) * mu * mu)
        / (16.0 * math.pi * (1.0 + 2.0 * gam))
    )
    g = atm.g_asym
    one_plus = 1.0 + g * g
    mie = (1.0 - g * g) / (4.0 * math.pi) * (
        (one_plus - 2.0 * g * mu) ** -1.5
        + atm.f_mie * (3.0 * mu * mu - 1.0) / (2.0 * one_plus ** 1.5)
    )
    return (atm.k_r * ray + atm.k_m * mie) / atm.k_s


def e2_gain(atm: Atmosphere, r2, aperture) -> float:
    """Deterministic second-leg gain: extinction times solid-angle capture."""
    r2, aperture = float(r2), float(aperture)
    if r2 <= 0.0 or aperture <= 0.0:
        raise ValueError("r2 and aperture must be positive")
    return math.exp(-atm.k_e * r2) * aperture / (r2 * r2)


def omega_v(geom: LinkGeometry, atm: Atmosphere, tx_power) -> float:
    """Mean power scattered out of the common volume toward the receiver.

    Single-scattering budget: transmitted power attenuated over the first
    leg, intercepted by the common volume, and redirected with the phase
    function evaluated at the scattering angle.
    """
    tx_power = float(tx_power)
    if tx_power <= 0.0:
        raise ValueError("tx_power must be positive")
    r1, r2, theta_s = derive_common_volume(geom)
    solid_angle_t = 2.0 * math.pi * (1.0 - math.cos(0.5 * geom.beta_t))
    volume = (
        math.pi * (r1 * math.tan(0.5 * geom.beta_t)) ** 2
        * 2.0 * r2 * math.tan(0.5 * geom.beta_r) / math.sin(theta_s)
    )
    phase = phase_function(math.cos(theta_s), atm)
    return (
        tx_power * math.exp(-atm.k_e * r1) * atm.k_s * phase * volume
        / (solid_angle_t * r1 * r1)
    )


def ellipse_configuration(eccentricity, baseline, theta_r, *,
                          beam_t=8e-3, beam_r=math.radians(20.0),
                          aperture=1.77e-4) -> LinkGeometry:
    """Geometry with both terminals at the foci of an ellipse of the given
    eccentricity, receiver elevation fixed and transmitter elevation solved.

    The common volume sits on the ellipse, so the total path r1 + r2 is
    baseline / eccentricity.  The transmitter elevation satisfies
    e (sin theta_t + sin theta_r) = sin(theta_t + theta_r), solved by
    bisection to 1e-12 rad.  Beam, field of view, and aperture keep the
    narrow-beam wide-fov defaults unless overridden.
    """
    e, r, th_r = float(eccentricity), float(baseline), float(theta_r)
    if not 0.0 < e < 1.0:
        raise ValueError(f"eccentricity must lie in (0, 1), got {e}")
    if r <= 0.0:
        raise ValueError("baseline must be positive")
    if not 0.0 < th_r < math.pi:
        raise ValueError(f"theta_r must lie in (0, pi), got {th_r}")

    def mismatch(th_t):
        return e * (math.sin(th_t) + math.sin(th_r)) - math.sin(th_t + th_r)

    lo, hi = 1e-15, math.pi - th_r - 1e-15
    if not (mismatch(lo) < 0.0 < mismatch(hi)):
        raise NoIntersectionError(
            f"no elevation solves the ellipse constraint for e={e}, theta_r={th_r}"
        )
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if mismatch(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return LinkGeometry(
        theta_t=0.5 * (lo + hi),
        beta_t=beam_t,
        theta_r=th_r,
        beta_r=beam_r,
        baseline_r=r,
        aperture_a_r=aperture,
    )


def mean_snr(received_power, filter_eta, detector_eta, wavelength, bit_rate) -> float:
    """Mean electrical SNR of the photon-counting front end.

    Detected photon rate over the bit rate: eta_f eta_r lambda P / (h c B).
    """
    vals = (received_power, filter_eta, detector_eta, wavelength, bit_rate)
    if any(float(v) <= 0.0 for v in vals):
        raise ValueError("all mean_snr arguments must be positive")
    return (
        float(filter_eta) * float(detector_eta) * float(wavelength)
        * float(received_power) / (constants.h * constants.c * float(bit_rate))
    )
