"""Release acceptance gate: eight criteria, one test per criterion.

Each test prints a single ``criterion N: PASS`` line (visible with
``pytest -rA`` or on failure) and pins the tolerance and, where one is
required, the wall-clock budget for that criterion.  The reference
scenario throughout is the strong-turbulence link: wavelength 260 nm,
Cn2 = 1e-13 m^(-2/3), transmitter elevation 30 deg, receiver elevation
80 deg, baseline 1000 m.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from uvscatter.channel import (
    build_channel,
    gg_params_from_rytov,
    pdf_meijer,
    pdf_quadrature,
    pdf_series,
)
from uvscatter.geometry import (
    Atmosphere,
    LinkGeometry,
    derive_common_volume,
    e2_gain,
    ellipse_configuration,
    mean_snr,
    omega_v,
)
from uvscatter.mcsim import SimConfig, empirical_error_rate
from uvscatter.modem import (
    BPSK,
    DPSK,
    NCFSK,
    QPSK,
    asymptotic_error,
    ber_bpsk,
    ber_dpsk_ncfsk,
    conditional_error,
    error_rate_quadrature,
    ser_qpsk_meijer,
    ser_qpsk_series,
    snr_penalty,
    truncation_bounds,
)

WAVELENGTH = 260e-9
CN2 = 1e-13
ROUTE_GRID_DB = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0)
SCHEMES = (BPSK, QPSK, DPSK, NCFSK)
ATMOSPHERE = Atmosphere(k_a=0.802e-3, k_r=0.266e-3, k_m=0.284e-3,
                        gamma_ray=0.017, g_asym=0.72, f_mie=0.5)


def reference_geometry() -> LinkGeometry:
    return LinkGeometry(
        theta_t=math.radians(30.0), beta_t=8e-3,
        theta_r=math.radians(80.0), beta_r=math.radians(20.0),
        baseline_r=1000.0, aperture_a_r=1.77e-4,
    )


@pytest.fixture(scope="module")
def reference_channel():
    geometry = reference_geometry()
    r1, r2, _ = derive_common_volume(geometry)
    return build_channel(
        1.0, 1.0,
        gg_params_from_rytov(CN2, r1, WAVELENGTH),
        gg_params_from_rytov(CN2, r2, WAVELENGTH),
    )


def _route_rate(channel, snr, scheme, route, terms=30):
    if route == "quadrature":
        return error_rate_quadrature(channel, snr, scheme).probability
    if scheme.kind == "BPSK":
        return ber_bpsk(channel, snr, route=route, terms=terms).probability
    if scheme.kind == "QPSK":
        if route == "meijer":
            return ser_qpsk_meijer(channel, snr).probability
        return ser_qpsk_series(channel, snr, terms=terms).probability
    return ber_dpsk_ncfsk(channel, snr, scheme.j, route=route,
                          terms=terms).probability


def _ellipse_channel(eccentricity, baseline, theta_r):
    geometry = ellipse_configuration(eccentricity, baseline, theta_r)
    r1, r2, _ = derive_common_volume(geometry)
    channel = build_channel(
        1.0, 1.0,
        gg_params_from_rytov(CN2, r1, WAVELENGTH),
        gg_params_from_rytov(CN2, r2, WAVELENGTH),
    )
    return geometry, channel


def test_criterion_1_turbulence_parameterization_regression():
    start = time.perf_counter()
    geometry = reference_geometry()
    r1, r2, _ = derive_common_volume(geometry)
    alpha1, beta1 = gg_params_from_rytov(CN2, r1, WAVELENGTH)
    alpha2, beta2 = gg_params_from_rytov(CN2, r2, WAVELENGTH)
    elapsed = time.perf_counter() - start

    assert alpha1 == pytest.approx(6.99, rel=0.02)
    assert beta1 == pytest.approx(1.05, rel=0.02)
    assert alpha2 == pytest.approx(4.59, rel=0.02)
    assert beta2 == pytest.approx(1.23, rel=0.02)
    assert elapsed < 1.0
    print(f"criterion 1: PASS - shapes ({alpha1:.3f}, {beta1:.3f}), "
          f"({alpha2:.3f}, {beta2:.3f}) within 2% in {elapsed:.2f} s")


def test_criterion_2_density_three_way_equivalence(reference_channel):
    start = time.perf_counter()
    channel = reference_channel

    def rescaled_quadrature(i):
        return channel.omega_r * pdf_quadrature(channel, channel.omega_r * i)

    worst_series = worst_quadrature = 0.0
    for i in np.geomspace(1e-3, 10.0, 20):
        meijer = pdf_meijer(channel, float(i))
        series = pdf_series(channel, float(i), 60)
        quadrature = rescaled_quadrature(float(i))
        worst_series = max(worst_series, abs(meijer - series) / meijer)
        worst_quadrature = max(worst_quadrature,
                               abs(meijer - quadrature) / meijer)
    assert worst_series < 1e-6
    assert worst_quadrature < 1e-6

    # the two full-range routes must carry unit mass and unit mean; a
    # fixed 60-term truncation is only pointwise-accurate on the grid
    # above, so it is excluded from the global moment checks
    def moment(pdf, weight):
        body = integrate.quad(lambda i: weight(i) * pdf(i), 0.0, 20.0,
                              points=[0.1, 1.0, 5.0], limit=400)[0]
        tail = integrate.quad(lambda i: weight(i) * pdf(i), 20.0, np.inf,
                              limit=200)[0]
        return body + tail

    moments = []
    for pdf in (lambda i: pdf_meijer(channel, i), rescaled_quadrature):
        moments.append(moment(pdf, lambda i: 1.0))
        moments.append(moment(pdf, lambda i: i))
    for value in moments:
        assert value == pytest.approx(1.0, abs=1e-6)

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(f"criterion 2: PASS - worst series gap {worst_series:.2e}, "
          f"worst quadrature gap {worst_quadrature:.2e}, moments "
          f"{[f'{m:.9f}' for m in moments]} in {elapsed:.1f} s")


def test_criterion_3_error_rate_route_equivalence(reference_channel):
    start = time.perf_counter()
    channel = reference_channel
    worst_meijer = worst_series = 0.0
    for snr_db in ROUTE_GRID_DB:
        snr = 10.0 ** (0.1 * snr_db)
        for scheme in SCHEMES:
            reference = _route_rate(channel, snr, scheme, "quadrature")
            meijer = _route_rate(channel, snr, scheme, "meijer")
            series = _route_rate(channel, snr, scheme, "series", terms=30)
            worst_meijer = max(worst_meijer,
                               abs(meijer - reference) / reference)
            worst_series = max(worst_series,
                               abs(series - reference) / reference)
    assert worst_meijer < 1e-4
    assert worst_series < 1e-3
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    print(f"criterion 3: PASS - meijer vs quadrature {worst_meijer:.2e}, "
          f"series(30) vs quadrature {worst_series:.2e} in {elapsed:.1f} s")


def test_criterion_4_monte_carlo_concordance(reference_channel):
    start = time.perf_counter()
    channel = reference_channel
    sim = SimConfig(sample_count=1_000_000, rng_seed=12345,
                    stream_count=4, histogram_bins=50)
    worst_z = 0.0
    for snr_db in (10.0, 20.0, 30.0):
        snr = 10.0 ** (0.1 * snr_db)
        for scheme in SCHEMES:
            empirical = empirical_error_rate(channel, snr, scheme, sim)
            reference = error_rate_quadrature(channel, snr,
                                              scheme).probability
            gap = abs(empirical.probability - reference)
            assert gap <= 3.0 * empirical.stderr
            worst_z = max(worst_z, gap / empirical.stderr)
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    print(f"criterion 4: PASS - worst deviation {worst_z:.2f} standard "
          f"errors over 12 cells in {elapsed:.1f} s")


def test_criterion_5_snr_penalties():
    strong = build_channel(1.0, 1.0, (6.99, 1.05), (4.59, 1.23))
    coherent_pair = snr_penalty(strong, BPSK, DPSK, 1e-3)
    noncoherent_pair = snr_penalty(strong, DPSK, NCFSK, 1e-3)
    assert coherent_pair.bisection_db == pytest.approx(3.98, abs=0.1)
    assert noncoherent_pair.bisection_db == pytest.approx(3.01, abs=0.05)
    assert noncoherent_pair.closed_form_db == pytest.approx(
        10.0 * math.log10(2.0), rel=1e-12)

    moderate = build_channel(1.0, 1.0, (6.99, 1.82), (4.59, 1.95))
    moderate_closed = snr_penalty(moderate, BPSK, DPSK, 1e-3).closed_form_db
    assert moderate_closed == pytest.approx(3.19, abs=0.1)
    print(f"criterion 5: PASS - bisection {coherent_pair.bisection_db:.4f} / "
          f"{noncoherent_pair.bisection_db:.4f} dB, closed forms "
          f"{noncoherent_pair.closed_form_db:.4f} / {moderate_closed:.4f} dB")


def test_criterion_6_asymptotic_convergence(reference_channel):
    channel = reference_channel
    worst_ratio_gap = 0.0
    for scheme in SCHEMES:
        snr_db, reference = 90.0, 1.0
        while snr_db <= 150.0:
            reference = _route_rate(channel, 10.0 ** (0.1 * snr_db),
                                    scheme, "quadrature")
            if reference <= 1e-5:
                break
            snr_db += 10.0
        assert reference <= 1e-5
        asymptote = asymptotic_error(channel, 10.0 ** (0.1 * snr_db),
                                     scheme, two_term=True)
        assert not asymptote.out_of_range
        ratio = asymptote.probability / reference
        assert abs(ratio - 1.0) < 0.10
        worst_ratio_gap = max(worst_ratio_gap, abs(ratio - 1.0))

    lo, hi = 10.0 ** 16.0, 10.0 ** 18.0
    slope = (
        math.log(_route_rate(channel, hi, BPSK, "quadrature"))
        - math.log(_route_rate(channel, lo, BPSK, "quadrature"))
    ) / (math.log(hi) - math.log(lo))
    target = -0.5 * min(channel.beta1, channel.link2_beta)
    assert slope == pytest.approx(target, rel=0.01)
    print(f"criterion 6: PASS - worst asymptote ratio gap "
          f"{worst_ratio_gap:.2e}, slope {slope:.4f} vs {target:.4f}")


def test_criterion_7_truncation_bound_soundness(reference_channel):
    channel = reference_channel
    checked = 0
    for snr_db in ROUTE_GRID_DB:
        snr = 10.0 ** (0.1 * snr_db)
        reference_qpsk = ser_qpsk_series(channel, snr, terms=200).probability
        reference_bpsk = ber_bpsk(channel, snr, route="series",
                                  terms=200).probability
        for terms in (10, 30):
            bounds = truncation_bounds(channel, snr, terms)
            gap_qpsk = abs(ser_qpsk_series(channel, snr,
                                           terms=terms).probability
                           - reference_qpsk)
            gap_bpsk = abs(ber_bpsk(channel, snr, route="series",
                                    terms=terms).probability
                           - reference_bpsk)
            assert gap_qpsk <= bounds.combined
            assert gap_bpsk <= bounds.upper
            assert gap_bpsk <= bounds.combined
            checked += 1
    print(f"criterion 7: PASS - truncation gap within the combined bound "
          f"at {checked} grid points")


def test_criterion_8_geometry_trends():
    snr = 1000.0
    max_grid = (20.0, 25.0, 30.0, 35.0, 40.0)
    rates = [
        ber_bpsk(_ellipse_channel(math.sqrt(3.0) / 2.0, 1000.0,
                                  math.radians(deg))[1],
                 snr, route="meijer").probability
        for deg in max_grid
    ]
    assert max_grid[int(np.argmax(rates))] == 30.0

    min_grid = (35.0, 40.0, 45.0, 50.0, 55.0)
    rates = [
        ber_bpsk(_ellipse_channel(math.sqrt(2.0) / 2.0, 200.0,
                                  math.radians(deg))[1],
                 snr, route="meijer").probability
        for deg in min_grid
    ]
    assert min_grid[int(np.argmin(rates))] == 45.0

    # link-budget sweep over the small ellipse: fading can only hurt
    compared = 0
    for deg in (20.0, 35.0, 50.0, 65.0, 80.0, 95.0):
        geometry = ellipse_configuration(math.sqrt(2.0) / 2.0, 200.0,
                                         math.radians(deg))
        r1, r2, _ = derive_common_volume(geometry)
        power_v = omega_v(geometry, ATMOSPHERE, 1.0)
        gain = e2_gain(ATMOSPHERE, r2, geometry.aperture_a_r)
        budget_snr = mean_snr(power_v * gain, 0.1, 0.2, WAVELENGTH, 5000.0)
        channel = build_channel(
            power_v, gain,
            gg_params_from_rytov(CN2, r1, WAVELENGTH),
            gg_params_from_rytov(CN2, r2, WAVELENGTH),
        )
        for scheme in (BPSK, DPSK, NCFSK):
            calm = float(conditional_error(scheme, budget_snr))
            turbulent = _route_rate(channel, budget_snr, scheme, "meijer")
            assert turbulent >= calm
            compared += 1
    print(f"criterion 8: PASS - extrema at the equal-path angles and "
          f"turbulent >= calm at {compared} budget points")
