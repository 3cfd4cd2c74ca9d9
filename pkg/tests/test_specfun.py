"""Special-function kernel tests.

The oracles live in this file and are independent of the package internals:
a Stirling-series log-gamma (asymptotic expansion plus upward recurrence),
adaptive quadrature of the cosh integral representation of K_nu, and known
elementary reductions of the Meijer G-function.  The Meijer evaluator itself
is cross-validated residue-route against contour-route.
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from uvscatter.errors import AccuracyError
from uvscatter.specfun import (
    ContourConfig,
    MeijerGSpec,
    bessel_k,
    beta_fn,
    g_quarter,
    ln_gamma,
    meijer_g,
)

# =====================================================================
# Oracles (written first, frozen)
# =====================================================================

# B_2, B_4, ..., B_20
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)


def stirling_ln_gamma(z):
    """Log-gamma by the Stirling asymptotic series.

    Arguments with |z| < 32 are shifted up by the recurrence
    ln G(z) = ln G(z+1) - ln z before the series is applied, which keeps
    the 10-term truncation error far below 1e-25.  Shares no code with the
    Lanczos path under test.
    """
    z = complex(z)
    shift = 0.0 + 0.0j
    while abs(z) < 32.0:
        shift -= cmath.log(z)
        z += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = 0.0 + 0.0j
    term = inv
    for n, b2n in enumerate(_BERNOULLI, start=1):
        series += b2n / (2 * n * (2 * n - 1)) * term
        term *= inv2
    return (z - 0.5) * cmath.log(z) - z + 0.5 * math.log(2.0 * math.pi) + series + shift


def bessel_k_quadrature(order, x):
    """K_nu(x) via its integral representation, independent of scipy.special.kv.

    K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.  The integrand decays
    like exp(-x e^t / 2), so an upper limit solving x cosh T ~ 750 is beyond
    double-precision underflow.
    """
    order = abs(order)

    def integrand(t):
        return math.exp(-x * math.cosh(t)) * math.cosh(order * t)

    upper = math.acosh(760.0 / x) if x < 750.0 else 1.0
    val, err = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=400)
    assert err < 1e-11 * abs(val), "oracle quadrature did not converge"
    return val


# =====================================================================
# ln_gamma
# =====================================================================


class TestLnGamma:
    def test_gamma_half(self):
        """Gamma(1/2) = sqrt(pi)."""
        expected = math.log(math.sqrt(math.pi))
        got = ln_gamma(0.5)
        assert abs(got - expected) < 1e-13, f"ln_gamma(0.5) = {got}, want {expected}"

    def test_factorial(self):
        """Gamma(5) = 4! = 24."""
        got = ln_gamma(5.0)
        assert abs(got - math.log(24.0)) < 1e-13

    def test_complex_point_against_stirling(self):
        """Lanczos and Stirling implementations agree at 1+1j to 1e-10."""
        got = complex(ln_gamma(1.0 + 1.0j))
        want = stirling_ln_gamma(1.0 + 1.0j)
        assert abs(got - want) < 1e-10, f"disagreement {abs(got - want):.3e}"

    def test_real_axis_relative_error(self):
        """exp(ln_gamma(x)) matches Gamma(x) to 1e-12 relative on [0.1, 50]."""
        xs = np.linspace(0.1, 50.0, 313)
        for x in xs:
            want = stirling_ln_gamma(x).real
            got = float(ln_gamma(float(x)))
            # relative error of Gamma equals absolute error of log-gamma
            assert abs(got - want) < 1e-12, f"x={x}: |dlog| = {abs(got - want):.3e}"

    def test_complex_grid_against_stirling(self):
        """Agreement to 1e-10 across the region the contour integrator visits."""
        for re in (0.3, 0.7, 1.9, 5.2, 11.0):
            for im in (-40.0, -3.1, 0.4, 7.7, 25.0):
                z = complex(re, im)
                got = complex(ln_gamma(z))
                want = stirling_ln_gamma(z)
                assert abs(got - want) < 1e-10, f"z={z}: {abs(got - want):.3e}"

    def test_vectorized_matches_scalar(self):
        z = np.array([0.5 + 0.0j, 2.0 + 3.0j, 8.0 - 1.0j])
        out = ln_gamma(z)
        assert out.shape == z.shape
        for zi, oi in zip(z, out):
            assert abs(complex(ln_gamma(complex(zi))) - oi) == 0.0

    def test_pole_rejection(self):
        for bad in (0.0, -1.0, -7.0):
            with pytest.raises(ValueError, match="pole"):
                ln_gamma(bad)

    def test_negative_noninteger_real(self):
        """Reflection branch: |Gamma(-2.5)| from the principal-branch value."""
        got = complex(ln_gamma(-2.5))
        # Gamma(-2.5) = -8 sqrt(pi) / 15
        assert abs(math.exp(got.real) - 8.0 * math.sqrt(math.pi) / 15.0) < 1e-12

    @given(
        re=st.floats(min_value=0.25, max_value=20.0),
        im=st.floats(min_value=-20.0, max_value=20.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_recurrence_property(self, re, im):
        """Gamma(z+1) = z Gamma(z), compared through exponentials."""
        z = complex(re, im)
        lhs = complex(ln_gamma(z + 1.0))
        rhs = complex(ln_gamma(z)) + cmath.log(z)
        assert cmath.isclose(cmath.exp(lhs), cmath.exp(rhs), rel_tol=1e-11)


# =====================================================================
# bessel_k
# =====================================================================


class TestBesselK:
    def test_half_order_closed_form(self):
        """K_{1/2}(x) = sqrt(pi/(2x)) exp(-x)."""
        for x in (0.05, 1.0, 7.5):
            want = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
            got = bessel_k(0.5, x)
            assert abs(got - want) < 1e-12 * want

    def test_order_symmetry_exact(self):
        assert bessel_k(-0.5, 1.0) == bessel_k(0.5, 1.0)
        assert bessel_k(-3.3, 2.0) == bessel_k(3.3, 2.0)

    def test_quadrature_oracle_point(self):
        """K_1(1) against the cosh-integral oracle (about 0.6019072)."""
        want = bessel_k_quadrature(1.0, 1.0)
        got = bessel_k(1.0, 1.0)
        assert abs(got - 0.6019072301972346) < 1e-9
        assert abs(got - want) < 1e-10 * want

    def test_quadrature_oracle_grid(self):
        for order in (0.0, 0.3, 2.7, 5.5, 9.94):
            for x in (1e-2, 0.4, 1.0, 10.0, 45.0):
                want = bessel_k_quadrature(order, x)
                got = bessel_k(order, x)
                assert abs(got - want) < 1e-10 * want, f"(nu={order}, x={x})"

    def test_domain_error(self):
        with pytest.raises(ValueError):
            bessel_k(1.0, 0.0)
        with pytest.raises(ValueError):
            bessel_k(1.0, -2.0)

    def test_vectorized(self):
        x = np.array([0.5, 1.0, 2.0])
        out = bessel_k(1.5, x)
        assert out.shape == x.shape
        assert np.all(np.diff(out) < 0), "K_nu must decay in x"

    @given(
        order=st.floats(min_value=0.0, max_value=10.0),
        x=st.floats(min_value=1e-3, max_value=30.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_symmetry_property(self, order, x):
        assert bessel_k(-order, x) == bessel_k(order, x)


# =====================================================================
# beta_fn
# =====================================================================


class TestBetaFn:
    def test_known_values(self):
        assert abs(beta_fn(0.5, 1.0) - 2.0) < 1e-13
        assert abs(beta_fn(1.0, 1.0) - 1.0) < 1e-14

    def test_derived_from_ln_gamma(self):
        """B(0.5, 1.025) equals the log-gamma composition."""
        want = math.exp(
            stirling_ln_gamma(0.5).real
            + stirling_ln_gamma(1.025).real
            - stirling_ln_gamma(1.525).real
        )
        assert abs(beta_fn(0.5, 1.025) - want) < 1e-12 * want

    def test_domain_errors(self):
        for a, b in ((0.0, 1.0), (1.0, -0.5), (-1.0, -1.0)):
            with pytest.raises(ValueError):
                beta_fn(a, b)

    @given(
        a=st.floats(min_value=0.05, max_value=20.0),
        b=st.floats(min_value=0.05, max_value=20.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_symmetry_and_pascal(self, a, b):
        """B is symmetric and satisfies B(a,b) = B(a+1,b) + B(a,b+1)."""
        lhs = beta_fn(a, b)
        assert math.isclose(lhs, beta_fn(b, a), rel_tol=1e-12)
        assert math.isclose(lhs, beta_fn(a + 1.0, b) + beta_fn(a, b + 1.0), rel_tol=1e-10)


# =====================================================================
# g_quarter
# =====================================================================


class TestGQuarter:
    def test_elementary_values(self):
        assert abs(g_quarter(0.0) - math.pi / 4.0) < 1e-12
        assert abs(g_quarter(1.0) - (1.0 - math.sqrt(2.0) / 2.0)) < 1e-12
        assert abs(g_quarter(2.0) - (math.pi / 8.0 - 0.25)) < 1e-12

    def test_monotone_decreasing(self):
        xs = np.linspace(0.0, 12.0, 25)
        vals = [g_quarter(float(x)) for x in xs]
        assert all(v1 > v2 for v1, v2 in zip(vals, vals[1:]))

    def test_domain_error(self):
        with pytest.raises(ValueError):
            g_quarter(-1.0)
        with pytest.raises(ValueError):
            g_quarter(-1.5)

    def test_mildly_singular_endpoint(self):
        """x in (-1, 0) keeps the integral finite and computable."""
        got = g_quarter(-0.5)
        want, _ = integrate.quad(lambda t: math.sin(t) ** -0.5, 1e-12, math.pi / 4.0)
        assert abs(got - want) < 1e-7 * want

    @given(x=st.floats(min_value=0.0, max_value=30.0))
    @settings(max_examples=60, deadline=None)
    def test_bounded_by_half_range_integral(self, x):
        """Quarter-range integral never exceeds half of B(1/2, (x+1)/2)."""
        assert g_quarter(x) <= 0.5 * beta_fn(0.5, (x + 1.0) / 2.0) + 1e-15

    @given(x=st.floats(min_value=-0.4, max_value=25.0))
    @settings(max_examples=40, deadline=None)
    def test_incomplete_beta_identity(self, x):
        """g(x) = (1/2) B(1/2; (x+1)/2, 1/2) via u = sin^2(theta)."""
        a = (x + 1.0) / 2.0
        want = 0.5 * special.betainc(a, 0.5, 0.5) * special.beta(a, 0.5)
        assert math.isclose(g_quarter(x), want, rel_tol=1e-9)


# =====================================================================
# MeijerGSpec / ContourConfig validation
# =====================================================================


class TestSpecValidation:
    def test_rejects_inconsistent_orders(self):
        with pytest.raises(ValueError):
            MeijerGSpec(m=2, n=0, p=0, q=1, a_params=(), b_params=(0.0,), z=1.0)
        with pytest.raises(ValueError):
            MeijerGSpec(m=1, n=1, p=0, q=1, a_params=(), b_params=(0.0,), z=1.0)
        with pytest.raises(ValueError):
            MeijerGSpec(m=1, n=0, p=2, q=1, a_params=(0.5, 0.5), b_params=(0.0,), z=1.0)

    def test_rejects_wrong_lengths(self):
        with pytest.raises(ValueError):
            MeijerGSpec(m=1, n=0, p=1, q=1, a_params=(), b_params=(0.0,), z=1.0)

    def test_rejects_nonpositive_argument(self):
        for z in (0.0, -2.0):
            with pytest.raises(ValueError):
                MeijerGSpec(m=1, n=0, p=0, q=1, a_params=(), b_params=(0.0,), z=z)

    def test_contour_must_separate_poles(self):
        """An offset left of the last left pole is rejected."""
        spec = MeijerGSpec(m=1, n=1, p=1, q=1, a_params=(0.25,), b_params=(0.5,), z=0.3)
        # admissible strip is (-0.5, 0.75)
        with pytest.raises(ValueError):
            meijer_g(spec, contour=ContourConfig(offset=-0.7), route="contour")
        with pytest.raises(ValueError):
            meijer_g(spec, contour=ContourConfig(offset=0.9), route="contour")


# =====================================================================
# meijer_g
# =====================================================================


def _exp_spec(z):
    return MeijerGSpec(m=1, n=0, p=0, q=1, a_params=(), b_params=(0.0,), z=z)


def _bessel_spec(z, order):
    return MeijerGSpec(
        m=2, n=0, p=0, q=2,
        a_params=(), b_params=(order / 2.0, -order / 2.0),
        z=z * z / 4.0,
    )


class TestMeijerG:
    def test_exponential_reduction(self):
        """G^{1,0}_{0,1}(z | -; 0) = exp(-z) on both routes."""
        for z in (0.1, 1.0, 10.0):
            want = math.exp(-z)
            for route in ("residue", "contour"):
                got = meijer_g(_exp_spec(z), route=route)
                assert abs(got - want) < 1e-10 * want, f"z={z}, route={route}"

    def test_bessel_reduction(self):
        """G^{2,0}_{0,2}(z^2/4 | -; nu/2, -nu/2) = 2 K_nu(z).

        Integer orders are excluded: they coalesce the two pole ladders,
        which the residue route rejects by design.
        """
        for z in (0.5, 1.0, 4.0):
            for order in (0.3, 0.85, 2.6):
                want = 2.0 * bessel_k_quadrature(order, z)
                for route in ("residue", "contour"):
                    got = meijer_g(_bessel_spec(z, order), route=route)
                    assert abs(got - want) < 1e-8 * want, (
                        f"z={z}, nu={order}, route={route}: got {got}, want {want}"
                    )

    def test_signed_cosine_reduction(self):
        """G^{1,0}_{0,2}(z^2/4 | -; 0, 1/2) = cos(z)/sqrt(pi), sign included.

        This kernel has m + n - (p + q)/2 = 0, so no vertical line carries
        an absolutely convergent Mellin-Barnes integral: the residue route
        must produce the signed value and the contour route must refuse.
        """
        for z in (0.7, 2.0, 3.0):
            spec = MeijerGSpec(
                m=1, n=0, p=0, q=2, a_params=(), b_params=(0.0, 0.5), z=z * z / 4.0
            )
            want = math.cos(z) / math.sqrt(math.pi)
            got = meijer_g(spec, route="residue")
            assert abs(got - want) < 1e-9, f"z={z}: got {got}, want {want}"
            with pytest.raises(AccuracyError, match="convergent"):
                meijer_g(spec, route="contour")

    def test_erf_reduction_with_numerator_params(self):
        """G^{1,1}_{1,2}(x | 1; 1/2, 0) = sqrt(pi) erf(sqrt(x)), both routes.

        Exercises an upper (numerator) parameter on the contour, which the
        Bessel and cascade kernels never do.
        """
        for x in (0.04, 0.7, 2.5, 9.0):
            spec = MeijerGSpec(
                m=1, n=1, p=1, q=2, a_params=(1.0,), b_params=(0.5, 0.0), z=x
            )
            want = math.sqrt(math.pi) * special.erf(math.sqrt(x))
            for route in ("residue", "contour"):
                got = meijer_g(spec, route=route)
                assert abs(got - want) < 1e-9 * want, f"x={x}, route={route}"

    def test_cascade_kernel_routes_agree(self):
        """Residue and contour agree on the 4x4 cascade kernel to 1e-6.

        The shape pattern matches the strong-turbulence cascade: lower
        parameters (b1 - m, a1 - m, (b2-a2)/2, (a2-b2)/2) with
        m = (a2+b2)/2 for shape pairs (6.99, 1.05) and (4.59, 1.23).
        """
        a1, b1, a2, b2 = 6.99, 1.05, 4.59, 1.23
        mid = (a2 + b2) / 2.0
        b_params = (b1 - mid, a1 - mid, (b2 - a2) / 2.0, (a2 - b2) / 2.0)
        for z in (1e-3, 0.5, 1.0, 41.556, 415.56):
            spec = MeijerGSpec(m=4, n=0, p=0, q=4, a_params=(), b_params=b_params, z=z)
            res = meijer_g(spec, route="residue")
            con = meijer_g(spec, route="contour")
            assert res > 0.0, f"kernel must be positive, z={z}"
            assert abs(res - con) < 1e-6 * abs(res), (
                f"z={z}: residue {res:.12e} vs contour {con:.12e}"
            )

    def test_offset_invariance(self):
        """The contour value does not depend on the abscissa inside the strip.

        Order 1 is intentional: the contour route is insensitive to pole
        multiplicity, so it also covers the double-pole case the residue
        route refuses.
        """
        spec = _bessel_spec(1.0, 1.0)  # strip is c > 0.5, unbounded
        v1 = meijer_g(spec, contour=ContourConfig(offset=0.9), route="contour")
        v2 = meijer_g(spec, contour=ContourConfig(offset=2.4), route="contour")
        assert abs(v1 - v2) < 1e-8 * abs(v1)
        assert abs(v1 - 2.0 * bessel_k_quadrature(1.0, 1.0)) < 1e-8 * abs(v1)

    def test_auto_route_matches_contour_at_large_argument(self):
        """Cancellation-prone large arguments stay accurate on the auto route."""
        a1, b1, a2, b2 = 6.99, 1.05, 4.59, 1.23
        mid = (a2 + b2) / 2.0
        b_params = (b1 - mid, a1 - mid, (b2 - a2) / 2.0, (a2 - b2) / 2.0)
        spec = MeijerGSpec(m=4, n=0, p=0, q=4, a_params=(), b_params=b_params, z=415.56)
        auto = meijer_g(spec)
        con = meijer_g(spec, route="contour")
        assert abs(auto - con) < 1e-8 * abs(con)

    def test_pole_collision_detected(self):
        """Integer-separated lower parameters raise the collision error."""
        from uvscatter.errors import PoleCollisionError

        spec = MeijerGSpec(
            m=2, n=0, p=0, q=2, a_params=(), b_params=(0.5, 1.5), z=1.0
        )
        with pytest.raises(PoleCollisionError):
            meijer_g(spec, route="residue")

    def test_accuracy_error_reports_bound(self):
        """An impossible tolerance fails loudly instead of silently degrading."""
        spec = _exp_spec(1.0)
        with pytest.raises(AccuracyError):
            meijer_g(
                spec,
                contour=ContourConfig(height=1.0, nodes=8, rtol=1e-30, max_doublings=0),
                route="contour",
            )


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
