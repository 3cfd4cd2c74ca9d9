"""Special-function kernels.

Everything numeric in this package ultimately rests on the four primitives
here: a complex Lanczos log-gamma, the modified Bessel function of the
second kind, the beta integral, and a Meijer G-function evaluator for
positive real argument.

The Meijer evaluator is deliberately implemented twice:

* ``residue`` sums residues over the left pole ladders (fast, equivalent to
  the generalized-hypergeometric expansion), escalating to arbitrary
  precision when the alternating sum cancels badly;
* ``contour`` integrates the Mellin-Barnes integrand along a vertical line
  with trapezoid nodes (robust, float64 throughout).

Each route validates the other in the test suite; ``route="auto"`` picks
the residue sum while it is well conditioned and falls back to the contour
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import AccuracyError, PoleCollisionError

__all__ = [
    "MeijerGSpec",
    "ContourConfig",
    "ln_gamma",
    "bessel_k",
    "beta_fn",
    "g_quarter",
    "meijer_g",
]


# =====================================================================
# log-gamma
# =====================================================================

# Lanczos g = 7, 9 coefficients
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_ln_gamma(z):
    """Lanczos kernel, valid for Re(z) >= 0.5, complex ndarray in/out."""
    zm1 = z - 1.0
    acc = np.full(z.shape, _LANCZOS_COEFFS[0], dtype=np.complex128)
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc = acc + _LANCZOS_COEFFS[i] / (zm1 + i)
    t = zm1 + _LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (zm1 + 0.5) * np.log(t) - t + np.log(acc)


def _log_sin_pi(z):
    """log(sin(pi z)) without overflow for large |Im z|.

    Branch offsets of 2 pi i are irrelevant downstream because every
    consumer exponentiates the result.
    """
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty(z.shape, dtype=np.complex128)
    small = np.abs(z.imag) < 20.0
    out[small] = np.log(np.sin(np.pi * z[small]))
    big = ~small
    if np.any(big):
        zb = z[big]
        sgn = np.where(zb.imag > 0.0, 1.0, -1.0)
        out[big] = (
            -sgn * 1j * np.pi * zb
            + np.log1p(-np.exp(2j * sgn * np.pi * zb))
            - math.log(2.0)
            + sgn * 0.5j * np.pi
        )
    return out


def ln_gamma(x):
    """Principal-branch log-gamma for real or complex input.

    Lanczos approximation (g=7, nine coefficients) with the reflection
    formula for Re(x) < 1/2.  Accepts scalars or arrays; positive real
    input yields real output, everything else complex.

    Raises ValueError at the poles (real non-positive integers).
    """
    arr = np.asarray(x)
    scalar = arr.ndim == 0
    if arr.dtype.kind in "iuf":
        real_vals = np.asarray(arr, dtype=float)
        at_pole = (real_vals <= 0.0) & (real_vals == np.floor(real_vals))
        if np.any(at_pole):
            where = np.asarray(real_vals)[at_pole].ravel()[0]
            raise ValueError(f"log-gamma pole at x = {where:g}")
    z = np.atleast_1d(np.asarray(arr, dtype=np.complex128))
    reflect = z.real < 0.5
    zr = np.where(reflect, 1.0 - z, z)
    out = _lanczos_ln_gamma(zr)
    if np.any(reflect):
        reflected = math.log(math.pi) - _log_sin_pi(z[reflect]) - out[reflect]
        out = out.copy()
        out[reflect] = reflected
    if arr.dtype.kind in "iuf" and np.all(np.asarray(arr, dtype=float) > 0.0):
        out = out.real
    if scalar:
        return out[0] if out.ndim else out
    return out.reshape(np.shape(arr)) if np.shape(arr) else out


# =====================================================================
# modified Bessel K, beta, quarter-range sine integral
# =====================================================================


def bessel_k(order, x):
    """Modified Bessel function of the second kind, K_nu(x), real order.

    Order symmetry K_{-nu} = K_nu is applied before evaluation.  Underflow
    at very large x returns 0.0.  Raises ValueError for x <= 0.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0.0):
        raise ValueError("bessel_k requires x > 0")
    out = special.kv(abs(float(order)), xs)
    if np.ndim(x) == 0:
        return float(out)
    return out


def beta_fn(a, b):
    """Euler beta integral B(a, b) = Gamma(a) Gamma(b) / Gamma(a+b), a, b > 0."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"beta_fn requires positive arguments, got ({a}, {b})")
    return math.exp(float(ln_gamma(a)) + float(ln_gamma(b)) - float(ln_gamma(a + b)))


def g_quarter(x):
    """Integral of sin(theta)^x over theta in [0, pi/4].

    Defined for x > -1 (the endpoint singularity stays integrable);
    adaptive quadrature to relative 1e-12.
    """
    x = float(x)
    if x <= -1.0:
        raise ValueError(f"g_quarter diverges for x <= -1, got {x}")
    val, err = integrate.quad(
        lambda th: math.sin(th) ** x, 0.0, math.pi / 4.0,
        epsabs=0.0, epsrel=1e-12, limit=300,
    )
    if err > 1e-9 * abs(val):
        raise AccuracyError(f"g_quarter({x}) reached only {err / abs(val):.2e} relative")
    return val


# =====================================================================
# Meijer G
# =====================================================================


@dataclass(frozen=True)
class MeijerGSpec:
    """Parameter block for G^{m,n}_{p,q}(z | a_params; b_params), z > 0.

    Only p <= q is supported (the left pole ladders carry the value); that
    covers every kernel this package needs.
    """

    m: int
    n: int
    p: int
    q: int
    a_params: tuple
    b_params: tuple
    z: float

    def __post_init__(self):
        object.__setattr__(self, "a_params", tuple(float(v) for v in self.a_params))
        object.__setattr__(self, "b_params", tuple(float(v) for v in self.b_params))
        if len(self.a_params) != self.p or len(self.b_params) != self.q:
            raise ValueError(
                f"parameter lengths ({len(self.a_params)}, {len(self.b_params)}) "
                f"do not match orders (p={self.p}, q={self.q})"
            )
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise ValueError(f"need 0 <= m <= q and 0 <= n <= p, got {self}")
        if self.p > self.q:
            raise ValueError("only p <= q is supported")
        if not (self.z > 0.0 and math.isfinite(self.z)):
            raise ValueError(f"argument must be positive and finite, got z={self.z}")

    def pole_strip(self):
        """Admissible real interval (lo, hi) for a separating vertical contour."""
        lo = max(-b for b in self.b_params[: self.m]) if self.m else -math.inf
        hi = min(1.0 - a for a in self.a_params[: self.n]) if self.n else math.inf
        return lo, hi


@dataclass(frozen=True)
class ContourConfig:
    """Discretization of the vertical Mellin-Barnes contour Re(s) = c."""

    offset: float | None = None  # abscissa c; None picks midpoint/saddle automatically
    height: float = 40.0         # initial truncation half-height T
    nodes: int = 2048            # trapezoid node count on [0, T]
    rtol: float = 1e-10          # relative tolerance for node-refinement convergence
    max_doublings: int = 12      # cap on T growth and node refinement rounds

    def __post_init__(self):
        if self.height <= 0.0 or self.nodes < 4 or self.rtol <= 0.0:
            raise ValueError(f"invalid contour configuration: {self}")


def _collision_scan(spec: MeijerGSpec):
    """Reject parameter sets whose left pole ladders coincide.

    Two lower parameters of the principal group separated by an integer
    (within 1e-5) produce double poles, whose logarithmic residues the
    residue route does not implement.  A left pole landing on a right pole
    family is rejected for the same reason.
    """
    principal = spec.b_params[: spec.m]
    for i in range(len(principal)):
        for j in range(i + 1, len(principal)):
            diff = principal[i] - principal[j]
            if abs(diff - round(diff)) <= 1e-5:
                raise PoleCollisionError(
                    f"lower parameters {principal[i]:.6f} and {principal[j]:.6f} "
                    "differ by an integer within 1e-5; perturb the shape "
                    "parameters and rebuild"
                )
    for a in spec.a_params[: spec.n]:
        for b in principal:
            gap = 1.0 - a + b
            if gap <= 1e-5 and abs(gap - round(gap)) <= 1e-5:
                raise PoleCollisionError(
                    f"left pole ladder of b={b:.6f} meets the right ladder of "
                    f"a={a:.6f}; perturb the shape parameters and rebuild"
                )


def _residue_terms_f64(spec: MeijerGSpec):
    """All residue terms as (signs, log-magnitudes), block-adaptive in k."""
    m, n, p, q = spec.m, spec.n, spec.p, spec.q
    a = np.asarray(spec.a_params)
    b = np.asarray(spec.b_params)
    lnz = math.log(spec.z)
    # past this index the factorial-type decay is guaranteed to have set in
    k_settle = spec.z ** (1.0 / max(q - p, 1)) if q > p else 0.0

    signs, logs = [], []
    block = 64
    start = 0
    global_max = -math.inf
    while True:
        k = np.arange(start, start + block, dtype=float)
        blk_sign = np.where(np.mod(k, 2) == 0, 1.0, -1.0)
        blk_log = -special.gammaln(k + 1.0)
        for j in range(m):
            sign_j = blk_sign.copy()
            log_j = blk_log + (b[j] + k) * lnz
            for i in range(m):
                if i == j:
                    continue
                arg = b[i] - b[j] - k
                log_j += special.gammaln(arg)
                sign_j *= special.gammasgn(arg)
            for i in range(n):
                arg = 1.0 - a[i] + b[j] + k
                log_j += special.gammaln(arg)
                sign_j *= special.gammasgn(arg)
            for i in range(m, q):
                arg = 1.0 - b[i] + b[j] + k
                log_j -= special.gammaln(arg)
                sign_j *= special.gammasgn(arg)
            for i in range(n, p):
                arg = a[i] - b[j] - k
                log_j -= special.gammaln(arg)
                sign_j *= special.gammasgn(arg)
            signs.append(sign_j)
            logs.append(log_j)
        blk_max = max(np.max(lg) for lg in logs[-m:])
        global_max = max(global_max, blk_max)
        start += block
        if start > 20000:
            raise AccuracyError("residue series did not settle within 20000 terms")
        if start > k_settle + 8 and blk_max < global_max - 46.0:
            break
    return np.concatenate(signs), np.concatenate(logs)


def _sum_signed_logs(signs, logs):
    """Compensated sum of sign * exp(log) terms; returns (value, digits lost)."""
    finite = np.isfinite(logs)
    if not np.any(finite):
        return 0.0, 0.0
    signs, logs = signs[finite], logs[finite]
    peak = float(np.max(logs))
    scaled = math.fsum(signs * np.exp(logs - peak))
    if scaled == 0.0:
        return 0.0, math.inf
    lost = -math.log10(abs(scaled))
    log_value = peak + math.log(abs(scaled))
    if log_value > 709.0:
        return math.copysign(math.inf, scaled), lost
    if log_value < -745.0:
        return 0.0, lost
    return math.copysign(math.exp(log_value), scaled), lost


def _residue_mp(spec: MeijerGSpec, dps: int) -> float:
    """Arbitrary-precision residue sum; dps escalates until enough clean digits."""
    from mpmath import mp

    m, n, p, q = spec.m, spec.n, spec.p, spec.q
    k_settle = int(spec.z ** (1.0 / max(q - p, 1))) + 10
    for _ in range(5):
        with mp.workdps(dps):
            z = mp.mpf(spec.z)
            total = mp.mpf(0)
            peak = mp.mpf(0)
            stop_eps = mp.mpf(10) ** (-(dps + 5))
            for j in range(m):
                bj = mp.mpf(spec.b_params[j])
                k = 0
                quiet = 0
                while True:
                    term = (-1) ** (k % 2) * z ** (bj + k) / mp.factorial(k)
                    for i in range(m):
                        if i != j:
                            term *= mp.gamma(spec.b_params[i] - bj - k)
                    for i in range(n):
                        term *= mp.gamma(1.0 - spec.a_params[i] + bj + k)
                    for i in range(m, q):
                        term *= mp.rgamma(1.0 - spec.b_params[i] + bj + k)
                    for i in range(n, p):
                        term *= mp.rgamma(spec.a_params[i] - bj - k)
                    total += term
                    peak = max(peak, abs(term))
                    if abs(term) < stop_eps * max(abs(total), mp.mpf(1e-300)):
                        quiet += 1
                        if quiet >= 25 and k > k_settle:
                            break
                    else:
                        quiet = 0
                    k += 1
                    if k > 50000:
                        raise AccuracyError("high-precision residue series stalled")
            lost = float(mp.log10(peak / abs(total))) if total != 0 and peak > 0 else 0.0
            if dps - lost >= 12.0:
                return float(total)
        dps = int(lost) + 25
    raise AccuracyError(
        f"residue summation unstable: {lost:.1f} digits cancel at dps={dps}"
    )


def _meijer_g_residue(spec: MeijerGSpec) -> float:
    signs, logs = _residue_terms_f64(spec)
    value, lost = _sum_signed_logs(signs, logs)
    if math.isfinite(lost) and lost <= 6.0 and math.isfinite(value):
        return value
    dps = min(max(30, int(20 + 1.2 * lost) if math.isfinite(lost) else 40), 200)
    return _residue_mp(spec, dps)


def _auto_offset(spec: MeijerGSpec) -> float:
    lo, hi = spec.pole_strip()
    if math.isfinite(hi):
        return 0.5 * (lo + hi)
    if spec.n == 0 and spec.p == 0 and spec.m == spec.q:
        # all gamma factors sit upstairs: place the contour on the real
        # saddle so the trapezoid sees a stationary-phase peak at t = 0
        lnz = math.log(spec.z)
        b = np.asarray(spec.b_params)

        def slope(c):
            return float(np.sum(special.digamma(b + c))) - lnz

        left = lo + 1e-6
        right = lo + 2.0
        for _ in range(60):
            if slope(right) > 0.0:
                break
            right = lo + 2.0 * (right - lo)
        else:
            return lo + 1.0
        return float(optimize.brentq(slope, left, right, xtol=1e-10))
    return lo + 1.0


def _log_integrand(spec: MeijerGSpec, s):
    """Complex log of the Mellin-Barnes integrand at points s on the contour."""
    m, n, p, q = spec.m, spec.n, spec.p, spec.q
    total = -s * math.log(spec.z)
    for j in range(m):
        total = total + ln_gamma(spec.b_params[j] + s)
    for j in range(n):
        total = total + ln_gamma(1.0 - spec.a_params[j] - s)
    for j in range(m, q):
        total = total - ln_gamma(1.0 - spec.b_params[j] - s)
    for j in range(n, p):
        total = total - ln_gamma(spec.a_params[j] + s)
    return total


def _meijer_g_contour(spec: MeijerGSpec, contour: ContourConfig) -> float:
    # |integrand| ~ |t|^w exp(-decay pi |t| / 2); without exponential decay
    # no vertical line converges absolutely
    decay = spec.m + spec.n - 0.5 * (spec.p + spec.q)
    if decay <= 0.0:
        raise AccuracyError(
            "no absolutely convergent vertical contour for this kernel "
            f"(m + n - (p + q)/2 = {decay:g} <= 0)"
        )
    lo, hi = spec.pole_strip()
    c = contour.offset if contour.offset is not None else _auto_offset(spec)
    if not (lo + 1e-9 < c < hi - 1e-9):
        raise ValueError(
            f"contour offset {c} does not separate the pole ladders "
            f"(admissible strip ({lo}, {hi}))"
        )

    height = contour.height
    doublings = contour.max_doublings
    anchor = float(np.real(_log_integrand(spec, np.array([c + 0.0j]))[0]))
    # grow T until the integrand magnitude at iT is 1e-16 of the t=0 value
    while True:
        tip = float(np.real(_log_integrand(spec, np.array([c + 1j * height]))[0]))
        if tip < anchor + math.log(1e-16):
            break
        if doublings <= 0:
            raise AccuracyError(
                f"contour tail only decayed to {math.exp(min(tip - anchor, 700.0)):.2e} "
                f"of peak at T={height}"
            )
        height *= 2.0
        doublings -= 1

    nodes = contour.nodes * max(1, int(round(height / contour.height)))
    previous = None
    while True:
        t = np.linspace(0.0, height, nodes + 1)
        logf = _log_integrand(spec, c + 1j * t)
        peak = float(np.max(logf.real))
        vals = np.exp(logf - peak)
        raw = float(integrate.trapezoid(vals.real, t))
        coarse = float(integrate.trapezoid(vals.real[::2], t[::2]))
        scale_ref = max(abs(raw), float(np.max(np.abs(vals.real))) * height * 1e-12)
        converged = abs(raw - coarse) <= contour.rtol * scale_ref
        if converged or doublings <= 0:
            if not converged:
                achieved = abs(raw - coarse) / scale_ref if scale_ref else math.inf
                raise AccuracyError(
                    f"contour refinement stalled at relative {achieved:.2e} "
                    f"with {nodes} nodes"
                )
            break
        nodes *= 2
        doublings -= 1
        previous = raw

    if raw == 0.0:
        return 0.0
    log_value = peak + math.log(abs(raw)) - math.log(math.pi)
    if log_value > 709.0:
        return math.copysign(math.inf, raw)
    if log_value < -745.0:
        return 0.0
    return math.copysign(math.exp(log_value), raw)


def meijer_g(spec: MeijerGSpec, contour: ContourConfig | None = None,
             route: str = "auto") -> float:
    """Evaluate the Meijer G-function for positive real argument.

    route="residue" sums the left-pole residue series (raising
    PoleCollisionError when pole ladders coincide), route="contour"
    integrates along the vertical line Re(s)=c, and route="auto" uses the
    residue sum when it is well conditioned in float64 and the contour
    otherwise.  The explicit contour route skips the collision scan: the
    line integral is insensitive to pole multiplicity.
    """
    if route not in ("auto", "residue", "contour"):
        raise ValueError(f"unknown route {route!r}")
    cfg = contour if contour is not None else ContourConfig()
    if route == "contour":
        return _meijer_g_contour(spec, cfg)
    _collision_scan(spec)
    if route == "residue":
        return _meijer_g_residue(spec)
    # auto: float64 residues when clean, contour fallback, precision last
    signs, logs = _residue_terms_f64(spec)
    value, lost = _sum_signed_logs(signs, logs)
    if math.isfinite(lost) and lost <= 6.0 and math.isfinite(value):
        return value
    lo, hi = spec.pole_strip()
    if hi - lo > 1e-6:
        try:
            return _meijer_g_contour(spec, cfg)
        except AccuracyError:
            pass
    dps = min(max(30, int(20 + 1.2 * lost) if math.isfinite(lost) else 40), 200)
    return _residue_mp(spec, dps)
