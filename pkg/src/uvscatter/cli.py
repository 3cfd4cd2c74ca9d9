"""Command-line front end: scenario sweeps to CSV tables and SVG plots.

Subcommands::

    channel     cascade constants per turbulence strength
    pdf         density of the normalized irradiance by each method
    ber-sweep   error rate vs mean SNR for each scheme and method
    geom-sweep  error rate vs receiver elevation (ellipse or fixed-theta_t)
    penalty     SNR penalties between scheme pairs at a target error rate
    mc          Monte-Carlo error rates on the SNR grid

Every subcommand reads one ``--config`` scenario file, writes CSV to
``--out`` (stdout otherwise), and with ``--format svg`` also renders a
figure next to the CSV.  Exit codes: 0 success, 2 configuration error,
3 numeric-accuracy failure in any row.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from ._config import RunConfig, load_config
from ._report import render_svg, write_csv
from .channel import NlosChannel, build_channel, gg_params_from_rytov, pdf_meijer, pdf_quadrature, pdf_series
from .errors import AccuracyError, ConfigError, NoIntersectionError, PoleCollisionError, StatisticalPowerError
from .geometry import LinkGeometry, derive_common_volume, e2_gain, ellipse_configuration, mean_snr, omega_v
from .mcsim import SimConfig, empirical_error_rate, philox_streams, sample_nlos
from .modem import (
    ErrorRateResult,
    ModulationScheme,
    asymptotic_error,
    ber_bpsk,
    ber_dpsk_ncfsk,
    conditional_error,
    error_rate_quadrature,
    ser_qpsk_meijer,
    ser_qpsk_series,
    snr_penalty,
)

__all__ = ["main"]

_NUMERIC_ERRORS = (AccuracyError, PoleCollisionError, StatisticalPowerError,
                   ArithmeticError, ValueError)


# =====================================================================
# Shared helpers
# =====================================================================


def _scenario_channel(config: RunConfig, cn2: float,
                      geometry: LinkGeometry) -> NlosChannel:
    r1, r2, _ = derive_common_volume(geometry)
    link1 = gg_params_from_rytov(cn2, r1, config.wavelength)
    link2 = gg_params_from_rytov(cn2, r2, config.wavelength)
    power_v = omega_v(geometry, config.atmosphere, config.tx_power)
    gain = e2_gain(config.atmosphere, r2, geometry.aperture_a_r)
    return build_channel(power_v, gain, link1, link2)


def _single_cn2(config: RunConfig) -> float:
    nonzero = [c for c in config.cn2_list if c > 0.0]
    if len(nonzero) != 1 or len(config.cn2_list) != 1:
        raise ConfigError("this subcommand needs exactly one nonzero cn2 value")
    return nonzero[0]


def _budget_snr(config: RunConfig, received_power: float) -> float:
    return mean_snr(received_power, config.filter_eta, config.detector_eta,
                    config.wavelength, config.bit_rate)


def _scheme_rate(channel: NlosChannel, snr: float, scheme: ModulationScheme,
                 token: str, seed: int, streams: int, bins: int) -> ErrorRateResult:
    name, _, param = token.partition(":")
    if name == "meijer":
        if scheme.kind == "BPSK":
            return ber_bpsk(channel, snr, route="meijer")
        if scheme.kind == "QPSK":
            return ser_qpsk_meijer(channel, snr)
        return ber_dpsk_ncfsk(channel, snr, scheme.j, route="meijer")
    if name == "series":
        terms = int(param) if param else 30
        if scheme.kind == "BPSK":
            return ber_bpsk(channel, snr, route="series", terms=terms)
        if scheme.kind == "QPSK":
            return ser_qpsk_series(channel, snr, terms=terms)
        return ber_dpsk_ncfsk(channel, snr, scheme.j, route="series", terms=terms)
    if name == "quadrature":
        return error_rate_quadrature(channel, snr, scheme)
    if name == "asymptotic":
        return asymptotic_error(channel, snr, scheme, two_term=(param != "1"))
    if name == "mc":
        samples = int(param) if param else 1_000_000
        sim = SimConfig(sample_count=samples, rng_seed=seed,
                        stream_count=streams, histogram_bins=bins)
        return empirical_error_rate(channel, snr, scheme, sim)
    raise ConfigError(f"unknown method token {token!r}")


def _result_bound(result: ErrorRateResult):
    if result.truncation_upper is None:
        return None
    if result.truncation_lower is None:
        return result.truncation_upper
    return 2.0 * result.truncation_upper - result.truncation_lower


def _run_tasks(worker, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


# =====================================================================
# Subcommand: channel
# =====================================================================

_CHANNEL_HEADER = ("cn2", "alpha1", "beta1", "alpha2", "beta2",
                   "s", "a", "h", "omega_r", "perturbed", "error")


def _run_channel(config: RunConfig, args):
    geometry = config.geometry.fixed_link()
    rows = []
    failed = False
    for cn2 in config.cn2_list:
        if cn2 <= 0.0:
            rows.append((cn2, None, None, None, None, None, None, None,
                         None, None, "cn2 must be positive for channel constants"))
            failed = True
            continue
        try:
            chan = _scenario_channel(config, cn2, geometry)
        except _NUMERIC_ERRORS as exc:
            rows.append((cn2, None, None, None, None, None, None, None,
                         None, None, str(exc)))
            failed = True
            continue
        rows.append((cn2, chan.alpha1, chan.beta1, chan.link2_alpha,
                     chan.link2_beta, chan.s, chan.a, chan.h, chan.omega_r,
                     chan.perturbation_applied, None))
    return _CHANNEL_HEADER, rows, failed


# =====================================================================
# Subcommand: pdf
# =====================================================================

_PDF_HEADER = ("i_n", "method", "density", "error")


def _pdf_task(task):
    channel, i_n, token, terms = task
    name, _, param = token.partition(":")
    try:
        if name == "meijer":
            value = pdf_meijer(channel, i_n)
        elif name == "series":
            value = pdf_series(channel, i_n, int(param) if param else terms)
        elif name == "quadrature":
            value = channel.omega_r * pdf_quadrature(channel, channel.omega_r * i_n)
        else:
            raise ConfigError(f"pdf does not support method {token!r}")
        return (i_n, token, value, None)
    except _NUMERIC_ERRORS as exc:
        return (i_n, token, None, str(exc))


def _run_pdf(config: RunConfig, args):
    cn2 = _single_cn2(config)
    channel = _scenario_channel(config, cn2, config.geometry.fixed_link())
    grid = np.geomspace(config.pdf_i_start, config.pdf_i_stop, config.pdf_points)

    analytic = [t for t in config.methods if not t.startswith("mc")]
    mc_tokens = [t for t in config.methods if t.startswith("mc")]
    for token in analytic:
        if token.partition(":")[0] == "asymptotic":
            raise ConfigError("pdf does not support method 'asymptotic'")

    tasks = [(channel, float(i), token, config.pdf_terms)
             for i in grid for token in analytic]
    rows = _run_tasks(_pdf_task, tasks, args.jobs)

    for token in mc_tokens:
        _, _, param = token.partition(":")
        samples = int(param) if param else 1_000_000
        streams = philox_streams(args.seed, config.mc_streams)
        draws = np.concatenate([
            sample_nlos(channel, rng, samples // config.mc_streams + 1)
            for rng in streams
        ])[:samples] / channel.omega_r
        edges = np.geomspace(config.pdf_i_start, config.pdf_i_stop,
                             config.mc_bins + 1)
        counts, _ = np.histogram(draws, bins=edges)
        # normalize by the full draw count so out-of-range mass stays visible
        density = counts / (draws.size * np.diff(edges))
        centers = np.sqrt(edges[:-1] * edges[1:])
        rows.extend((float(c), token, float(d), None)
                    for c, d in zip(centers, density))

    failed = any(row[3] is not None for row in rows)
    return _PDF_HEADER, rows, failed


# =====================================================================
# Subcommands: ber-sweep and mc
# =====================================================================

_BER_HEADER = ("snr_db", "scheme", "method", "error_rate",
               "trunc_bound", "stderr", "error")


def _ber_task(task):
    channel, snr_db, scheme, token, seed, streams, bins = task
    snr = 10.0 ** (0.1 * snr_db)
    try:
        result = _scheme_rate(channel, snr, scheme, token, seed, streams, bins)
        note = "asymptote out of range" if result.out_of_range else None
        return (snr_db, scheme.kind, token, result.probability,
                _result_bound(result), result.stderr, note)
    except _NUMERIC_ERRORS as exc:
        return (snr_db, scheme.kind, token, None, None, None, str(exc))


def _require_schemes(config: RunConfig):
    if not config.schemes:
        raise ConfigError("missing [modulation] schemes list")


def _run_ber_sweep(config: RunConfig, args, method_filter=None):
    _require_schemes(config)
    if config.snr_mode != "grid":
        raise ConfigError("ber-sweep needs an SNR grid (start_db/stop_db/step_db)")
    cn2 = _single_cn2(config)
    channel = _scenario_channel(config, cn2, config.geometry.fixed_link())
    methods = config.methods
    if method_filter is not None:
        methods = tuple(t for t in methods if t.partition(":")[0] == method_filter)
        if not methods:
            methods = ("mc:1000000",) if method_filter == "mc" else ()
    if not methods:
        raise ConfigError("no applicable methods configured")
    tasks = [
        (channel, snr_db, scheme, token, args.seed, config.mc_streams, config.mc_bins)
        for snr_db in config.snr_grid_db
        for scheme in config.schemes
        for token in methods
    ]
    rows = _run_tasks(_ber_task, tasks, args.jobs)
    failed = any(row[6] is not None and row[3] is None for row in rows)
    return _BER_HEADER, rows, failed


def _run_mc(config: RunConfig, args):
    return _run_ber_sweep(config, args, method_filter="mc")


# =====================================================================
# Subcommand: geom-sweep
# =====================================================================

_GEOM_HEADER = ("theta_r_deg", "e", "r", "alpha1", "beta1", "alpha2", "beta2",
                "omega_r", "snr_db", "scheme", "ber", "note")


def _geom_task(task):
    (config, theta_r, cn2, scheme, token, seed) = task
    geo = config.geometry
    theta_deg = math.degrees(theta_r)
    ecc = geo.ellipse_e
    try:
        if geo.mode == "ellipse":
            geometry = ellipse_configuration(
                ecc, geo.baseline, theta_r,
                beam_t=geo.beta_t, beam_r=geo.beta_r, aperture=geo.aperture,
            )
        else:
            geometry = LinkGeometry(
                theta_t=geo.theta_t, beta_t=geo.beta_t, theta_r=theta_r,
                beta_r=geo.beta_r, baseline_r=geo.baseline,
                aperture_a_r=geo.aperture,
            )
        r1, r2, _ = derive_common_volume(geometry)
    except (NoIntersectionError, ValueError) as exc:
        return (theta_deg, ecc, geo.baseline, None, None, None, None, None,
                None, scheme.kind, None, f"skipped: {exc}")

    try:
        power_v = omega_v(geometry, config.atmosphere, config.tx_power)
        gain = e2_gain(config.atmosphere, r2, geometry.aperture_a_r)
        if cn2 > 0.0:
            channel = _scenario_channel(config, cn2, geometry)
            received = channel.omega_r
        else:
            channel = None
            received = power_v * gain
        if config.snr_mode == "budget":
            snr = _budget_snr(config, received)
        else:
            snr = 10.0 ** (0.1 * config.snr_grid_db[0])
        if channel is None:
            # no turbulence: the irradiance is deterministic at its mean
            ber = float(conditional_error(scheme, snr))
            return (theta_deg, ecc, geo.baseline, None, None, None, None,
                    received, 10.0 * math.log10(snr), scheme.kind, ber, None)
        result = _scheme_rate(channel, snr, scheme, token, seed, 1, 2)
        return (theta_deg, ecc, geo.baseline, channel.alpha1, channel.beta1,
                channel.link2_alpha, channel.link2_beta, channel.omega_r,
                10.0 * math.log10(snr), scheme.kind, result.probability, None)
    except _NUMERIC_ERRORS as exc:
        return (theta_deg, ecc, geo.baseline, None, None, None, None, None,
                None, scheme.kind, None, str(exc))


def _run_geom_sweep(config: RunConfig, args):
    _require_schemes(config)
    geo = config.geometry
    if geo.mode == "fixed":
        raise ConfigError("geom-sweep needs an ellipse or receiver-elevation sweep")
    nonzero = [c for c in config.cn2_list if c > 0.0]
    if len(nonzero) > 1:
        raise ConfigError("geom-sweep takes at most one nonzero cn2 value")
    if config.snr_mode == "grid" and len(config.snr_grid_db) != 1:
        raise ConfigError("geom-sweep needs a single fixed SNR or link-budget mode")
    token = next((t for t in config.methods if not t.startswith("mc")), "meijer")
    tasks = [
        (config, theta_r, cn2, scheme, token, args.seed)
        for theta_r in geo.theta_r_grid
        for cn2 in config.cn2_list
        for scheme in config.schemes
    ]
    rows = _run_tasks(_geom_task, tasks, args.jobs)
    failed = any(row[11] is not None and not str(row[11]).startswith("skipped")
                 for row in rows)
    return _GEOM_HEADER, rows, failed


# =====================================================================
# Subcommand: penalty
# =====================================================================

_PENALTY_HEADER = ("scheme_pair", "target_ber", "bisection_db",
                   "closed_form_db", "error")


def _run_penalty(config: RunConfig, args):
    if not config.penalty_pairs:
        raise ConfigError("missing [penalty] pairs list")
    if config.penalty_target is None:
        raise ConfigError("missing [penalty] target_ber")
    cn2 = _single_cn2(config)
    channel = _scenario_channel(config, cn2, config.geometry.fixed_link())
    rows = []
    failed = False
    for scheme_a, scheme_b in config.penalty_pairs:
        label = f"{scheme_a.kind}-{scheme_b.kind}"
        try:
            result = snr_penalty(channel, scheme_a, scheme_b, config.penalty_target)
            rows.append((label, config.penalty_target, result.bisection_db,
                         result.closed_form_db, None))
        except _NUMERIC_ERRORS as exc:
            rows.append((label, config.penalty_target, None, None, str(exc)))
            failed = True
    return _PENALTY_HEADER, rows, failed


# =====================================================================
# Entry point
# =====================================================================

_SUBCOMMANDS = {
    "channel": _run_channel,
    "pdf": _run_pdf,
    "ber-sweep": _run_ber_sweep,
    "geom-sweep": _run_geom_sweep,
    "penalty": _run_penalty,
    "mc": _run_mc,
}


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="uvscatter",
        description="NLOS ultraviolet scattering channel sweeps",
    )
    parser.add_argument("subcommand", choices=sorted(_SUBCOMMANDS))
    parser.add_argument("--config", required=True, help="scenario file path")
    parser.add_argument("--out", default=None, help="CSV output path (default stdout)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")
    parser.add_argument("--seed", type=int, default=12345,
                        help="Monte-Carlo master seed")
    parser.add_argument("--format", choices=("csv", "svg"), default="csv",
                        help="svg also renders a plot beside the CSV")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if args.seed < 0:
            raise ConfigError("--seed must be >= 0")
        if args.format == "svg" and args.out is None:
            raise ConfigError("--format svg needs --out to place the files")
        config = load_config(args.config)
        out_path = args.out if args.out is not None else config.out_path
        header, rows, failed = _SUBCOMMANDS[args.subcommand](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3

    write_csv(out_path, header, rows)
    if args.format == "svg":
        import os.path

        stem, _ = os.path.splitext(out_path)
        render_svg(stem + ".svg", args.subcommand, header, rows, salt=config.name)
    return 3 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
