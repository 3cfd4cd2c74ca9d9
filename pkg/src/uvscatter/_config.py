"""Scenario configuration parsing for the command-line front end.

Flat ``key = value`` text under ``[section]`` headers.  Dimensioned values
take a unit suffix separated by whitespace (``30 deg``, ``0.802 /km``,
``260 nm``); angles always require one, everything else defaults to SI
base units.  Every key is validated against the known vocabulary before
any computation starts, and violations raise :class:`ConfigError`.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .geometry import Atmosphere, LinkGeometry
from .modem import ModulationScheme

__all__ = ["GeometryConfig", "RunConfig", "load_config"]

_ANGLE_UNITS = {"deg": math.pi / 180.0, "rad": 1.0, "mrad": 1e-3}
_PER_LENGTH_UNITS = {"/km": 1e-3, "/m": 1.0}
_LENGTH_UNITS = {"m": 1.0, "km": 1e3, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_AREA_UNITS = {"m2": 1.0, "cm2": 1e-4}
_POWER_UNITS = {"w": 1.0, "mw": 1e-3, "uw": 1e-6}

_KNOWN_KEYS = {
    "scenario": {"name"},
    "atmosphere": {"k_a", "k_r", "k_m", "gamma_ray", "g_asym", "f_mie"},
    "geometry": {
        "theta_t", "beta_t", "theta_r", "beta_r", "r", "aperture",
        "e", "theta_r_start", "theta_r_stop", "theta_r_step",
    },
    "turbulence": {"cn2", "wavelength"},
    "modulation": {"schemes"},
    "snr": {
        "start_db", "stop_db", "step_db",
        "tx_power", "filter_eta", "detector_eta", "bit_rate",
    },
    "methods": {"list"},
    "pdf": {"i_start", "i_stop", "points", "terms"},
    "penalty": {"pairs", "target_ber"},
    "mc": {"streams", "bins"},
    "output": {"path"},
}

_METHOD_NAMES = ("meijer", "series", "quadrature", "mc", "asymptotic")


@dataclass(frozen=True)
class GeometryConfig:
    """Geometry block in one of three modes.

    ``fixed`` pins both elevations; ``ellipse`` sweeps the receiver
    elevation with the common volume held on an ellipse of eccentricity
    ``ellipse_e``; ``theta_sweep`` sweeps the receiver elevation at fixed
    transmitter elevation.
    """

    mode: str
    beta_t: float
    beta_r: float
    baseline: float
    aperture: float
    theta_t: Optional[float] = None
    theta_r: Optional[float] = None
    ellipse_e: Optional[float] = None
    theta_r_grid: tuple = ()

    def fixed_link(self) -> LinkGeometry:
        if self.mode != "fixed":
            raise ConfigError(f"subcommand needs a fixed geometry, got {self.mode} mode")
        return LinkGeometry(
            theta_t=self.theta_t, beta_t=self.beta_t,
            theta_r=self.theta_r, beta_r=self.beta_r,
            baseline_r=self.baseline, aperture_a_r=self.aperture,
        )


@dataclass(frozen=True)
class RunConfig:
    """Fully validated scenario description."""

    name: str
    atmosphere: Atmosphere
    cn2_list: tuple
    wavelength: float
    geometry: GeometryConfig
    schemes: tuple
    snr_mode: str                 # 'grid' or 'budget'
    snr_grid_db: tuple
    tx_power: float
    filter_eta: Optional[float]
    detector_eta: Optional[float]
    bit_rate: Optional[float]
    methods: tuple
    pdf_i_start: float
    pdf_i_stop: float
    pdf_points: int
    pdf_terms: int
    penalty_pairs: tuple
    penalty_target: Optional[float]
    mc_streams: int
    mc_bins: int
    out_path: Optional[str]


def _parse_quantity(text: str, units: dict, key: str, *,
                    require_unit: bool = False) -> float:
    parts = text.split()
    if len(parts) == 1:
        if require_unit:
            raise ConfigError(f"{key}: angle values need a unit suffix (deg, rad, mrad)")
        try:
            return float(parts[0])
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse number {parts[0]!r}") from exc
    if len(parts) == 2:
        value, suffix = parts
        factor = units.get(suffix.lower())
        if factor is None:
            raise ConfigError(
                f"{key}: unknown unit {suffix!r}; expected one of {sorted(units)}"
            )
        try:
            return float(value) * factor
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse number {value!r}") from exc
    raise ConfigError(f"{key}: malformed value {text!r}")


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse number {text!r}") from exc


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse integer {text!r}") from exc


def _get(section, key, default=None):
    if section is None:
        return default
    return section.get(key, default)


def _parse_methods(raw: str) -> tuple:
    tokens = []
    for token in (t.strip() for t in raw.split(",")):
        if not token:
            continue
        name, _, param = token.partition(":")
        if name not in _METHOD_NAMES:
            raise ConfigError(
                f"methods: unknown method {name!r}; expected one of {_METHOD_NAMES}"
            )
        if name in ("series", "mc"):
            if param and _parse_int(param, f"methods:{name}") < 1:
                raise ConfigError(f"methods: {token!r} needs a positive count")
        elif name == "asymptotic":
            if param not in ("", "1", "2"):
                raise ConfigError("methods: asymptotic takes term count 1 or 2")
        elif param:
            raise ConfigError(f"methods: {name} takes no parameter, got {token!r}")
        tokens.append(token)
    if not tokens:
        raise ConfigError("methods: list is empty")
    return tuple(tokens)


def _parse_geometry(section) -> GeometryConfig:
    if section is None:
        raise ConfigError("missing [geometry] section")
    if "r" not in section:
        raise ConfigError("geometry: baseline key 'r' is required")
    baseline = _parse_quantity(section["r"], _LENGTH_UNITS, "geometry.r")
    beta_t = (
        _parse_quantity(section["beta_t"], _ANGLE_UNITS, "geometry.beta_t",
                        require_unit=True)
        if "beta_t" in section else 8e-3
    )
    beta_r = (
        _parse_quantity(section["beta_r"], _ANGLE_UNITS, "geometry.beta_r",
                        require_unit=True)
        if "beta_r" in section else math.radians(20.0)
    )
    aperture = (
        _parse_quantity(section["aperture"], _AREA_UNITS, "geometry.aperture")
        if "aperture" in section else 1.77e-4
    )

    def angle(key):
        return _parse_quantity(section[key], _ANGLE_UNITS, f"geometry.{key}",
                               require_unit=True)

    sweep_keys = [k for k in ("theta_r_start", "theta_r_stop", "theta_r_step")
                  if k in section]
    if sweep_keys and len(sweep_keys) != 3:
        raise ConfigError("geometry: sweep needs all of theta_r_start/stop/step")

    grid = ()
    if sweep_keys:
        start, stop, step = (angle(k) for k in
                             ("theta_r_start", "theta_r_stop", "theta_r_step"))
        if step <= 0.0:
            raise ConfigError("geometry.theta_r_step must be positive")
        values, point = [], start
        while point <= stop + 1e-12:
            values.append(point)
            point += step
        grid = tuple(values)

    if "e" in section:
        ecc = _parse_float(section["e"], "geometry.e")
        if not 0.0 < ecc < 1.0:
            raise ConfigError(f"geometry.e must lie in (0, 1), got {ecc}")
        if not grid:
            if "theta_r" not in section:
                raise ConfigError("ellipse geometry needs theta_r or a sweep range")
            grid = (angle("theta_r"),)
        return GeometryConfig(
            mode="ellipse", beta_t=beta_t, beta_r=beta_r, baseline=baseline,
            aperture=aperture, ellipse_e=ecc, theta_r_grid=grid,
        )
    if grid:
        if "theta_t" not in section:
            raise ConfigError("receiver-elevation sweep needs theta_t")
        return GeometryConfig(
            mode="theta_sweep", beta_t=beta_t, beta_r=beta_r, baseline=baseline,
            aperture=aperture, theta_t=angle("theta_t"), theta_r_grid=grid,
        )
    for key in ("theta_t", "theta_r"):
        if key not in section:
            raise ConfigError(f"fixed geometry needs {key}")
    return GeometryConfig(
        mode="fixed", beta_t=beta_t, beta_r=beta_r, baseline=baseline,
        aperture=aperture, theta_t=angle("theta_t"), theta_r=angle("theta_r"),
    )


def load_config(path: str) -> RunConfig:
    """Parse and validate a scenario file; raises ConfigError on any defect."""
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",)
    )
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    def sec(name):
        return parser[name] if parser.has_section(name) else None

    scenario = sec("scenario")
    name = _get(scenario, "name", "unnamed")

    atm_sec = sec("atmosphere")
    if atm_sec is None:
        raise ConfigError("missing [atmosphere] section")
    for key in _KNOWN_KEYS["atmosphere"]:
        if key not in atm_sec:
            raise ConfigError(f"atmosphere: missing key {key!r}")
    try:
        atmosphere = Atmosphere(
            k_a=_parse_quantity(atm_sec["k_a"], _PER_LENGTH_UNITS, "atmosphere.k_a"),
            k_r=_parse_quantity(atm_sec["k_r"], _PER_LENGTH_UNITS, "atmosphere.k_r"),
            k_m=_parse_quantity(atm_sec["k_m"], _PER_LENGTH_UNITS, "atmosphere.k_m"),
            gamma_ray=_parse_float(atm_sec["gamma_ray"], "atmosphere.gamma_ray"),
            g_asym=_parse_float(atm_sec["g_asym"], "atmosphere.g_asym"),
            f_mie=_parse_float(atm_sec["f_mie"], "atmosphere.f_mie"),
        )
    except ValueError as exc:
        raise ConfigError(f"atmosphere: {exc}") from exc

    turb = sec("turbulence")
    if turb is None or "cn2" not in turb or "wavelength" not in turb:
        raise ConfigError("missing [turbulence] section with cn2 and wavelength")
    cn2_list = tuple(
        _parse_float(tok.strip(), "turbulence.cn2")
        for tok in turb["cn2"].split(",") if tok.strip()
    )
    if not cn2_list:
        raise ConfigError("turbulence.cn2 list is empty")
    if any(c < 0.0 for c in cn2_list):
        raise ConfigError("turbulence.cn2 values must be >= 0")
    wavelength = _parse_quantity(turb["wavelength"], _LENGTH_UNITS,
                                 "turbulence.wavelength")
    if wavelength <= 0.0:
        raise ConfigError("turbulence.wavelength must be positive")

    geometry = _parse_geometry(sec("geometry"))

    schemes = ()
    mod = sec("modulation")
    if mod is not None and "schemes" in mod:
        parsed = []
        for token in (t.strip() for t in mod["schemes"].split(",")):
            if not token:
                continue
            try:
                parsed.append(ModulationScheme.from_name(token))
            except ValueError as exc:
                raise ConfigError(f"modulation: {exc}") from exc
        schemes = tuple(parsed)

    snr = sec("snr")
    grid_keys = [k for k in ("start_db", "stop_db", "step_db")
                 if snr is not None and k in snr]
    budget_keys = [k for k in ("filter_eta", "detector_eta", "bit_rate")
                   if snr is not None and k in snr]
    if grid_keys and budget_keys:
        raise ConfigError("snr: grid keys and link-budget keys are mutually exclusive")
    snr_mode = "budget" if budget_keys else "grid"
    snr_grid_db = ()
    filter_eta = detector_eta = bit_rate = None
    tx_power = 1.0
    if snr is not None and "tx_power" in snr:
        tx_power = _parse_quantity(snr["tx_power"], _POWER_UNITS, "snr.tx_power")
        if tx_power <= 0.0:
            raise ConfigError("snr.tx_power must be positive")
    if snr_mode == "budget":
        for key in ("filter_eta", "detector_eta", "bit_rate"):
            if key not in snr:
                raise ConfigError(f"snr: link-budget mode needs {key}")
        filter_eta = _parse_float(snr["filter_eta"], "snr.filter_eta")
        detector_eta = _parse_float(snr["detector_eta"], "snr.detector_eta")
        bit_rate = _parse_float(snr["bit_rate"], "snr.bit_rate")
        if min(filter_eta, detector_eta, bit_rate) <= 0.0:
            raise ConfigError("snr: link-budget values must be positive")
    elif grid_keys:
        if "start_db" not in grid_keys or "stop_db" not in grid_keys:
            raise ConfigError("snr: grid needs start_db and stop_db")
        start = _parse_float(snr["start_db"], "snr.start_db")
        stop = _parse_float(snr["stop_db"], "snr.stop_db")
        step = _parse_float(snr["step_db"], "snr.step_db") if "step_db" in snr else 1.0
        if step <= 0.0:
            raise ConfigError("snr.step_db must be positive")
        values, point = [], start
        while point <= stop + 1e-9:
            values.append(point)
            point += step
        snr_grid_db = tuple(values)

    methods = ("meijer",)
    met = sec("methods")
    if met is not None and "list" in met:
        methods = _parse_methods(met["list"])

    pdf = sec("pdf")
    pdf_i_start = _parse_float(_get(pdf, "i_start", "1e-3"), "pdf.i_start")
    pdf_i_stop = _parse_float(_get(pdf, "i_stop", "10"), "pdf.i_stop")
    pdf_points = _parse_int(_get(pdf, "points", "20"), "pdf.points")
    pdf_terms = _parse_int(_get(pdf, "terms", "60"), "pdf.terms")
    if not 0.0 < pdf_i_start < pdf_i_stop:
        raise ConfigError("pdf: need 0 < i_start < i_stop")
    if pdf_points < 1:
        raise ConfigError("pdf.points must be >= 1")
    if pdf_terms < 0:
        raise ConfigError("pdf.terms must be >= 0")

    penalty_pairs = ()
    penalty_target = None
    pen = sec("penalty")
    if pen is not None:
        if "pairs" in pen:
            pairs = []
            for token in (t.strip() for t in pen["pairs"].split(",")):
                if not token:
                    continue
                names = token.split("-")
                if len(names) != 2:
                    raise ConfigError(
                        f"penalty: pair {token!r} must look like BPSK-DPSK"
                    )
                try:
                    pairs.append((ModulationScheme.from_name(names[0]),
                                  ModulationScheme.from_name(names[1])))
                except ValueError as exc:
                    raise ConfigError(f"penalty: {exc}") from exc
            penalty_pairs = tuple(pairs)
        if "target_ber" in pen:
            penalty_target = _parse_float(pen["target_ber"], "penalty.target_ber")
            if not 0.0 < penalty_target < 0.5:
                raise ConfigError(
                    f"penalty.target_ber must lie in (0, 0.5), got {penalty_target}"
                )

    mc = sec("mc")
    mc_streams = _parse_int(_get(mc, "streams", "4"), "mc.streams")
    mc_bins = _parse_int(_get(mc, "bins", "50"), "mc.bins")
    if mc_streams < 1 or mc_bins < 2:
        raise ConfigError("mc: streams must be >= 1 and bins >= 2")

    out = sec("output")
    out_path = _get(out, "path")

    return RunConfig(
        name=name,
        atmosphere=atmosphere,
        cn2_list=cn2_list,
        wavelength=wavelength,
        geometry=geometry,
        schemes=schemes,
        snr_mode=snr_mode,
        snr_grid_db=snr_grid_db,
        tx_power=tx_power,
        filter_eta=filter_eta,
        detector_eta=detector_eta,
        bit_rate=bit_rate,
        methods=methods,
        pdf_i_start=pdf_i_start,
        pdf_i_stop=pdf_i_stop,
        pdf_points=pdf_points,
        pdf_terms=pdf_terms,
        penalty_pairs=penalty_pairs,
        penalty_target=penalty_target,
        mc_streams=mc_streams,
        mc_bins=mc_bins,
        out_path=out_path,
    )
