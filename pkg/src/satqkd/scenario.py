"""Scenario files, sweep orchestration and result-table I/O.

A scenario file is INI-style text with three sections::

    [scenario]
    mode = cv-rr        # cv-rr | cv-dr-m1 | cv-dr-m2 | dv-sps | dv-wcp
                        #   | lidar-profile | lidar-elevation

    [sweep]
    variable = eta_ae   # the x axis; must be a parameter of the mode
    start = 1e-4
    stop = 1.0
    points = 61         # >= 2
    scale = log         # linear (default) | log

    [params]            # everything the sweep holds fixed
    t_eq = 1e-3
    xi = 0.1

Recognised ``[params]`` keys, with defaults in brackets ("req" = must be
given here or swept):

``cv-rr`` / ``cv-dr-m1``
    eta_ae (req), t_eq (req), xi (req), eta_d [1], nu_el [0], v [engine
    default], beta [1], v_s [1].  Giving or sweeping ``eta_s`` / ``eta_t``
    evaluates that fixed bypass hypothesis instead of the worst case, in
    which case both must be resolvable; otherwise the rate is minimised
    over the bypass and ``grid_points`` [101] / ``refine`` [true] tune the
    search.
``cv-dr-m2``
    eta_ae (req), t_eq (req), xi (req), eta_d [1], nu_el [0], v [engine
    default], beta [1].
``dv-sps`` / ``dv-wcp``
    eta_ch, eta_d, p_dc, e_d, f, q, eta_ae (all req); ``dv-wcp`` also takes
    mu — when absent and not swept, the intensity is optimised per point
    and reported in a ``mu_opt`` column.
``lidar-profile``  (sweep variable: z, metres from the satellite)
    total_range [5e5], r_a [0.15], r_b [0.5], waist [0.15], wavelength
    [8e-7], quality [3], bound_source [dual-lidar].  With ``dual-lidar``:
    power_sat [1], power_ground [1], reflectivity [0.1], loss_factor
    [0.25], noise_floor_sat / noise_floor_ground [computed from the
    apertures].  With ``radar-ground``: radar_power [1e5],
    radar_antenna_radius [2], radar_wavelength [0.04], radar_bandwidth
    [2.5e6], radar_noise_figure_db [8], radar_loss_db [7],
    radar_aperture_efficiency [0.6], radar_antenna_temp [60].
``lidar-elevation``  (sweep variable: zenith_deg, in [0, 90))
    altitude [5e5] plus the dual-lidar keys above, and profile_points
    [201], extinction_coefficient [0.7], detection_efficiency [0.5],
    optics_transmittance [0.8].

Tables are emitted as CSV or TSV: a ``#``-prefixed metadata block (sorted
keys), a header row, then one row per sweep point with floats in
full-precision scientific notation.  Cells of infeasible points are left
empty and flagged by a ``feasible`` sentinel column.  Metadata that varies
run to run (wall time, thread count) is kept on the in-memory table but
never written, so identical scenario files emit byte-identical output at
any worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from configparser import ConfigParser, Error as _ConfigParserError
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cv import (
    _DEFAULT_V,
    ChannelObservation,
    CvScenario,
    InfeasibleAttackError,
    holevo_bound,
    holevo_dr_m2_bound,
    mutual_info,
    worst_case_rate,
)
from .dv import DvParams, optimize_mu, rate_at
from .lidar import (
    BeamParams,
    LidarConfig,
    LinkGeometry,
    RadarParams,
    aperture_transmittance,
    beam_width,
    elevation_sweep,
    focused_beam_width,
    lidar_size_bound,
    moonlight_background_power,
    radar_size_bound,
    reflectivity_threshold,
    sky_background_power,
)

MODES = ("cv-rr", "cv-dr-m1", "cv-dr-m2", "dv-sps", "dv-wcp",
         "lidar-profile", "lidar-elevation")

#: metadata keys that legitimately differ between runs of the same file;
#: emit() skips them so output bytes depend on the scenario alone.
VOLATILE_METADATA = ("wall_time_s", "threads")


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate.

    The message names the offending section or key, so the fix is one edit
    away.  The CLI maps this to exit code 1.
    """


# ---------------------------------------------------------------------------
# Parsed scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop),
                               self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ScenarioSpec:
    """A fully validated scenario: mode, sweep and resolved parameters."""

    mode: str
    sweep: SweepSpec
    params: dict
    path: str = ""


@dataclass
class ResultTable:
    columns: "tuple[str, ...]"
    rows: "list[tuple]"
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Low-level value parsing
# ---------------------------------------------------------------------------

def _float(raw: str, where: str) -> float:
    try:
        val = float(raw)
    except ValueError:
        raise ScenarioError(f"{where}: expected a number, got {raw!r}") from None
    if math.isnan(val):
        raise ScenarioError(f"{where}: NaN is not a valid parameter value")
    return val


def _int(raw: str, where: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"{where}: expected an integer, got {raw!r}") from None


def _bool(raw: str, where: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ScenarioError(f"{where}: expected true/false, got {raw!r}")


def _str(raw: str, where: str) -> str:
    return raw.strip()


_REQUIRED = object()  # sentinel default: the key must be supplied or swept


def _resolve_keys(keyspec: dict, raw: dict, sweep_var: str, mode: str) -> dict:
    """Apply a ``{key: (parser, default)}`` table to the raw [params] strings."""
    unknown = sorted(set(raw) - set(keyspec))
    if unknown:
        raise ScenarioError(
            f"[params] keys not recognised for mode {mode}: {', '.join(unknown)}")
    if sweep_var in raw:
        raise ScenarioError(
            f"sweep variable {sweep_var!r} may not also be fixed in [params]")
    out = {}
    for key, (parse, default) in keyspec.items():
        if key == sweep_var:
            continue  # supplied per point by the sweep
        if key in raw:
            out[key] = parse(raw[key], f"[params] {key}")
        elif default is _REQUIRED:
            raise ScenarioError(
                f"mode {mode} requires [params] key {key!r} (or sweep it)")
        else:
            out[key] = default
    return out


def _check_sweepable(sweep_var: str, allowed: "tuple[str, ...]", mode: str) -> None:
    if sweep_var not in allowed:
        raise ScenarioError(
            f"{sweep_var!r} is not a sweepable parameter of mode {mode}; "
            f"choose one of: {', '.join(allowed)}")


# ---------------------------------------------------------------------------
# Per-mode key tables and validation
# ---------------------------------------------------------------------------

_CV_OBS_KEYS = {
    "t_eq": (_float, _REQUIRED),
    "xi": (_float, _REQUIRED),
    "eta_d": (_float, 1.0),
    "nu_el": (_float, 0.0),
}

_CV_SOURCE_KEYS = {
    "eta_ae": (_float, _REQUIRED),
    "v": (_float, None),  # None -> engine default for the mode
    "beta": (_float, 1.0),
}


def _resolve_cv(mode: str, sweep: SweepSpec, raw: dict) -> dict:
    engine_mode = mode[3:]  # "cv-rr" -> "rr"
    if engine_mode == "dr-m2":
        keyspec = {**_CV_OBS_KEYS, **_CV_SOURCE_KEYS}
        _check_sweepable(sweep.variable,
                         ("eta_ae", "t_eq", "xi", "eta_d", "nu_el", "v", "beta"),
                         mode)
        params = _resolve_keys(keyspec, raw, sweep.variable, mode)
    else:
        fixed_point = ("eta_s" in raw or "eta_t" in raw
                       or sweep.variable in ("eta_s", "eta_t"))
        keyspec = {**_CV_OBS_KEYS, **_CV_SOURCE_KEYS, "v_s": (_float, 1.0)}
        if fixed_point:
            keyspec.update(eta_s=(_float, _REQUIRED), eta_t=(_float, _REQUIRED))
            sweepable = ("eta_ae", "t_eq", "xi", "eta_d", "nu_el", "v", "beta",
                         "v_s", "eta_s", "eta_t")
        else:
            keyspec.update(grid_points=(_int, 101), refine=(_bool, True))
            sweepable = ("eta_ae", "t_eq", "xi", "eta_d", "nu_el", "v", "beta",
                         "v_s")
        _check_sweepable(sweep.variable, sweepable, mode)
        params = _resolve_keys(keyspec, raw, sweep.variable, mode)
        if not fixed_point and params["grid_points"] < 2:
            raise ScenarioError(
                f"[params] grid_points must be >= 2, got {params['grid_points']}")
    if params.get("v") is None:
        params["v"] = _DEFAULT_V[engine_mode]
    return params


def _probe_cv(mode: str, p: dict) -> None:
    ChannelObservation(t_eq=p["t_eq"], xi=p["xi"], eta_d=p["eta_d"],
                       nu_el=p["nu_el"])
    CvScenario(eta_ae=p["eta_ae"], eta_s=p.get("eta_s", 0.0),
               eta_t=p.get("eta_t", 1.0), v=p["v"], beta=p["beta"],
               v_s=p.get("v_s", 1.0))


_DV_KEYS = {
    "eta_ch": (_float, _REQUIRED),
    "eta_d": (_float, _REQUIRED),
    "p_dc": (_float, _REQUIRED),
    "e_d": (_float, _REQUIRED),
    "f": (_float, _REQUIRED),
    "q": (_float, _REQUIRED),
    "eta_ae": (_float, _REQUIRED),
}


def _resolve_dv(mode: str, sweep: SweepSpec, raw: dict) -> dict:
    keyspec = dict(_DV_KEYS)
    sweepable = tuple(_DV_KEYS)
    if mode == "dv-wcp":
        keyspec["mu"] = (_float, None)  # None -> optimise per point
        sweepable += ("mu",)
    _check_sweepable(sweep.variable, sweepable, mode)
    params = _resolve_keys(keyspec, raw, sweep.variable, mode)
    if mode == "dv-wcp" and params.get("mu") is None:
        del params["mu"]
    return params


def _probe_dv(mode: str, p: dict) -> None:
    DvParams(source="wcp" if mode == "dv-wcp" else "sps",
             eta_ch=p["eta_ch"], eta_d=p["eta_d"], p_dc=p["p_dc"],
             e_d=p["e_d"], f=p["f"], q=p["q"], eta_ae=p["eta_ae"],
             mu=p.get("mu", 1.0))


_BEAM_KEYS = {
    "waist": (_float, 0.15),
    "wavelength": (_float, 800e-9),
    "quality": (_float, 3.0),
}

_DUAL_LIDAR_KEYS = {
    "power_sat": (_float, 1.0),
    "power_ground": (_float, 1.0),
    "reflectivity": (_float, 0.1),
    "loss_factor": (_float, 0.25),
    "noise_floor_sat": (_float, None),     # None -> moonlight background
    "noise_floor_ground": (_float, None),  # None -> night-sky background
}

_RADAR_KEYS = {
    "radar_power": (_float, 1e5),
    "radar_antenna_radius": (_float, 2.0),
    "radar_wavelength": (_float, 0.04),
    "radar_bandwidth": (_float, 2.5e6),
    "radar_noise_figure_db": (_float, 8.0),
    "radar_loss_db": (_float, 7.0),
    "radar_aperture_efficiency": (_float, 0.6),
    "radar_antenna_temp": (_float, 60.0),
}


def _fill_noise_floors(params: dict) -> None:
    if params.get("noise_floor_sat") is None:
        params["noise_floor_sat"] = moonlight_background_power(params["r_a"])
    if params.get("noise_floor_ground") is None:
        params["noise_floor_ground"] = sky_background_power(params["r_b"])


def _resolve_lidar_profile(mode: str, sweep: SweepSpec, raw: dict) -> dict:
    _check_sweepable(sweep.variable, ("z",), mode)
    source = _str(raw.get("bound_source", "dual-lidar"), "[params] bound_source")
    if source not in ("dual-lidar", "radar-ground"):
        raise ScenarioError(
            f"[params] bound_source must be 'dual-lidar' or 'radar-ground', "
            f"got {source!r}")
    keyspec = {
        "total_range": (_float, 500e3),
        "r_a": (_float, 0.15),
        "r_b": (_float, 0.5),
        "bound_source": (_str, source),
        **_BEAM_KEYS,
        **(_DUAL_LIDAR_KEYS if source == "dual-lidar" else _RADAR_KEYS),
    }
    params = _resolve_keys(keyspec, raw, sweep.variable, mode)
    if source == "dual-lidar":
        _fill_noise_floors(params)
    if not 0.0 <= min(sweep.start, sweep.stop) \
            or not max(sweep.start, sweep.stop) <= params["total_range"]:
        raise ScenarioError(
            "[sweep] z must stay within [0, total_range] "
            f"= [0, {params['total_range']}]")
    return params


def _resolve_lidar_elevation(mode: str, sweep: SweepSpec, raw: dict) -> dict:
    _check_sweepable(sweep.variable, ("zenith_deg",), mode)
    keyspec = {
        "altitude": (_float, 500e3),
        "r_a": (_float, 0.15),
        "r_b": (_float, 0.5),
        **_BEAM_KEYS,
        **_DUAL_LIDAR_KEYS,
        "profile_points": (_int, 201),
        "extinction_coefficient": (_float, 0.7),
        "detection_efficiency": (_float, 0.5),
        "optics_transmittance": (_float, 0.8),
    }
    params = _resolve_keys(keyspec, raw, sweep.variable, mode)
    _fill_noise_floors(params)
    if not (0.0 <= sweep.start < 90.0 and 0.0 <= sweep.stop < 90.0):
        raise ScenarioError("[sweep] zenith_deg must stay within [0, 90)")
    if params["profile_points"] < 2:
        raise ScenarioError(
            f"[params] profile_points must be >= 2, got {params['profile_points']}")
    return params


def _positive(p: dict, key: str) -> None:
    if not p[key] > 0.0:
        raise ScenarioError(f"[params] {key} must be > 0, got {p[key]}")


def _probe_lidar(mode: str, p: dict) -> None:
    for key in ("r_a", "r_b", "waist", "wavelength"):
        _positive(p, key)
    if p["quality"] < 1.0:
        raise ScenarioError(f"[params] quality must be >= 1, got {p['quality']}")
    if mode == "lidar-profile":
        _positive(p, "total_range")
        extra = (("power_sat", "power_ground", "reflectivity", "loss_factor",
                  "noise_floor_sat", "noise_floor_ground")
                 if p["bound_source"] == "dual-lidar" else
                 ("radar_power", "radar_antenna_radius", "radar_wavelength",
                  "radar_bandwidth", "radar_aperture_efficiency",
                  "radar_antenna_temp"))
    else:
        _positive(p, "altitude")
        extra = ("power_sat", "power_ground", "reflectivity", "loss_factor",
                 "noise_floor_sat", "noise_floor_ground")
        for key in ("detection_efficiency", "optics_transmittance"):
            if not 0.0 < p[key] <= 1.0:
                raise ScenarioError(f"[params] {key} must lie in (0, 1], got {p[key]}")
        if p["extinction_coefficient"] < 0.0:
            raise ScenarioError("[params] extinction_coefficient must be >= 0, "
                                f"got {p['extinction_coefficient']}")
    for key in extra:
        _positive(p, key)
    if "reflectivity" in p and p["reflectivity"] > 1.0:
        raise ScenarioError(f"[params] reflectivity must be <= 1, got {p['reflectivity']}")


_RESOLVERS = {
    "cv-rr": _resolve_cv,
    "cv-dr-m1": _resolve_cv,
    "cv-dr-m2": _resolve_cv,
    "dv-sps": _resolve_dv,
    "dv-wcp": _resolve_dv,
    "lidar-profile": _resolve_lidar_profile,
    "lidar-elevation": _resolve_lidar_elevation,
}

_PROBES = {
    "cv-rr": _probe_cv,
    "cv-dr-m1": _probe_cv,
    "cv-dr-m2": _probe_cv,
    "dv-sps": _probe_dv,
    "dv-wcp": _probe_dv,
    "lidar-profile": _probe_lidar,
    "lidar-elevation": _probe_lidar,
}


# ---------------------------------------------------------------------------
# File loading
# ---------------------------------------------------------------------------

def load_scenario(path: str) -> ScenarioSpec:
    """Parse and validate a scenario file.

    Raises :class:`ScenarioError` on syntax or validation problems and lets
    :class:`OSError` escape for unreadable paths.  Engine invariants are
    probed at both sweep endpoints, so range mistakes surface here rather
    than mid-run.
    """
    parser = ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    with open(path, encoding="utf-8") as fh:
        try:
            parser.read_file(fh, source=path)
        except _ConfigParserError as exc:
            raise ScenarioError(f"cannot parse {path}: {exc}") from exc

    unknown = sorted(set(parser.sections()) - {"scenario", "sweep", "params"})
    if unknown:
        raise ScenarioError(f"unknown sections: {', '.join(unknown)} "
                            "(expected [scenario], [sweep], [params])")
    for section in ("scenario", "sweep"):
        if not parser.has_section(section):
            raise ScenarioError(f"missing required section [{section}]")

    scn = dict(parser.items("scenario"))
    mode = _str(scn.pop("mode", ""), "[scenario] mode")
    if scn:
        raise ScenarioError(
            f"unknown [scenario] keys: {', '.join(sorted(scn))} (only 'mode')")
    if mode not in MODES:
        raise ScenarioError(
            f"[scenario] mode must be one of {', '.join(MODES)}; got {mode!r}")

    sw = dict(parser.items("sweep"))
    extra = sorted(set(sw) - {"variable", "start", "stop", "points", "scale"})
    if extra:
        raise ScenarioError(f"unknown [sweep] keys: {', '.join(extra)}")
    for key in ("variable", "start", "stop", "points"):
        if key not in sw:
            raise ScenarioError(f"[sweep] is missing required key {key!r}")
    sweep = SweepSpec(variable=_str(sw["variable"], "[sweep] variable"),
                      start=_float(sw["start"], "[sweep] start"),
                      stop=_float(sw["stop"], "[sweep] stop"),
                      points=_int(sw["points"], "[sweep] points"),
                      scale=_str(sw.get("scale", "linear"), "[sweep] scale"))
    if sweep.points < 2:
        raise ScenarioError(f"[sweep] points must be >= 2, got {sweep.points}")
    if sweep.scale not in ("linear", "log"):
        raise ScenarioError(f"[sweep] scale must be linear or log, got {sweep.scale!r}")
    if sweep.scale == "log" and (sweep.start <= 0.0 or sweep.stop <= 0.0):
        raise ScenarioError("[sweep] log scale needs positive start and stop")

    raw_params = dict(parser.items("params")) if parser.has_section("params") else {}
    params = _RESOLVERS[mode](mode, sweep, raw_params)

    probe = _PROBES[mode]
    for endpoint in (sweep.start, sweep.stop):
        try:
            probe(mode, {**params, sweep.variable: endpoint})
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(
                f"invalid parameters at {sweep.variable}={endpoint}: {exc}") from exc

    return ScenarioSpec(mode=mode, sweep=sweep, params=params, path=path)


# ---------------------------------------------------------------------------
# Evaluators: columns + one-row functions, closed over the fixed parameters
# ---------------------------------------------------------------------------

def _clamp(rate: float) -> float:
    return rate if rate > 0.0 else 0.0


def _cv_obs(p: dict) -> ChannelObservation:
    return ChannelObservation(t_eq=p["t_eq"], xi=p["xi"], eta_d=p["eta_d"],
                              nu_el=p["nu_el"])


def _evaluator_cv_worst(spec: ScenarioSpec):
    engine_mode = spec.mode[3:]
    columns = ("k_worst", "k_worst_pos", "argmin_eta_s", "argmin_eta_t",
               "k_nobypass", "k_nobypass_pos", "feasible", "feasible_nobypass")

    def row(p: dict) -> tuple:
        try:
            res = worst_case_rate(p["eta_ae"], _cv_obs(p), engine_mode,
                                  grid_points=p["grid_points"], v=p["v"],
                                  beta=p["beta"], v_s=p["v_s"],
                                  refine=p["refine"])
        except InfeasibleAttackError:
            return (None, None, None, None, None, None, 0, 0)
        nb = res.rate_nobypass
        if nb is None:
            return (res.rate, _clamp(res.rate), res.eta_s, res.eta_t,
                    None, None, 1, 0)
        return (res.rate, _clamp(res.rate), res.eta_s, res.eta_t,
                nb, _clamp(nb), 1, 1)

    return columns, row


def _evaluator_cv_fixed(spec: ScenarioSpec):
    engine_mode = spec.mode[3:]
    columns = ("k", "k_pos", "chi_eve", "feasible")

    def row(p: dict) -> tuple:
        obs = _cv_obs(p)
        scenario = CvScenario(eta_ae=p["eta_ae"], eta_s=p["eta_s"],
                              eta_t=p["eta_t"], v=p["v"], beta=p["beta"],
                              v_s=p["v_s"])
        try:
            chi = holevo_bound(scenario, obs, engine_mode)
        except InfeasibleAttackError:
            return (None, None, None, 0)
        rate = scenario.beta * mutual_info(obs, scenario.v) - chi
        return (rate, _clamp(rate), chi, 1)

    return columns, row


def _evaluator_cv_dr_m2(spec: ScenarioSpec):
    columns = ("eve_bound", "k", "k_pos")

    def row(p: dict) -> tuple:
        chi = holevo_dr_m2_bound(p["eta_ae"], p["v"])
        rate = p["beta"] * mutual_info(_cv_obs(p), p["v"]) - chi
        return (chi, rate, _clamp(rate))

    return columns, row


def _dv_params(p: dict, source: str, **extra) -> DvParams:
    return DvParams(source=source, eta_ch=p["eta_ch"], eta_d=p["eta_d"],
                    p_dc=p["p_dc"], e_d=p["e_d"], f=p["f"], q=p["q"],
                    eta_ae=p["eta_ae"], **extra)


def _evaluator_dv_sps(spec: ScenarioSpec):
    columns = ("rate_sps", "rate_sps_pos")

    def row(p: dict) -> tuple:
        rate = rate_at(_dv_params(p, "sps"))
        return (rate, _clamp(rate))

    return columns, row


def _evaluator_dv_wcp(spec: ScenarioSpec):
    # mu fixed (or swept) -> evaluate it as given; mu absent -> optimise per
    # point and report the optimum alongside the single-photon comparison.
    optimise = "mu" not in spec.params and spec.sweep.variable != "mu"
    if optimise:
        columns = ("rate_wcp", "rate_wcp_pos", "mu_opt",
                   "rate_sps", "rate_sps_pos")
    else:
        columns = ("rate_wcp", "rate_wcp_pos", "rate_sps", "rate_sps_pos")

    def row(p: dict) -> tuple:
        if optimise:
            best = optimize_mu(_dv_params(p, "wcp"))
            wcp_cells = (best.rate, _clamp(best.rate), best.mu)
        else:
            rate = rate_at(_dv_params(p, "wcp", mu=p["mu"]))
            wcp_cells = (rate, _clamp(rate))
        sps = rate_at(_dv_params(p, "sps"))
        return wcp_cells + (sps, _clamp(sps))

    return columns, row


def _evaluator_lidar_profile(spec: ScenarioSpec):
    p = spec.params
    total = p["total_range"]
    beam = BeamParams(waist=p["waist"], wavelength=p["wavelength"],
                      quality=p["quality"])
    geom = LinkGeometry(total_range=total, r_a=p["r_a"], r_b=p["r_b"])
    dual = p["bound_source"] == "dual-lidar"
    if dual:
        cfg_sat = LidarConfig(transmit_power=p["power_sat"],
                              loss_factor=p["loss_factor"],
                              reflectivity=p["reflectivity"],
                              noise_floor=p["noise_floor_sat"], beam=beam)
        cfg_ground = LidarConfig(transmit_power=p["power_ground"],
                                 loss_factor=p["loss_factor"],
                                 reflectivity=p["reflectivity"],
                                 noise_floor=p["noise_floor_ground"],
                                 beam=BeamParams(waist=p["r_b"],
                                                 wavelength=p["wavelength"],
                                                 quality=p["quality"]))

        def size_bound(z: float) -> float:
            return min(lidar_size_bound(z, cfg_sat),
                       lidar_size_bound(total - z, cfg_ground))

        columns = ("r_e", "eta_ae", "eta_eb", "alpha_min_sat", "alpha_min_ground")
    else:
        radar = RadarParams(
            transmit_power=p["radar_power"],
            antenna_radius=p["radar_antenna_radius"],
            wavelength=p["radar_wavelength"],
            bandwidth=p["radar_bandwidth"],
            noise_figure=10.0 ** (p["radar_noise_figure_db"] / 10.0),
            loss_factor=10.0 ** (p["radar_loss_db"] / 10.0),
            aperture_efficiency=p["radar_aperture_efficiency"],
            antenna_temperature=p["radar_antenna_temp"])

        def size_bound(z: float) -> float:
            return radar_size_bound(total - z, radar)

        columns = ("r_e", "eta_ae", "eta_eb")

    def row(per_point: dict) -> tuple:
        z = per_point["z"]
        # An object touching either terminal is always seen, whatever the
        # monitor: the bound vanishes at the endpoints.
        r_e = 0.0 if (z <= 0.0 or z >= total) else size_bound(z)
        if r_e == 0.0:
            eta_ae = eta_eb = 0.0
        elif math.isinf(r_e):
            eta_ae = eta_eb = 1.0
        else:
            eta_ae = float(aperture_transmittance(r_e, beam_width(z, beam)))
            w_at_b = focused_beam_width(z, r_e, geom, beam.wavelength)
            eta_eb = float(aperture_transmittance(geom.r_b, w_at_b))
        cells = (r_e, eta_ae, eta_eb)
        if dual:
            cells += (reflectivity_threshold(z, cfg_sat),
                      reflectivity_threshold(total - z, cfg_ground))
        return cells

    return columns, row


def _evaluator_lidar_elevation(spec: ScenarioSpec):
    p = spec.params
    beam = BeamParams(waist=p["waist"], wavelength=p["wavelength"],
                      quality=p["quality"])
    cfg_sat = LidarConfig(transmit_power=p["power_sat"],
                          loss_factor=p["loss_factor"],
                          reflectivity=p["reflectivity"],
                          noise_floor=p["noise_floor_sat"], beam=beam)
    cfg_ground = LidarConfig(transmit_power=p["power_ground"],
                             loss_factor=p["loss_factor"],
                             reflectivity=p["reflectivity"],
                             noise_floor=p["noise_floor_ground"],
                             beam=BeamParams(waist=p["r_b"],
                                             wavelength=p["wavelength"],
                                             quality=p["quality"]))
    columns = ("max_eta_ae", "max_eta_eb", "eta_ab_diffraction",
               "eta_ab_effective")

    def row(per_point: dict) -> tuple:
        theta = math.radians(per_point["zenith_deg"])
        out = elevation_sweep(
            p["altitude"], cfg_sat, cfg_ground, [theta],
            r_a=p["r_a"], r_b=p["r_b"], comm_beam=beam,
            profile_points=p["profile_points"],
            extinction_coefficient=p["extinction_coefficient"],
            detection_efficiency=p["detection_efficiency"],
            optics_transmittance=p["optics_transmittance"])
        return (float(out.max_eta_ae[0]), float(out.max_eta_eb[0]),
                float(out.eta_ab_diffraction[0]),
                float(out.eta_ab_effective[0]))

    return columns, row


def _build_evaluator(spec: ScenarioSpec):
    if spec.mode in ("cv-rr", "cv-dr-m1"):
        if "eta_s" in spec.params or spec.sweep.variable in ("eta_s", "eta_t"):
            return _evaluator_cv_fixed(spec)
        return _evaluator_cv_worst(spec)
    if spec.mode == "cv-dr-m2":
        return _evaluator_cv_dr_m2(spec)
    if spec.mode == "dv-sps":
        return _evaluator_dv_sps(spec)
    if spec.mode == "dv-wcp":
        return _evaluator_dv_wcp(spec)
    if spec.mode == "lidar-profile":
        return _evaluator_lidar_profile(spec)
    return _evaluator_lidar_elevation(spec)


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def run_scenario(path: str, *, threads: int = 1) -> ResultTable:
    """Evaluate a scenario file into a :class:`ResultTable`.

    The sweep fans out to ``threads`` workers; result order (and, because
    :func:`emit` drops volatile metadata, emitted bytes) is independent of
    the worker count.  Raises :class:`InfeasibleAttackError` when a CV sweep
    is infeasible at every point — a sign the restriction hypothesis cannot
    reproduce the observed channel at all.
    """
    spec = load_scenario(path)
    if threads < 1:
        raise ScenarioError(f"threads must be >= 1, got {threads}")
    tail_columns, row_fn = _build_evaluator(spec)
    grid = [float(x) for x in spec.sweep.grid()]

    def point(value: float) -> tuple:
        return row_fn({**spec.params, spec.sweep.variable: value})

    start = time.perf_counter()
    if threads == 1:
        tails = [point(x) for x in grid]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tails = list(pool.map(point, grid))
    wall = time.perf_counter() - start

    columns = (spec.sweep.variable,) + tuple(tail_columns)
    rows = [(x,) + tail for x, tail in zip(grid, tails)]

    if "feasible" in columns:
        sentinel = columns.index("feasible")
        if all(r[sentinel] == 0 for r in rows):
            raise InfeasibleAttackError(
                f"every point of the sweep over {spec.sweep.variable!r} is "
                "infeasible: no attack reproduces the stated observations")

    metadata = {
        "mode": spec.mode,
        "engine_version": __version__,
        "scenario_file": os.path.basename(path),
        "sweep_variable": spec.sweep.variable,
        "sweep_start": spec.sweep.start,
        "sweep_stop": spec.sweep.stop,
        "sweep_points": spec.sweep.points,
        "sweep_scale": spec.sweep.scale,
        "wall_time_s": wall,
        "threads": threads,
    }
    for key, value in spec.params.items():
        metadata[f"param_{key}"] = value
    return ResultTable(columns=columns, rows=rows, metadata=metadata)


# ---------------------------------------------------------------------------
# Emission and re-parsing
# ---------------------------------------------------------------------------

_SEPARATORS = {"csv": ",", "tsv": "\t"}


def _format_cell(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, bool) or not isinstance(cell, (int, np.integer)):
        return f"{float(cell):.17e}"
    return str(int(cell))


def _format_meta(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(table: ResultTable, dest, *, fmt: str = "csv") -> None:
    """Write a table as delimited text to a path or open file object.

    Layout: '#'-prefixed metadata lines (keys sorted, volatile ones
    dropped), the header row, then the data rows.  Floats use 17-digit
    scientific notation so :func:`read_table` reproduces them exactly;
    empty cells mark values a sentinel column explains.
    """
    if fmt not in _SEPARATORS:
        raise ScenarioError(f"format must be csv or tsv, got {fmt!r}")
    sep = _SEPARATORS[fmt]
    lines = [f"# {key} = {_format_meta(table.metadata[key])}"
             for key in sorted(table.metadata) if key not in VOLATILE_METADATA]
    lines.append(sep.join(table.columns))
    for row in table.rows:
        if len(row) != len(table.columns):
            raise ValueError(
                f"ragged table: row of {len(row)} cells under "
                f"{len(table.columns)} columns")
        lines.append(sep.join(_format_cell(cell) for cell in row))
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_table(source) -> ResultTable:
    """Parse a file produced by :func:`emit` back into a table.

    Metadata values come back as strings; cells come back as floats with
    ``None`` for the empty cells of infeasible points.  Numeric content
    round-trips exactly.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    metadata: dict = {}
    columns: "tuple[str, ...] | None" = None
    rows: "list[tuple]" = []
    sep = ","
    for line in lines:
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" = ")
            metadata[key] = value
            continue
        if columns is None:
            sep = "\t" if "\t" in line else ","
            columns = tuple(line.split(sep))
            continue
        rows.append(tuple(None if cell == "" else float(cell)
                          for cell in line.split(sep)))
    if columns is None:
        raise ScenarioError("no header row found; is this an emitted table?")
    return ResultTable(columns=columns, rows=rows, metadata=metadata)
