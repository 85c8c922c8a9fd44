"""Scenario configuration: typed parameter blocks, YAML loading, and
the three named feedback architectures.

A scenario bundles every tunable of the loop.  The named labels pin the
feedback wiring:

* ``A``: measured force replayed through the cosh map, no saturation;
* ``B``: virtualized (position-error) feedback, no saturation;
* ``C``: virtualized feedback with reference saturation.

``custom`` frees the flags.  Label/flag mismatches are rejected at load
time rather than silently reinterpreted.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .admittance import AdmittanceParams, SaturationParams, ToolPayload
from .environment import BlackboardModel
from .operator import HandComplianceParams, ScriptedTask, TremorParams
from .rendering import CoshMappingParams, DeviceLimits, VirtualCouplingParams
from .se3 import quat_identity, quat_normalize

RENDER_MEASURED = "measured_cosh"
RENDER_VIRTUALIZED = "virtualized"

LABEL_WIRING = {
    "A": (RENDER_MEASURED, False),
    "B": (RENDER_VIRTUALIZED, False),
    "C": (RENDER_VIRTUALIZED, True),
}


class ConfigError(ValueError):
    """Configuration that parses but cannot describe a runnable session."""


@dataclass(frozen=True)
class ControlParams:
    rate_hz: float = 500.0

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz


@dataclass(frozen=True)
class FilterParams:
    window_n: int = 50


@dataclass(frozen=True)
class MappingParams:
    """Fixed mounting rotations of the master-to-robot map."""

    base_rotation: np.ndarray = field(default_factory=quat_identity)
    tool_rotation: np.ndarray = field(default_factory=quat_identity)

    def __post_init__(self) -> None:
        object.__setattr__(self, "base_rotation",
                           quat_normalize(self.base_rotation))
        object.__setattr__(self, "tool_rotation",
                           quat_normalize(self.tool_rotation))


@dataclass(frozen=True)
class PlantParams:
    bandwidth_hz: float = 20.0
    start_position: np.ndarray = field(
        default_factory=lambda: np.array([0.34, 0.0, 0.30]))
    start_orientation: np.ndarray = field(default_factory=quat_identity)

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_position",
                           np.asarray(self.start_position, dtype=float))
        object.__setattr__(self, "start_orientation",
                           quat_normalize(self.start_orientation))


@dataclass(frozen=True)
class ContactClassParams:
    force_epsilon: float = 0.5
    collision_window: float = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    label: str = "C"
    render_mode: str = RENDER_VIRTUALIZED
    saturation_enabled: bool = True
    control: ControlParams = field(default_factory=ControlParams)
    filter: FilterParams = field(default_factory=FilterParams)
    mapping: MappingParams = field(default_factory=MappingParams)
    admittance: AdmittanceParams = field(default_factory=AdmittanceParams)
    saturation: SaturationParams = field(default_factory=SaturationParams)
    tool: ToolPayload = field(default_factory=ToolPayload)
    render: VirtualCouplingParams = field(
        default_factory=VirtualCouplingParams)
    cosh: CoshMappingParams = field(default_factory=CoshMappingParams)
    device: DeviceLimits = field(default_factory=DeviceLimits)
    env: BlackboardModel = field(default_factory=BlackboardModel)
    plant: PlantParams = field(default_factory=PlantParams)
    contact: ContactClassParams = field(default_factory=ContactClassParams)
    operator: ScriptedTask = field(default_factory=ScriptedTask)

    def __post_init__(self) -> None:
        if self.render_mode not in (RENDER_MEASURED, RENDER_VIRTUALIZED):
            raise ConfigError(f"unknown render mode {self.render_mode!r}")
        if self.label in LABEL_WIRING:
            mode, sat = LABEL_WIRING[self.label]
            if self.render_mode != mode or self.saturation_enabled != sat:
                raise ConfigError(
                    f"scenario {self.label} requires render_mode={mode}, "
                    f"saturation_enabled={sat}; got {self.render_mode}, "
                    f"{self.saturation_enabled}")
        elif self.label != "custom":
            raise ConfigError(f"unknown scenario label {self.label!r}")
        if self.saturation.enabled != self.saturation_enabled:
            raise ConfigError(
                "saturation.enabled disagrees with saturation_enabled")
        if self.control.rate_hz <= 0.0:
            raise ConfigError("control.rate_hz must be positive")
        if self.filter.window_n < 1:
            raise ConfigError("filter.window_n must be >= 1")

    def replace(self, **kwargs: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **kwargs)

    @property
    def normal_force_limit(self) -> float:
        """Scalar clamp ceiling along the board normal.

        The clamp is per-axis in the robot base frame; projecting the
        axis thresholds onto the (unit) board normal gives the bound on
        the contact-normal force that the metrics and wire layers report.
        """
        return float(np.abs(self.env.normal) @ self.saturation.threshold)


def scenario(label: str, **overrides: Any) -> ScenarioConfig:
    """Named scenario with default parameters, plus block overrides."""
    if label not in LABEL_WIRING:
        raise ConfigError(f"unknown scenario label {label!r}")
    mode, sat = LABEL_WIRING[label]
    sat_params = overrides.pop("saturation", None)
    if sat_params is None:
        sat_params = SaturationParams(enabled=sat)
    else:
        sat_params = dataclasses.replace(sat_params, enabled=sat)
    return ScenarioConfig(label=label, render_mode=mode,
                          saturation_enabled=sat,
                          saturation=sat_params, **overrides)


# ---------------------------------------------------------------------
# dict / YAML serialization
# ---------------------------------------------------------------------

def _vec(x: Any, n: int, path: str) -> np.ndarray:
    if isinstance(x, (int, float)):
        return np.full(n, float(x))
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise ConfigError(f"{path}: expected {n} numbers, got {x!r}")
    return arr


def _take(block: dict, key: str, path: str, default: Any) -> Any:
    return block.pop(key, default)


def _reject_unknown(block: dict, path: str) -> None:
    if block:
        raise ConfigError(f"{path}: unknown keys {sorted(block)}")


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Plain-scalar dict mirror of the config, stable key order."""
    def lst(a: np.ndarray) -> list[float]:
        return [float(x) for x in np.asarray(a).ravel()]

    return {
        "scenario": {
            "label": cfg.label,
            "render_mode": cfg.render_mode,
            "saturation_enabled": cfg.saturation_enabled,
        },
        "control": {"rate_hz": cfg.control.rate_hz},
        "filter": {"window_n": cfg.filter.window_n},
        "mapping": {
            "R_Hb_to_Rb": lst(cfg.mapping.base_rotation),
            "R_He_to_Re": lst(cfg.mapping.tool_rotation),
        },
        "admittance": {
            "M_d": lst(cfg.admittance.mass),
            "K_D": lst(cfg.admittance.damping),
            "K_P": lst(cfg.admittance.stiffness),
            "f_d": lst(cfg.admittance.desired_force),
        },
        "saturation": {
            "enabled": cfg.saturation.enabled,
            "f_th": lst(cfg.saturation.threshold),
            "K_e_est": lst(cfg.saturation.env_stiffness_est),
            "contact_epsilon": cfg.saturation.contact_epsilon,
        },
        "tool": {
            "mass": cfg.tool.mass,
            "com": lst(cfg.tool.center_of_mass),
            "gravity": lst(cfg.tool.gravity),
        },
        "render": {
            "mode": cfg.render_mode,
            "K_h": lst(cfg.render.stiffness),
            "D_h": lst(cfg.render.damping),
            "f_bar_e": lst(cfg.cosh.force_scale),
            "deadzone_n": cfg.cosh.deadzone,
        },
        "device": {"f_max": lst(cfg.device.f_max)},
        "env": {
            "K_e": cfg.env.stiffness,
            "mu_k": cfg.env.friction,
            "breakage_force": cfg.env.breakage_force,
            "plane_point": lst(cfg.env.origin),
            "plane_normal": lst(cfg.env.normal),
        },
        "plant": {
            "bandwidth_hz": cfg.plant.bandwidth_hz,
            "start_position": lst(cfg.plant.start_position),
            "start_orientation": lst(cfg.plant.start_orientation),
        },
        "contact": {
            "force_epsilon": cfg.contact.force_epsilon,
            "collision_window": cfg.contact.collision_window,
        },
        "operator": {
            "text": cfg.operator.text,
            "letter_height": cfg.operator.letter_height,
            "letter_spacing": cfg.operator.letter_spacing,
            "board_origin_uv": lst(cfg.operator.board_origin_uv),
            "write_speed": cfg.operator.write_speed,
            "travel_speed": cfg.operator.travel_speed,
            "approach_speed": cfg.operator.approach_speed,
            "hover": cfg.operator.hover,
            "press_depth": cfg.operator.press_depth,
            "depth_modulation": cfg.operator.depth_modulation,
            "modulation_period": cfg.operator.modulation_period,
            "settle_time": cfg.operator.settle_time,
            "tail_time": cfg.operator.tail_time,
            "tremor_rms": cfg.operator.tremor.rms,
            "tremor_band_hz": lst(cfg.operator.tremor.band_hz),
            "tremor_rotation_rms": cfg.operator.tremor.rotation_rms,
            "tremor_seed": cfg.operator.tremor.seed,
            "hand_compliance": cfg.operator.compliance.enabled,
            "hand_yield_per_newton": cfg.operator.compliance.yield_per_newton,
            "hand_tau": cfg.operator.compliance.tau,
        },
    }


def config_from_dict(data: dict) -> ScenarioConfig:
    """Inverse of :func:`config_to_dict`; rejects unknown keys loudly."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = {k: dict(v) if isinstance(v, dict) else v
            for k, v in data.items()}
    defaults = ScenarioConfig()

    sc = data.pop("scenario", {})
    label = _take(sc, "label", "scenario", "custom")
    render_mode = _take(sc, "render_mode", "scenario", None)
    sat_enabled = _take(sc, "saturation_enabled", "scenario", None)
    _reject_unknown(sc, "scenario")

    ctl = data.pop("control", {})
    control = ControlParams(rate_hz=float(_take(ctl, "rate_hz", "control",
                                                defaults.control.rate_hz)))
    _reject_unknown(ctl, "control")

    flt = data.pop("filter", {})
    filt = FilterParams(window_n=int(_take(flt, "window_n", "filter",
                                           defaults.filter.window_n)))
    _reject_unknown(flt, "filter")

    mp = data.pop("mapping", {})
    mapping = MappingParams(
        base_rotation=_vec(_take(mp, "R_Hb_to_Rb", "mapping",
                                 [1.0, 0.0, 0.0, 0.0]), 4, "mapping.R_Hb_to_Rb"),
        tool_rotation=_vec(_take(mp, "R_He_to_Re", "mapping",
                                 [1.0, 0.0, 0.0, 0.0]), 4, "mapping.R_He_to_Re"))
    _reject_unknown(mp, "mapping")

    ad = data.pop("admittance", {})
    admittance = AdmittanceParams(
        mass=_vec(_take(ad, "M_d", "admittance", 2.0), 3, "admittance.M_d"),
        damping=_vec(_take(ad, "K_D", "admittance", 80.0), 3,
                     "admittance.K_D"),
        stiffness=_vec(_take(ad, "K_P", "admittance", 1000.0), 3,
                       "admittance.K_P"),
        desired_force=_vec(_take(ad, "f_d", "admittance", 0.0), 3,
                           "admittance.f_d"))
    _reject_unknown(ad, "admittance")

    st = data.pop("saturation", {})
    sat_block_enabled = bool(_take(st, "enabled", "saturation", True))
    saturation = SaturationParams(
        threshold=_vec(_take(st, "f_th", "saturation", 12.0), 3,
                       "saturation.f_th"),
        env_stiffness_est=_vec(_take(st, "K_e_est", "saturation", 3000.0), 3,
                               "saturation.K_e_est"),
        enabled=sat_block_enabled,
        contact_epsilon=float(_take(st, "contact_epsilon", "saturation",
                                    0.5)))
    _reject_unknown(st, "saturation")

    tl = data.pop("tool", {})
    tool = ToolPayload(
        mass=float(_take(tl, "mass", "tool", defaults.tool.mass)),
        center_of_mass=_vec(_take(tl, "com", "tool", [0.0, 0.0, 0.0]), 3,
                            "tool.com"),
        gravity=_vec(_take(tl, "gravity", "tool", [0.0, 0.0, -9.81]), 3,
                     "tool.gravity"))
    _reject_unknown(tl, "tool")

    rn = data.pop("render", {})
    rn_mode = _take(rn, "mode", "render", None)
    render = VirtualCouplingParams(
        stiffness=_vec(_take(rn, "K_h", "render", 300.0), 3, "render.K_h"),
        damping=_vec(_take(rn, "D_h", "render", 5.0), 3, "render.D_h"))
    cosh = CoshMappingParams(
        force_scale=_vec(_take(rn, "f_bar_e", "render", 12.0), 3,
                         "render.f_bar_e"),
        deadzone=float(_take(rn, "deadzone_n", "render", 0.25)))
    _reject_unknown(rn, "render")
    if render_mode is None:
        render_mode = rn_mode
    elif rn_mode is not None and rn_mode != render_mode:
        raise ConfigError("scenario.render_mode and render.mode disagree")

    dv = data.pop("device", {})
    device = DeviceLimits(f_max=_vec(_take(dv, "f_max", "device", 7.9), 3,
                                     "device.f_max"))
    _reject_unknown(dv, "device")

    ev = data.pop("env", {})
    env = BlackboardModel(
        origin=_vec(_take(ev, "plane_point", "env", [0.40, 0.0, 0.30]), 3,
                    "env.plane_point"),
        normal=_vec(_take(ev, "plane_normal", "env", [-1.0, 0.0, 0.0]), 3,
                    "env.plane_normal"),
        stiffness=float(_take(ev, "K_e", "env", 3000.0)),
        friction=float(_take(ev, "mu_k", "env", 0.4)),
        breakage_force=float(_take(ev, "breakage_force", "env", 30.0)))
    _reject_unknown(ev, "env")

    pl = data.pop("plant", {})
    plant = PlantParams(
        bandwidth_hz=float(_take(pl, "bandwidth_hz", "plant", 20.0)),
        start_position=_vec(_take(pl, "start_position", "plant",
                                  [0.34, 0.0, 0.30]), 3,
                            "plant.start_position"),
        start_orientation=_vec(_take(pl, "start_orientation", "plant",
                                     [1.0, 0.0, 0.0, 0.0]), 4,
                               "plant.start_orientation"))
    _reject_unknown(pl, "plant")

    ct = data.pop("contact", {})
    contact = ContactClassParams(
        force_epsilon=float(_take(ct, "force_epsilon", "contact", 0.5)),
        collision_window=float(_take(ct, "collision_window", "contact",
                                     0.05)))
    _reject_unknown(ct, "contact")

    op = data.pop("operator", {})
    dop = defaults.operator
    tremor = TremorParams(
        rms=float(_take(op, "tremor_rms", "operator", dop.tremor.rms)),
        band_hz=tuple(float(v) for v in
                      _vec(_take(op, "tremor_band_hz", "operator",
                                 list(dop.tremor.band_hz)), 2,
                           "operator.tremor_band_hz")),
        rotation_rms=float(_take(op, "tremor_rotation_rms", "operator",
                                 dop.tremor.rotation_rms)),
        seed=int(_take(op, "tremor_seed", "operator", dop.tremor.seed)))
    compliance = HandComplianceParams(
        enabled=bool(_take(op, "hand_compliance", "operator",
                           dop.compliance.enabled)),
        yield_per_newton=float(_take(op, "hand_yield_per_newton", "operator",
                                     dop.compliance.yield_per_newton)),
        tau=float(_take(op, "hand_tau", "operator", dop.compliance.tau)))
    task = ScriptedTask(
        text=str(_take(op, "text", "operator", dop.text)),
        letter_height=float(_take(op, "letter_height", "operator",
                                  dop.letter_height)),
        letter_spacing=float(_take(op, "letter_spacing", "operator",
                                   dop.letter_spacing)),
        board_origin_uv=tuple(float(v) for v in
                              _vec(_take(op, "board_origin_uv", "operator",
                                         list(dop.board_origin_uv)), 2,
                                   "operator.board_origin_uv")),
        write_speed=float(_take(op, "write_speed", "operator",
                                dop.write_speed)),
        travel_speed=float(_take(op, "travel_speed", "operator",
                                 dop.travel_speed)),
        approach_speed=float(_take(op, "approach_speed", "operator",
                                   dop.approach_speed)),
        hover=float(_take(op, "hover", "operator", dop.hover)),
        press_depth=float(_take(op, "press_depth", "operator",
                                dop.press_depth)),
        depth_modulation=float(_take(op, "depth_modulation", "operator",
                                     dop.depth_modulation)),
        modulation_period=float(_take(op, "modulation_period", "operator",
                                      dop.modulation_period)),
        settle_time=float(_take(op, "settle_time", "operator",
                                dop.settle_time)),
        tail_time=float(_take(op, "tail_time", "operator", dop.tail_time)),
        tremor=tremor,
        compliance=compliance)
    _reject_unknown(op, "operator")
    _reject_unknown(data, "config")

    if render_mode is None or sat_enabled is None:
        if label in LABEL_WIRING:
            mode, sat = LABEL_WIRING[label]
            render_mode = render_mode or mode
            sat_enabled = sat if sat_enabled is None else sat_enabled
        else:
            render_mode = render_mode or RENDER_VIRTUALIZED
            sat_enabled = saturation.enabled if sat_enabled is None \
                else sat_enabled
    saturation = dataclasses.replace(saturation, enabled=bool(sat_enabled))

    return ScenarioConfig(
        label=label, render_mode=render_mode,
        saturation_enabled=bool(sat_enabled), control=control, filter=filt,
        mapping=mapping, admittance=admittance, saturation=saturation,
        tool=tool, render=render, cosh=cosh, device=device, env=env,
        plant=plant, contact=contact, operator=task)


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse a YAML scenario file; errors carry file/line context."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    if data is None:
        data = {}
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{p}: {exc}") from exc


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg),
                                         sort_keys=False))
