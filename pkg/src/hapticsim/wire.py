"""JSON wire schema for the realtime session service.

Every message is a flat JSON object carrying a schema version ``v`` and
a ``type`` discriminator.  ``decode_message(encode_message(m)) == m``
holds for every variant; unknown types or versions raise WireError so
peers never act on half-understood input.

Client to server: stylus_input, scenario_set, session_ctl.
Server to client: state_snapshot, session_event, metrics_update,
role_assign, scenario_state, error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

WIRE_VERSION = 1

SESSION_ACTIONS = ("start", "stop", "reset")
SESSION_EVENTS = ("started", "completed", "failed", "paused", "reset")
ROLES = ("controller", "observer")
ERROR_CODES = ("bad_message", "not_controller", "controller_exists",
               "session_active", "bad_scenario")


class WireError(ValueError):
    """Malformed, unknown, or wrong-version wire message."""


def _vec(value, n: int, name: str) -> tuple[float, ...]:
    try:
        out = tuple(float(x) for x in value)
    except (TypeError, ValueError) as exc:
        raise WireError(f"{name} must be a list of numbers") from exc
    if len(out) != n:
        raise WireError(f"{name} must have {n} components")
    return out


@dataclass(frozen=True)
class StylusInput:
    t: float
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]

    TYPE = "stylus_input"

    def payload(self) -> dict:
        return {"t": self.t, "p": list(self.position),
                "q": list(self.orientation)}

    @classmethod
    def from_payload(cls, data: dict) -> "StylusInput":
        return cls(t=float(data["t"]),
                   position=_vec(data["p"], 3, "p"),
                   orientation=_vec(data["q"], 4, "q"))


@dataclass(frozen=True)
class ScenarioSet:
    label: str | None = None
    config: dict | None = None

    TYPE = "scenario_set"

    def __post_init__(self) -> None:
        if (self.label is None) == (self.config is None):
            raise WireError("scenario_set needs exactly one of label, config")

    def payload(self) -> dict:
        if self.label is not None:
            return {"label": self.label}
        return {"config": self.config}

    @classmethod
    def from_payload(cls, data: dict) -> "ScenarioSet":
        label = data.get("label")
        return cls(label=None if label is None else str(label),
                   config=data.get("config"))


@dataclass(frozen=True)
class SessionCtl:
    action: str

    TYPE = "session_ctl"

    def __post_init__(self) -> None:
        if self.action not in SESSION_ACTIONS:
            raise WireError(f"unknown session action {self.action!r}")

    def payload(self) -> dict:
        return {"action": self.action}

    @classmethod
    def from_payload(cls, data: dict) -> "SessionCtl":
        return cls(action=str(data.get("action")))


@dataclass(frozen=True)
class StateSnapshot:
    t: float
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]
    f_e: tuple[float, float, float]
    f_h: tuple[float, float, float]
    contact_state: str
    saturation: tuple[bool, bool, bool]
    chalk_intact: bool
    # Each delta is (segment index, (u, v)) in board coordinates.
    stroke_delta: tuple[tuple[int, tuple[float, float]], ...] = ()

    TYPE = "state_snapshot"

    def payload(self) -> dict:
        return {
            "t": self.t,
            "p": list(self.position),
            "q": list(self.orientation),
            "f_e": list(self.f_e),
            "f_h": list(self.f_h),
            "contact_state": self.contact_state,
            "saturation": list(self.saturation),
            "chalk_intact": self.chalk_intact,
            "stroke_delta": [[seg, list(uv)] for seg, uv in
                             self.stroke_delta],
        }

    @classmethod
    def from_payload(cls, data: dict) -> "StateSnapshot":
        deltas = tuple(
            (int(seg), tuple(_vec(uv, 2, "stroke point")))
            for seg, uv in data.get("stroke_delta", []))
        sat = data["saturation"]
        if len(sat) != 3:
            raise WireError("saturation must have 3 flags")
        return cls(
            t=float(data["t"]),
            position=_vec(data["p"], 3, "p"),
            orientation=_vec(data["q"], 4, "q"),
            f_e=_vec(data["f_e"], 3, "f_e"),
            f_h=_vec(data["f_h"], 3, "f_h"),
            contact_state=str(data["contact_state"]),
            saturation=tuple(bool(b) for b in sat),
            chalk_intact=bool(data["chalk_intact"]),
            stroke_delta=deltas,
        )


@dataclass(frozen=True)
class SessionEvent:
    event: str
    reason: str | None = None

    TYPE = "session_event"

    def __post_init__(self) -> None:
        if self.event not in SESSION_EVENTS:
            raise WireError(f"unknown session event {self.event!r}")

    def payload(self) -> dict:
        return {"event": self.event, "reason": self.reason}

    @classmethod
    def from_payload(cls, data: dict) -> "SessionEvent":
        reason = data.get("reason")
        return cls(event=str(data.get("event")),
                   reason=None if reason is None else str(reason))


@dataclass(frozen=True)
class MetricsUpdate:
    robot_mean: float | None = None
    robot_extremum: float | None = None
    mean_difference: float | None = None
    peak_difference: float | None = None
    human_mean: float = 0.0
    human_extremum: float = 0.0

    TYPE = "metrics_update"

    def payload(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_payload(cls, data: dict) -> "MetricsUpdate":
        def opt(key):
            val = data.get(key)
            return None if val is None else float(val)
        return cls(robot_mean=opt("robot_mean"),
                   robot_extremum=opt("robot_extremum"),
                   mean_difference=opt("mean_difference"),
                   peak_difference=opt("peak_difference"),
                   human_mean=float(data.get("human_mean", 0.0)),
                   human_extremum=float(data.get("human_extremum", 0.0)))


@dataclass(frozen=True)
class RoleAssign:
    role: str

    TYPE = "role_assign"

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise WireError(f"unknown role {self.role!r}")

    def payload(self) -> dict:
        return {"role": self.role}

    @classmethod
    def from_payload(cls, data: dict) -> "RoleAssign":
        return cls(role=str(data.get("role")))


@dataclass(frozen=True)
class ScenarioState:
    label: str
    render_mode: str
    saturation_enabled: bool
    force_threshold: float
    running: bool = False

    TYPE = "scenario_state"

    def payload(self) -> dict:
        return {"label": self.label, "render_mode": self.render_mode,
                "saturation_enabled": self.saturation_enabled,
                "force_threshold": self.force_threshold,
                "running": self.running}

    @classmethod
    def from_payload(cls, data: dict) -> "ScenarioState":
        return cls(label=str(data["label"]),
                   render_mode=str(data["render_mode"]),
                   saturation_enabled=bool(data["saturation_enabled"]),
                   force_threshold=float(data["force_threshold"]),
                   running=bool(data.get("running", False)))


@dataclass(frozen=True)
class ErrorMessage:
    code: str
    message: str = ""

    TYPE = "error"

    def __post_init__(self) -> None:
        if self.code not in ERROR_CODES:
            raise WireError(f"unknown error code {self.code!r}")

    def payload(self) -> dict:
        return {"code": self.code, "message": self.message}

    @classmethod
    def from_payload(cls, data: dict) -> "ErrorMessage":
        return cls(code=str(data.get("code")),
                   message=str(data.get("message", "")))


WireMessage = (StylusInput | ScenarioSet | SessionCtl | StateSnapshot
               | SessionEvent | MetricsUpdate | RoleAssign | ScenarioState
               | ErrorMessage)

_REGISTRY = {cls.TYPE: cls for cls in (
    StylusInput, ScenarioSet, SessionCtl, StateSnapshot, SessionEvent,
    MetricsUpdate, RoleAssign, ScenarioState, ErrorMessage)}

CLIENT_TYPES = (StylusInput.TYPE, ScenarioSet.TYPE, SessionCtl.TYPE)


def encode_message(msg: WireMessage) -> str:
    data = {"v": WIRE_VERSION, "type": msg.TYPE}
    data.update(msg.payload())
    return json.dumps(data, separators=(",", ":"))


def decode_message(text: str | bytes) -> WireMessage:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WireError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise WireError("message must be a JSON object")
    version = data.get("v")
    if version != WIRE_VERSION:
        raise WireError(f"unsupported wire version {version!r}")
    kind = data.get("type")
    cls = _REGISTRY.get(kind)
    if cls is None:
        raise WireError(f"unknown message type {kind!r}")
    try:
        return cls.from_payload(data)
    except WireError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise WireError(f"malformed {kind} message: {exc}") from exc
