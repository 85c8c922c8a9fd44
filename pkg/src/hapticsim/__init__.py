"""Deterministic simulator of a haptic bilateral teleoperation system
writing on a blackboard: master-station pose pipeline, admittance-
controlled robot, interaction-force saturation, and two force-feedback
rendering paths, with scenario-level comparison metrics.

The realtime WebSocket layer lives in :mod:`hapticsim.service` and is
imported on demand so the numeric core stays dependency-light.
"""

from .admittance import (
    AdmittanceParams,
    AdmittanceState,
    ContactClassifier,
    ContactState,
    ReferenceSaturation,
    SaturationParams,
    ToolPayload,
    compensate_gravity,
    compliant_command,
    compute_keq,
    step_admittance,
)
from .config import (
    RENDER_MEASURED,
    RENDER_VIRTUALIZED,
    ConfigError,
    ScenarioConfig,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
    scenario,
)
from .environment import (
    BlackboardModel,
    ChalkState,
    RobotPlant,
    StrokeCanvas,
    contact_force,
)
from .master import MappingCalibration, PoseFilter, map_stylus_pose
from .metrics import (
    ForceProfile,
    continuity_metrics,
    extract_profile,
    human_reference,
    mean_difference,
    peak_difference,
    session_metrics,
    settle_and_bound,
)
from .operator import (
    LiveOperator,
    OperatorSample,
    ReplayOperator,
    ScriptedOperator,
    ScriptedTask,
)
from .rendering import (
    CoshMappingParams,
    DeviceLimits,
    VirtualCouplingParams,
    clamp_to_device,
    render_measured_cosh,
    render_virtualized,
)
from .se3 import FrameMismatchError, Pose, Transform
from .session import (
    SessionLog,
    SessionOutcome,
    StepSnapshot,
    TeleopSession,
    run_session,
)

__version__ = "0.1.0"

__all__ = [
    "AdmittanceParams",
    "AdmittanceState",
    "BlackboardModel",
    "ChalkState",
    "ConfigError",
    "ContactClassifier",
    "ContactState",
    "CoshMappingParams",
    "DeviceLimits",
    "ForceProfile",
    "FrameMismatchError",
    "LiveOperator",
    "MappingCalibration",
    "OperatorSample",
    "Pose",
    "PoseFilter",
    "RENDER_MEASURED",
    "RENDER_VIRTUALIZED",
    "ReferenceSaturation",
    "ReplayOperator",
    "RobotPlant",
    "SaturationParams",
    "ScenarioConfig",
    "ScriptedOperator",
    "ScriptedTask",
    "SessionLog",
    "SessionOutcome",
    "StepSnapshot",
    "StrokeCanvas",
    "TeleopSession",
    "ToolPayload",
    "Transform",
    "VirtualCouplingParams",
    "clamp_to_device",
    "compensate_gravity",
    "compliant_command",
    "compute_keq",
    "config_from_dict",
    "config_to_dict",
    "contact_force",
    "continuity_metrics",
    "extract_profile",
    "human_reference",
    "load_config",
    "map_stylus_pose",
    "mean_difference",
    "peak_difference",
    "render_measured_cosh",
    "render_virtualized",
    "run_session",
    "save_config",
    "scenario",
    "session_metrics",
    "settle_and_bound",
    "step_admittance",
]
