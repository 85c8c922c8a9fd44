"""Force feedback rendered on the haptic device.

Two independent feedback pipelines:

* ``render_virtualized`` displays the position error between the
  operator's reference and the robot's compliant command through a
  virtual spring-damper.  It needs no force sensing at the master and
  stays smooth through contact transitions because the error grows
  continuously from zero.
* ``render_measured_cosh`` replays the measured interaction force
  through a per-axis hyperbolic-cosine magnitude map that compresses
  small forces and emphasises the approach to each axis ceiling.

Both produce forces in the device base frame and are clamped to the
device capability before being commanded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .se3 import Pose, quat_conjugate, quat_multiply, quat_rotate


@dataclass(frozen=True)
class VirtualCouplingParams:
    """Spring and damper gains of the virtualized display."""

    stiffness: np.ndarray = field(default_factory=lambda: np.full(3, 300.0))
    damping: np.ndarray = field(default_factory=lambda: np.full(3, 5.0))

    def __post_init__(self) -> None:
        object.__setattr__(self, "stiffness",
                           np.asarray(self.stiffness, dtype=float))
        object.__setattr__(self, "damping",
                           np.asarray(self.damping, dtype=float))
        if np.any(self.stiffness < 0.0) or np.any(self.damping < 0.0):
            raise ValueError("rendering gains must be nonnegative")


@dataclass(frozen=True)
class CoshMappingParams:
    """Per-axis scaling of the measured-force display.

    ``force_scale`` is the axis force at which the displayed magnitude
    reaches exactly 4 N; at half that force it reaches sqrt(2.5) N.
    ``deadzone`` suppresses the mapping's unit offset at zero so sensor
    noise does not render a standing 1 N bias.
    """

    force_scale: np.ndarray = field(default_factory=lambda: np.full(3, 12.0))
    deadzone: float = 0.25

    def __post_init__(self) -> None:
        object.__setattr__(self, "force_scale",
                           np.asarray(self.force_scale, dtype=float))
        if np.any(self.force_scale <= 0.0):
            raise ValueError("force_scale entries must be positive")
        if self.deadzone < 0.0:
            raise ValueError("deadzone must be nonnegative")


@dataclass(frozen=True)
class DeviceLimits:
    """Peak continuous force the haptic device can sustain per axis."""

    f_max: np.ndarray = field(default_factory=lambda: np.full(3, 7.9))

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_max",
                           np.asarray(self.f_max, dtype=float))
        if np.any(self.f_max <= 0.0):
            raise ValueError("device force limits must be positive")


# Argument scale making cosh hit exactly 4 at unit normalized force.
COSH_GAIN = math.log(4.0 + math.sqrt(15.0))


def frame_error_to_haptic(p_h: np.ndarray, p_c: np.ndarray,
                          error_rate: np.ndarray, base_rotation: np.ndarray,
                          effector_pose: Pose) -> tuple[np.ndarray, np.ndarray]:
    """Rotate the tracking error and its rate into the device base.

    ``p_h`` and ``p_c`` are the unsaturated reference and the compliant
    command in the robot base; ``error_rate`` is the admittance
    deflection rate in the effector frame; ``base_rotation`` maps device
    base to robot base.  Using the unsaturated reference is deliberate:
    while the reference clamp holds the robot back, the displayed error
    keeps growing with the operator's push, signalling the pressure that
    the robot is refusing to apply.
    """
    to_device = quat_conjugate(base_rotation)
    err = quat_rotate(to_device, np.asarray(p_h) - np.asarray(p_c))
    rate = quat_rotate(quat_multiply(to_device, effector_pose.rotation),
                       error_rate)
    return err, rate


def render_virtualized(error: np.ndarray, error_rate: np.ndarray,
                       params: VirtualCouplingParams) -> np.ndarray:
    """Spring-damper display of the tracking error, device base frame."""
    return (params.stiffness * np.asarray(error, dtype=float)
            + params.damping * np.asarray(error_rate, dtype=float))


def measured_force_to_haptic(f_effector: np.ndarray,
                             base_rotation: np.ndarray,
                             effector_pose: Pose) -> np.ndarray:
    """Rotate an effector-frame force into the device base frame."""
    chain = quat_multiply(quat_conjugate(base_rotation),
                          effector_pose.rotation)
    return quat_rotate(chain, np.asarray(f_effector, dtype=float))


def rotate_force_scale(force_scale: np.ndarray, base_rotation: np.ndarray,
                       effector_pose: Pose) -> np.ndarray:
    """Axis ceilings of the cosh map expressed in the device base.

    The per-axis scale vector rides the same rotation chain as the
    measured force.  Rotation can mix axes and flip signs, so the
    magnitude is taken per axis; a rotation that nearly zeroes a
    component leaves the mapping undefined there and is rejected.
    """
    rotated = measured_force_to_haptic(force_scale, base_rotation,
                                       effector_pose)
    rotated = np.abs(rotated)
    if np.any(rotated < 1e-9):
        raise ValueError("mounting rotation collapses a cosh axis scale; "
                         "configure device-frame scales explicitly")
    return rotated


def render_measured_cosh(f_dev: np.ndarray,
                         params: CoshMappingParams) -> np.ndarray:
    """Per-axis cosh magnitude map of the measured force, sign preserved.

    For axis j with scale fbar: |out| = cosh(ln(4 + sqrt(15)) * f / fbar),
    so |out| = 4 exactly at |f| = fbar and sqrt(2.5) at fbar / 2.  Inputs
    inside the deadzone render zero, removing the map's +1 N offset at
    rest.
    """
    f_dev = np.asarray(f_dev, dtype=float)
    out = np.zeros(3)
    for j in range(3):
        f = f_dev[j]
        if abs(f) < params.deadzone:
            continue
        mag = math.cosh(COSH_GAIN * f / params.force_scale[j])
        out[j] = math.copysign(mag, f)
    return out


def clamp_to_device(f: np.ndarray, limits: DeviceLimits) -> np.ndarray:
    """Saturate each axis to the device's force capability."""
    f = np.asarray(f, dtype=float)
    return np.clip(f, -limits.f_max, limits.f_max)
