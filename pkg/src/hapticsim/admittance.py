"""Slave-side compliance: the admittance model that turns interaction
force into a position offset, the reference saturation that bounds
steady contact force, gravity compensation for the wrist sensor, and
the contact-state classifier.

Force sign convention used by every function here: ``f_e`` is the force
the robot exerts on the environment, so pressing into a surface gives a
positive component along the pressing direction.  The session layer owns
the single negation between this convention and what a wrist sensor
reads (the environment's reaction on the robot).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .se3 import quat_rotate, quat_conjugate


def _diag3(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape == ():
        a = np.full(3, float(a))
    if a.shape != (3,):
        raise ValueError(f"{name} must be a scalar or 3 diagonal entries")
    return a


@dataclass(frozen=True)
class AdmittanceParams:
    """Diagonal virtual mass/damper/spring and the desired contact force.

    Defaults give a well-damped response (damping ratio ~0.9) with a
    natural frequency near 3.6 Hz, slow enough that a 20 Hz position
    loop resolves the transient cleanly.
    """

    mass: np.ndarray = field(default_factory=lambda: np.full(3, 2.0))
    damping: np.ndarray = field(default_factory=lambda: np.full(3, 80.0))
    stiffness: np.ndarray = field(default_factory=lambda: np.full(3, 1000.0))
    desired_force: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "mass", _diag3(self.mass, "mass"))
        object.__setattr__(self, "damping", _diag3(self.damping, "damping"))
        object.__setattr__(self, "stiffness",
                           _diag3(self.stiffness, "stiffness"))
        object.__setattr__(self, "desired_force",
                           _diag3(self.desired_force, "desired_force"))
        if np.any(self.mass <= 0.0):
            raise ValueError("virtual mass entries must be positive")
        if np.any(self.damping < 0.0) or np.any(self.stiffness < 0.0):
            raise ValueError("damping and stiffness must be nonnegative")


@dataclass(frozen=True)
class AdmittanceState:
    """Deflection p~ and its rate, expressed in the effector frame."""

    error: np.ndarray = field(default_factory=lambda: np.zeros(3))
    error_rate: np.ndarray = field(default_factory=lambda: np.zeros(3))


def step_admittance(state: AdmittanceState, params: AdmittanceParams,
                    f_e: np.ndarray, dt: float) -> AdmittanceState:
    """One semi-implicit Euler step of M p~'' + D p~' + K p~ = f_e - f_d.

    Velocity updates first and the fresh velocity advances the position,
    which preserves the passive character of the discrete system.  With
    zero desired force a constant exerted force settles at
    p~ = f_e / K per axis.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    f_e = np.asarray(f_e, dtype=float)
    accel = (f_e - params.desired_force
             - params.damping * state.error_rate
             - params.stiffness * state.error) / params.mass
    rate = state.error_rate + accel * dt
    error = state.error + rate * dt
    return AdmittanceState(error, rate)


def compliant_command(p_d: np.ndarray, orientation: np.ndarray,
                      error: np.ndarray) -> np.ndarray:
    """Compliant position command in the robot base.

    The admittance deflection lives in the effector frame; the command
    backs the reference off by that deflection rotated into the base:
    p_c = p_d - R(q) p~.  Orientation passes through unchanged at the
    call site (the writing task holds the tool orientation fixed).
    """
    return np.asarray(p_d, dtype=float) - quat_rotate(orientation, error)


def compute_keq(stiffness: np.ndarray, env_stiffness: np.ndarray) -> np.ndarray:
    """Per-axis series stiffness K K_e / (K + K_e) of controller and contact.

    This is the slope relating steady contact force to commanded
    penetration.  A zero-stiffness axis pair is rejected because the
    series value would be undefined.
    """
    k_p = _diag3(stiffness, "stiffness")
    k_e = _diag3(env_stiffness, "env_stiffness")
    denom = k_p + k_e
    if np.any(denom <= 0.0):
        raise ValueError("stiffness + env_stiffness must be positive per axis")
    return k_p * k_e / denom


@dataclass(frozen=True)
class ToolPayload:
    """Rigid payload past the wrist sensor (chalk holder)."""

    mass: float = 0.15
    center_of_mass: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gravity: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, -9.81]))

    def __post_init__(self) -> None:
        object.__setattr__(self, "center_of_mass",
                           np.asarray(self.center_of_mass, dtype=float))
        object.__setattr__(self, "gravity",
                           np.asarray(self.gravity, dtype=float))


def compensate_gravity(f_meas: np.ndarray, orientation: np.ndarray,
                       tool: ToolPayload) -> np.ndarray:
    """Remove the tool weight from a wrist-sensor force reading.

    ``f_meas`` and the result are in the effector frame; ``orientation``
    is the effector orientation in the base.  The weight is constant in
    the base frame, so the sensed bias is R^T (m g).  Only the force
    channel is compensated here; the center of mass matters for torque
    channels, which the writing task does not use.
    """
    weight = tool.mass * tool.gravity
    bias = quat_rotate(quat_conjugate(orientation), weight)
    return np.asarray(f_meas, dtype=float) - bias


# ---------------------------------------------------------------------
# Reference saturation
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class SaturationParams:
    """Per-axis force ceiling and the environment stiffness estimate.

    ``threshold`` is the largest sustained contact force the task
    allows.  ``env_stiffness_est`` feeds the series-stiffness model
    used to place the clamped reference; overestimating it makes the
    clamp conservative (settles below threshold), underestimating it
    overshoots, so when in doubt estimate high.
    """

    threshold: np.ndarray = field(default_factory=lambda: np.full(3, 12.0))
    env_stiffness_est: np.ndarray = field(
        default_factory=lambda: np.full(3, 3000.0))
    enabled: bool = True
    contact_epsilon: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "threshold",
                           _diag3(self.threshold, "threshold"))
        object.__setattr__(self, "env_stiffness_est",
                           _diag3(self.env_stiffness_est, "env_stiffness_est"))
        if np.any(self.threshold <= 0.0):
            raise ValueError("saturation thresholds must be positive")


class ReferenceSaturation:
    """Per-axis clamp on the desired position when contact force peaks.

    Passes the reference through until the exerted force magnitude on an
    axis crosses its threshold.  At the crossing the axis latches:

    * a rest-position estimate ``p_rest``, taken as the last compliant
      command seen before contact force appeared on that axis (a good
      surface proxy because the pre-contact command carries no elastic
      deflection), and
    * the clamped reference ``p_rest + s * f_th / k_eq`` where ``s`` is
      the pressing direction and ``k_eq`` the series stiffness from the
      stiffness estimate, i.e. the reference that sustains exactly the
      threshold force under the estimated contact model.

    While latched the axis outputs whichever of raw reference and clamp
    is shallower: pressing deeper than the clamp is blocked, retreating
    is always allowed.  The latch releases only when the force has
    dropped below threshold and the raw reference sits on the free side
    of the clamp, so grazing the threshold cannot chatter the clamp on
    and off.
    """

    def __init__(self, params: SaturationParams,
                 controller_stiffness: np.ndarray):
        self.params = params
        self.k_eq = compute_keq(controller_stiffness,
                                params.env_stiffness_est)
        self.active = np.zeros(3, dtype=bool)
        self.clamp = np.zeros(3)
        self._press_dir = np.zeros(3)
        self._rest = np.zeros(3)
        self._rest_valid = np.zeros(3, dtype=bool)
        self._free_command = np.zeros(3)

    def reset(self) -> None:
        self.active[:] = False
        self._rest_valid[:] = False

    def step(self, p_h: np.ndarray, f_e: np.ndarray,
             p_c_last: np.ndarray) -> np.ndarray:
        """Return the (possibly clamped) reference for this cycle.

        ``p_h`` is the filtered reference, ``f_e`` the exerted force from
        the previous cycle in the same frame, ``p_c_last`` the previous
        compliant command used to maintain the rest-position estimate.
        """
        if not self.params.enabled:
            return np.asarray(p_h, dtype=float)
        p_h = np.asarray(p_h, dtype=float)
        f_e = np.asarray(f_e, dtype=float)
        out = p_h.copy()
        for j in range(3):
            mag = abs(f_e[j])
            if mag < self.params.contact_epsilon:
                self._rest_valid[j] = False
            elif not self._rest_valid[j]:
                # First force on this axis: the previous command is the
                # best available rest-position sample.
                self._rest[j] = self._free_command[j]
                self._rest_valid[j] = True

            if not self.active[j]:
                if mag > self.params.threshold[j]:
                    if self.k_eq[j] <= 0.0:
                        raise ValueError(
                            "saturation requires positive equivalent "
                            f"stiffness on axis {j}")
                    s = 1.0 if f_e[j] > 0.0 else -1.0
                    rest = self._rest[j] if self._rest_valid[j] \
                        else p_c_last[j]
                    self.active[j] = True
                    self._press_dir[j] = s
                    self.clamp[j] = rest + s * (self.params.threshold[j]
                                                / self.k_eq[j])
                    if s * (p_h[j] - self.clamp[j]) > 0.0:
                        out[j] = self.clamp[j]
            else:
                retreated = (self._press_dir[j] * (p_h[j] - self.clamp[j])
                             < 0.0)
                if mag < self.params.threshold[j] and retreated:
                    self.active[j] = False
                elif not retreated:
                    out[j] = self.clamp[j]
        self._free_command = np.asarray(p_c_last, dtype=float).copy()
        return out


# ---------------------------------------------------------------------
# Contact-state classification
# ---------------------------------------------------------------------

class ContactState(enum.Enum):
    NO_CONTACT = "no_contact"
    COLLISION = "collision"
    PENETRATION = "penetration"
    SATURATION = "saturation"


class ContactClassifier:
    """Tracks the interaction phase from force magnitude and clamp flags.

    A rising force edge opens a collision window of ``collision_window``
    seconds; persisting force beyond the window is penetration; an
    active reference clamp dominates everything.  Losing contact resets
    the edge so the next touch classifies as a fresh collision.
    """

    def __init__(self, force_epsilon: float = 0.5,
                 collision_window: float = 0.05):
        if force_epsilon <= 0.0 or collision_window < 0.0:
            raise ValueError("epsilon must be positive, window nonnegative")
        self.force_epsilon = force_epsilon
        self.collision_window = collision_window
        self._onset: float | None = None

    def reset(self) -> None:
        self._onset = None

    def classify(self, t: float, force_mag: float,
                 saturation_active: bool) -> ContactState:
        in_contact = force_mag >= self.force_epsilon
        if in_contact and self._onset is None:
            self._onset = t
        if not in_contact:
            self._onset = None
        if saturation_active:
            return ContactState.SATURATION
        if not in_contact:
            return ContactState.NO_CONTACT
        if t - self._onset < self.collision_window:
            return ContactState.COLLISION
        return ContactState.PENETRATION
