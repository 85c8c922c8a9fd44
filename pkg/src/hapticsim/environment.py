"""Simulated task environment: a planar writing board with one-sided
elastic contact and kinetic friction, a position-tracking robot plant,
a breakable chalk stick, and the stroke record accumulated on the board.

All geometry lives in the robot base frame.  ``contact_force`` returns
the reaction the environment applies to the robot, which is what a
wrist sensor observes: pressing into the board yields a force along the
outward board normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .se3 import Pose, quat_slerp

# Tangential speeds below this are treated as sticking; no friction force
# is emitted, which keeps the friction direction well defined.
FRICTION_SPEED_EPS = 1e-6


@dataclass(frozen=True)
class BlackboardModel:
    """Infinite plane with elastic normal contact and Coulomb sliding.

    ``origin`` is any point on the writing surface, ``normal`` its
    outward unit normal (pointing toward the approaching robot).
    ``stiffness`` is the normal contact stiffness, ``friction`` the
    kinetic coefficient, ``breakage_force`` the normal-force magnitude
    that snaps the chalk.
    """

    origin: np.ndarray = field(
        default_factory=lambda: np.array([0.40, 0.0, 0.30]))
    normal: np.ndarray = field(
        default_factory=lambda: np.array([-1.0, 0.0, 0.0]))
    stiffness: float = 3000.0
    friction: float = 0.4
    breakage_force: float = 30.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "origin",
                           np.asarray(self.origin, dtype=float))
        n = np.asarray(self.normal, dtype=float)
        norm = np.linalg.norm(n)
        if norm < 1e-12:
            raise ValueError("board normal must be nonzero")
        object.__setattr__(self, "normal", n / norm)
        if self.stiffness <= 0.0:
            raise ValueError("board stiffness must be positive")
        if self.friction < 0.0:
            raise ValueError("friction coefficient must be nonnegative")
        if self.breakage_force <= 0.0:
            raise ValueError("breakage force must be positive")

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Deterministic in-plane axes (u, v) with u x v = normal.

        v is the world-up direction projected into the plane when the
        board is not lying flat, so letters keep their upright reading;
        a flat board falls back to projecting world-x.
        """
        n = self.normal
        up = np.array([0.0, 0.0, 1.0])
        if abs(float(np.dot(up, n))) > 0.9:
            up = np.array([1.0, 0.0, 0.0])
        v = up - np.dot(up, n) * n
        v = v / np.linalg.norm(v)
        u = np.cross(v, n)
        return u, v

    def penetration(self, tip: np.ndarray) -> float:
        """Depth of the tip past the surface, zero when clear of it."""
        return max(0.0, float(np.dot(self.origin - np.asarray(tip), self.normal)))

    def to_board(self, tip: np.ndarray) -> np.ndarray:
        """Project a base-frame point to 2D board coordinates."""
        u, v = self.basis()
        d = np.asarray(tip, dtype=float) - self.origin
        return np.array([float(np.dot(d, u)), float(np.dot(d, v))])


def contact_force(board: BlackboardModel, tip: np.ndarray,
                  tip_velocity: np.ndarray) -> tuple[np.ndarray, float]:
    """Reaction force on the robot and the current penetration depth.

    One-sided spring along the outward normal plus kinetic Coulomb
    friction opposing the tangential tip velocity.  The friction
    magnitude is proportional to the normal force, so it can never
    exceed ``friction`` times the normal load and it vanishes with it.
    """
    depth = board.penetration(tip)
    if depth <= 0.0:
        return np.zeros(3), 0.0
    n = board.normal
    f_n = board.stiffness * depth
    force = f_n * n
    v = np.asarray(tip_velocity, dtype=float)
    v_t = v - np.dot(v, n) * n
    speed = float(np.linalg.norm(v_t))
    if speed > FRICTION_SPEED_EPS:
        force = force - board.friction * f_n * (v_t / speed)
    return force, depth


class ChalkState:
    """Latched breakage flag: once broken a chalk stays broken."""

    def __init__(self) -> None:
        self.intact = True
        self.broken_at: float | None = None

    def update(self, normal_force: float, breakage_force: float,
               t: float) -> bool:
        """Apply this cycle's normal load; returns True on a new break."""
        if self.intact and normal_force > breakage_force:
            self.intact = False
            self.broken_at = t
            return True
        return False


class StrokeCanvas:
    """Chalk marks on the board as ordered 2D polyline segments.

    Consecutive in-contact samples extend the open segment; any loss of
    contact closes it, so the segment count is exactly the number of
    pen-down episodes that left a mark.
    """

    def __init__(self) -> None:
        self.segments: list[list[np.ndarray]] = []
        self._open = False

    def deposit(self, board_point: np.ndarray, in_contact: bool,
                chalk_intact: bool) -> None:
        if in_contact and chalk_intact:
            if not self._open:
                self.segments.append([])
                self._open = True
            self.segments[-1].append(np.asarray(board_point, dtype=float))
        else:
            self._open = False

    @property
    def segment_count(self) -> int:
        return len(self.segments)

    def total_points(self) -> int:
        return sum(len(s) for s in self.segments)

    def as_arrays(self) -> list[np.ndarray]:
        return [np.array(s) for s in self.segments]


class RobotPlant:
    """First-order pose-tracking robot model.

    The inner position controller is abstracted as a low-pass from the
    commanded pose to the realized pose with the given bandwidth; the
    discrete update uses the exact zero-order-hold gain
    ``1 - exp(-2 pi B dt)``, so the plant is stable for any timestep and
    converges to ideal tracking as bandwidth grows.
    """

    def __init__(self, start: Pose, bandwidth_hz: float = 20.0):
        if bandwidth_hz <= 0.0:
            raise ValueError("plant bandwidth must be positive")
        self.pose = start
        self.bandwidth_hz = bandwidth_hz
        self._last_position = start.translation.copy()

    def step(self, p_cmd: np.ndarray, q_cmd: np.ndarray,
             dt: float) -> tuple[Pose, np.ndarray]:
        """Advance one cycle toward the command; returns (pose, velocity)."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        alpha = 1.0 - np.exp(-2.0 * np.pi * self.bandwidth_hz * dt)
        p_new = self.pose.translation + alpha * (np.asarray(p_cmd, dtype=float)
                                                 - self.pose.translation)
        q_new = quat_slerp(self.pose.rotation, q_cmd, alpha)
        velocity = (p_new - self.pose.translation) / dt
        self.pose = Pose(q_new, p_new, self.pose.from_frame,
                         self.pose.to_frame)
        return self.pose, velocity
