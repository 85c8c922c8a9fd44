"""Master-station processing: stylus-to-robot pose mapping and the
smoothing filters applied to the mapped reference.

The haptic stylus pose arrives in the device base frame ``Hb``.  Mapping
into the robot base frame ``Rb`` is a fixed rotation plus a relative
translation anchored at the poses captured when streaming starts, so the
robot end-effector mirrors stylus displacements 1:1 (no scaling).

Both filters run in O(1) per sample regardless of window length:

* positions keep a running window sum updated by add-newest /
  subtract-oldest;
* orientations keep a running 4x4 accumulator of quaternion outer
  products whose principal eigenvector is the window average
  (antipodal-safe: q and -q contribute identically).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .se3 import (
    EFFECTOR,
    MASTER_BASE,
    ROBOT_BASE,
    STYLUS,
    Pose,
    Transform,
    quat_identity,
    quat_normalize,
)

# Running sums drift by accumulated rounding; a periodic exact re-sum keeps
# the window sum representative of the buffered samples indefinitely.
RESUM_INTERVAL = 2 ** 16


@dataclass(frozen=True)
class MappingCalibration:
    """Fixed quantities of the master-to-robot map.

    ``base_rotation`` aligns device-base axes with robot-base axes
    (maps Hb coordinates into Rb).  ``tool_rotation`` is the constant
    right-hand factor accounting for how the effector frame is mounted
    relative to the stylus frame; with an identity value the effector
    orientation equals the mapped stylus orientation.  ``stylus_start``
    and ``effector_start`` are the positions captured before streaming
    begins; they anchor the 1:1 relative translation.
    """

    base_rotation: np.ndarray = field(default_factory=quat_identity)
    tool_rotation: np.ndarray = field(default_factory=quat_identity)
    stylus_start: np.ndarray = field(default_factory=lambda: np.zeros(3))
    effector_start: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "base_rotation",
                           quat_normalize(self.base_rotation))
        object.__setattr__(self, "tool_rotation",
                           quat_normalize(self.tool_rotation))
        object.__setattr__(self, "stylus_start",
                           np.asarray(self.stylus_start, dtype=float))
        object.__setattr__(self, "effector_start",
                           np.asarray(self.effector_start, dtype=float))


def map_stylus_pose(stylus: Pose, calib: MappingCalibration) -> Pose:
    """Map a stylus pose in Hb to the commanded effector pose in Rb.

    Orientation chains the fixed base rotation, the stylus rotation and
    the fixed tool rotation.  Position is the effector start plus the
    stylus displacement rotated into the robot base, which preserves
    metric distances (1:1 mapping, no scale).
    """
    if stylus.to_frame != MASTER_BASE or stylus.from_frame != STYLUS:
        raise ValueError(
            f"expected a {STYLUS}->{MASTER_BASE} pose, got "
            f"{stylus.from_frame}->{stylus.to_frame}")
    base = Transform(calib.base_rotation, np.zeros(3), MASTER_BASE, ROBOT_BASE)
    tool = Transform(calib.tool_rotation, np.zeros(3), EFFECTOR, STYLUS)
    chained = base @ stylus @ tool
    position = calib.effector_start + base.apply(
        stylus.translation - calib.stylus_start)
    return Pose(chained.rotation, position, EFFECTOR, ROBOT_BASE)


class PoseFilter:
    """Windowed mean over the last ``window`` mapped poses.

    Until the window fills, averages run over the samples seen so far,
    so the first output equals the first input (no start-up transient
    toward zero).  ``filter_position`` and ``filter_orientation`` keep
    independent sample counts and may be exercised separately.
    """

    def __init__(self, window: int):
        if window < 1:
            raise ValueError("filter window must be >= 1")
        self.window = window
        self.reset()

    def reset(self) -> None:
        """Drop all buffered state; the window capacity is unchanged."""
        self._positions = np.zeros((self.window, 3))
        self._pos_count = 0
        self._pos_sum = np.zeros(3)
        self._quats = np.zeros((self.window, 4))
        self._quat_count = 0
        self._accumulator = np.zeros((4, 4))
        self._average = None

    # -- positions ---------------------------------------------------

    def filter_position(self, p: np.ndarray) -> np.ndarray:
        """O(1) moving average: add the newest sample, retire the oldest."""
        p = np.asarray(p, dtype=float)
        slot = self._pos_count % self.window
        if self._pos_count >= self.window:
            self._pos_sum -= self._positions[slot]
        self._positions[slot] = p
        self._pos_sum += p
        self._pos_count += 1
        if self._pos_count % RESUM_INTERVAL == 0:
            self._pos_sum = self._positions[:min(self._pos_count,
                                                 self.window)].sum(axis=0)
        m = min(self._pos_count, self.window)
        return self._pos_sum / m

    # -- orientations ------------------------------------------------

    def filter_orientation(self, q: np.ndarray) -> np.ndarray:
        """Window average as the principal eigenvector of sum(q q^T).

        The accumulator update is add-newest / subtract-oldest like the
        position path.  The eigenvector is tracked by power iteration
        warm-started from the previous output (at most 10 sweeps); if a
        near-degenerate window leaves the iterate short of convergence,
        one exact 4x4 eigendecomposition restores it.  Output is unit
        with w >= 0.
        """
        q = quat_normalize(q)
        slot = self._quat_count % self.window
        if self._quat_count >= self.window:
            old = self._quats[slot]
            self._accumulator -= np.outer(old, old)
        self._quats[slot] = q
        self._accumulator += np.outer(q, q)
        self._quat_count += 1
        if self._quat_count % RESUM_INTERVAL == 0:
            buf = self._quats[:min(self._quat_count, self.window)]
            self._accumulator = buf.T @ buf

        if self._average is None:
            self._average = q.copy()
        v = self._average
        lam = 0.0
        for _ in range(10):
            w = self._accumulator @ v
            lam = float(np.linalg.norm(w))
            if lam < 1e-15:
                break
            w = w / lam
            if abs(float(np.dot(w, v))) > 1.0 - 1e-15:
                v = w
                break
            v = w
        residual = float(np.linalg.norm(self._accumulator @ v - lam * v))
        if residual > 1e-9 * max(lam, 1.0):
            vals, vecs = np.linalg.eigh(self._accumulator)
            v = vecs[:, -1]
        self._average = quat_normalize(v)
        return self._average.copy()

    # -- introspection used by tests ----------------------------------

    @property
    def accumulator(self) -> np.ndarray:
        return self._accumulator.copy()

    @property
    def position_sum(self) -> np.ndarray:
        return self._pos_sum.copy()

    def buffered_positions(self) -> np.ndarray:
        return self._positions[:min(self._pos_count, self.window)].copy()
