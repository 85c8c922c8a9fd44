"""Rigid-body math shared by every module: unit quaternions, rotations,
and frame-tagged transforms.

Conventions
-----------
* Quaternions are numpy arrays of shape (4,), scalar first: [w, x, y, z].
  The Hamilton product is used throughout and unit quaternions are kept
  in the canonical half-space w >= 0 (q and -q encode the same rotation).
* Vectors are numpy arrays of shape (3,), float64.
* A :class:`Transform` carries explicit frame tags.  ``Transform(R, p,
  from_frame="He", to_frame="Hb")`` maps coordinates of a point expressed
  in frame ``He`` into frame ``Hb``; it is also the pose of frame ``He``
  relative to ``Hb``.  Composition requires the inner tags to match and
  raises :class:`FrameMismatchError` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Frame names used by the teleoperation chain.  Nothing in this module
# restricts tags to these four; they are provided so call sites and tests
# spell them consistently.
MASTER_BASE = "Hb"    # haptic-device base
STYLUS = "He"         # haptic-device end point (stylus)
ROBOT_BASE = "Rb"     # robot base
EFFECTOR = "Re"       # robot end-effector


class FrameMismatchError(ValueError):
    """Raised when transforms over incompatible frames are combined."""


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def quat(w: float, x: float, y: float, z: float) -> np.ndarray:
    return np.array([w, x, y, z], dtype=float)


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Return the unit quaternion with canonical sign (w >= 0).

    Raises ValueError on a near-zero norm, which cannot encode a rotation.
    """
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize a zero quaternion")
    q = q / n
    if q[0] < 0.0:
        q = -q
    return q


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b (apply b first, then a, for column vectors)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    # q * [0, v] * conj(q), expanded to avoid building temporaries.
    w, x, y, z = q
    vx, vy, vz = v
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return np.array([
        vx + w * tx + (y * tz - z * ty),
        vy + w * ty + (z * tx - x * tz),
        vz + w * tz + (x * ty - y * tx),
    ])


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < 1e-12:
        raise ValueError("axis must be nonzero")
    half = 0.5 * angle
    q = np.empty(4)
    q[0] = math.cos(half)
    q[1:] = (math.sin(half) / n) * axis
    return quat_normalize(q)


def matrix_from_quat(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix of a unit quaternion."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(R: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Convert a proper rotation matrix to a canonical unit quaternion.

    The matrix must be orthonormal with determinant +1 within ``tol``;
    anything else raises ValueError rather than silently projecting.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError("rotation matrix must be 3x3")
    if not np.allclose(R @ R.T, np.eye(3), atol=tol):
        raise ValueError("matrix is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > tol:
        raise ValueError("matrix determinant is not +1")

    # Shepperd's method: pick the largest of the four squared components.
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      0.25 * s])
    return quat_normalize(q)


def quat_slerp(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """Spherical interpolation from a (alpha=0) to b (alpha=1), shortest arc."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dot = float(np.dot(a, b))
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-10:
        return quat_normalize(a + alpha * (b - a))
    theta = math.acos(min(1.0, dot))
    sin_theta = math.sin(theta)
    wa = math.sin((1.0 - alpha) * theta) / sin_theta
    wb = math.sin(alpha * theta) / sin_theta
    return quat_normalize(wa * a + wb * b)


def quat_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Geodesic angle in radians between two unit quaternions."""
    dot = min(1.0, abs(float(np.dot(a, b))))
    return 2.0 * math.acos(dot)


@dataclass(frozen=True)
class Transform:
    """Rotation + translation with explicit frame bookkeeping.

    ``apply`` maps point coordinates from ``from_frame`` into ``to_frame``.
    Used both as a coordinate map and as the pose of ``from_frame``
    relative to ``to_frame`` (the translation is the origin of
    ``from_frame`` expressed in ``to_frame``).
    """

    rotation: np.ndarray      # unit quaternion, scalar first
    translation: np.ndarray   # (3,)
    from_frame: str
    to_frame: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", quat_normalize(self.rotation))
        object.__setattr__(self, "translation",
                           np.asarray(self.translation, dtype=float))
        if self.translation.shape != (3,):
            raise ValueError("translation must have shape (3,)")

    @staticmethod
    def identity(frame: str) -> "Transform":
        return Transform(quat_identity(), np.zeros(3), frame, frame)

    def apply(self, point: np.ndarray) -> np.ndarray:
        return quat_rotate(self.rotation, point) + self.translation

    def compose(self, other: "Transform") -> "Transform":
        """self o other: first apply ``other``, then ``self``."""
        if self.from_frame != other.to_frame:
            raise FrameMismatchError(
                f"cannot compose {self.to_frame}<-{self.from_frame} "
                f"with {other.to_frame}<-{other.from_frame}")
        return Transform(
            quat_multiply(self.rotation, other.rotation),
            self.apply(other.translation),
            other.from_frame,
            self.to_frame,
        )

    def __matmul__(self, other: "Transform") -> "Transform":
        return self.compose(other)

    def inverse(self) -> "Transform":
        rot_inv = quat_conjugate(self.rotation)
        return Transform(
            rot_inv,
            -quat_rotate(rot_inv, self.translation),
            self.to_frame,
            self.from_frame,
        )


# A pose is a transform read as "pose of from_frame expressed in to_frame".
Pose = Transform
