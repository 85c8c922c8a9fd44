"""Sources of stylus motion driving a session.

Every operator produces one stylus pose per control cycle in the device
base frame through ``sample(i, t, feedback)``, where ``feedback`` is the
force rendered on the device at the previous cycle (never the current
one; the loop enforces a one-cycle delay from slave to master).

* :class:`ReplayOperator` plays a recorded CSV trace.
* :class:`ScriptedOperator` synthesizes a writing task: travel, approach,
  trace and retract phases over letter strokes, with optional
  physiologically banded tremor and an optional compliant-hand response
  to the rendered force.
* :class:`LiveOperator` is fed over the network and holds the last pose.
"""

from __future__ import annotations

import csv
import io
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import letters as letters_mod
from .environment import BlackboardModel
from .se3 import (
    MASTER_BASE,
    STYLUS,
    Pose,
    quat_conjugate,
    quat_from_axis_angle,
    quat_identity,
    quat_multiply,
    quat_normalize,
    quat_rotate,
)

REPLAY_HEADER = ["t", "px", "py", "pz", "qw", "qx", "qy", "qz"]


@dataclass(frozen=True)
class OperatorSample:
    position: np.ndarray
    orientation: np.ndarray

    def as_pose(self) -> Pose:
        return Pose(self.orientation, self.position, STYLUS, MASTER_BASE)


class ReplayOperator:
    """Zero-order-hold playback of a recorded stylus trace."""

    def __init__(self, times: np.ndarray, positions: np.ndarray,
                 orientations: np.ndarray):
        if len(times) == 0:
            raise ValueError("replay trace is empty")
        if np.any(np.diff(times) < 0.0):
            raise ValueError("replay timestamps must be nondecreasing")
        self.times = np.asarray(times, dtype=float)
        self.positions = np.asarray(positions, dtype=float)
        self.orientations = np.asarray(orientations, dtype=float)
        self.duration = float(self.times[-1])

    @classmethod
    def from_csv(cls, path: str | Path) -> "ReplayOperator":
        text = Path(path).read_text()
        return cls.from_csv_text(text)

    @classmethod
    def from_csv_text(cls, text: str) -> "ReplayOperator":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != REPLAY_HEADER:
            raise ValueError(
                f"replay CSV must start with header {','.join(REPLAY_HEADER)}")
        rows = [[float(x) for x in row] for row in reader if row]
        if not rows:
            raise ValueError("replay trace is empty")
        data = np.array(rows)
        qs = np.array([quat_normalize(q) for q in data[:, 4:8]])
        return cls(data[:, 0], data[:, 1:4], qs)

    def sample(self, i: int, t: float, feedback: np.ndarray) -> OperatorSample:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        k = max(0, min(k, len(self.times) - 1))
        return OperatorSample(self.positions[k].copy(),
                              self.orientations[k].copy())


@dataclass(frozen=True)
class TremorParams:
    """Band-limited involuntary motion added to the scripted hand path."""

    rms: float = 1.5e-3            # meters
    band_hz: tuple[float, float] = (8.0, 12.0)
    rotation_rms: float = 0.0035   # radians (~0.2 deg)
    components: int = 8
    seed: int = 0


@dataclass(frozen=True)
class HandComplianceParams:
    """First-order yield of the hand under the rendered force.

    Disabled by default: the baseline operator is a pure position
    source.  When enabled, the hand drifts toward an offset of
    ``yield_per_newton`` meters per rendered newton, opposing the
    rendered force direction, with time constant ``tau``.  This is a
    deliberately simple stand-in for the human arm used to study how
    feedback quality feeds back into the written result.
    """

    enabled: bool = False
    yield_per_newton: float = 1.2e-3
    tau: float = 0.06


@dataclass(frozen=True)
class ScriptedTask:
    """Everything that defines a deterministic writing performance."""

    text: str = "ACG"
    letter_height: float = 0.06
    letter_spacing: float = 0.02
    board_origin_uv: tuple[float, float] = (-0.08, -0.03)
    write_speed: float = 0.05      # m/s along the stroke
    travel_speed: float = 0.12     # m/s between strokes
    approach_speed: float = 0.05   # m/s normal to the board
    hover: float = 0.012           # m above the surface between strokes
    press_depth: float = 0.030     # commanded penetration while writing
    depth_modulation: float = 0.0  # extra penetration amplitude
    modulation_period: float = 1.6
    settle_time: float = 0.6       # hold at start before moving
    tail_time: float = 0.5         # hold after the last retract
    tremor: TremorParams = field(default_factory=TremorParams)
    compliance: HandComplianceParams = field(
        default_factory=HandComplianceParams)


class _BandNoise:
    """Deterministic band-limited noise as a finite sum of sinusoids."""

    def __init__(self, rms: float, band: tuple[float, float], n: int,
                 rng: np.random.Generator, channels: int):
        self.freqs = rng.uniform(band[0], band[1], size=(channels, n))
        self.phases = rng.uniform(0.0, 2.0 * math.pi, size=(channels, n))
        self.amp = rms * math.sqrt(2.0 / n) if n > 0 else 0.0

    def at(self, t: float) -> np.ndarray:
        if self.amp == 0.0:
            return np.zeros(self.freqs.shape[0])
        arg = 2.0 * math.pi * self.freqs * t + self.phases
        return self.amp * np.sin(arg).sum(axis=1)


class ScriptedOperator:
    """Synthesizes the stylus trajectory for a letter-writing task.

    The plan is laid out in robot-base coordinates on the configured
    board and converted to stylus coordinates through the inverse of the
    master-to-robot map, so a session calibrated from this operator's
    first sample reproduces the plan exactly.  All randomness (tremor)
    is drawn from one seeded generator at construction; sampling is pure
    lookup plus the optional compliance state, which is the only part
    that depends on feedback.
    """

    def __init__(self, task: ScriptedTask, board: BlackboardModel,
                 robot_start: np.ndarray, rate_hz: float,
                 base_rotation: np.ndarray | None = None,
                 stylus_origin: np.ndarray | None = None):
        self.task = task
        self.board = board
        self.rate_hz = float(rate_hz)
        self.dt = 1.0 / self.rate_hz
        self.base_rotation = quat_identity() if base_rotation is None \
            else quat_normalize(base_rotation)
        self.stylus_origin = np.zeros(3) if stylus_origin is None \
            else np.asarray(stylus_origin, dtype=float)
        self.robot_start = np.asarray(robot_start, dtype=float)

        strokes = letters_mod.layout_text(task.text, task.letter_height,
                                          task.letter_spacing,
                                          task.board_origin_uv)
        self.intended_segments = len(strokes)
        rng = np.random.default_rng(task.tremor.seed)
        self._pos_noise = _BandNoise(task.tremor.rms, task.tremor.band_hz,
                                     task.tremor.components, rng, 3)
        self._rot_noise = _BandNoise(task.tremor.rotation_rms,
                                     task.tremor.band_hz,
                                     task.tremor.components, rng, 3)
        self._nominal, self._pen_down = self._synthesize(strokes)
        self.duration = (len(self._nominal) - 1) * self.dt
        self._hand_offset = np.zeros(3)

    # -- plan construction --------------------------------------------

    def _board_point(self, uv: np.ndarray, height: float) -> np.ndarray:
        """Base-frame point at board coords ``uv``, ``height`` above it."""
        u, v = self.board.basis()
        return (self.board.origin + uv[0] * u + uv[1] * v
                + height * self.board.normal)

    def _depth(self, t: float) -> float:
        d = self.task.press_depth
        if self.task.depth_modulation > 0.0:
            d += self.task.depth_modulation * math.sin(
                2.0 * math.pi * t / self.task.modulation_period)
        return max(1e-4, d)

    def _synthesize(self, strokes: list[np.ndarray]) \
            -> tuple[np.ndarray, np.ndarray]:
        dt = self.dt
        points: list[np.ndarray] = []
        pen: list[bool] = []
        t = 0.0

        def emit(p: np.ndarray, down: bool) -> None:
            nonlocal t
            points.append(p)
            pen.append(down)
            t += dt

        def line_to(target: np.ndarray, speed: float, down: bool) -> None:
            start = points[-1].copy()
            dist = float(np.linalg.norm(target - start))
            steps = max(1, int(math.ceil(dist / (speed * dt))))
            for k in range(1, steps + 1):
                emit(start + (target - start) * (k / steps), down)

        emit(self.robot_start.copy(), False)
        for _ in range(int(round(self.task.settle_time / dt))):
            emit(points[-1].copy(), False)

        for stroke in strokes:
            hover_start = self._board_point(stroke[0], self.task.hover)
            line_to(hover_start, self.task.travel_speed, False)
            # Descend through the surface to the commanded depth.
            line_to(self._board_point(stroke[0], -self._depth(t)),
                    self.task.approach_speed, True)
            for a, b in zip(stroke[:-1], stroke[1:]):
                seg_len = float(np.linalg.norm(b - a))
                steps = max(1, int(math.ceil(
                    seg_len / (self.task.write_speed * dt))))
                for k in range(1, steps + 1):
                    uv = a + (b - a) * (k / steps)
                    emit(self._board_point(uv, -self._depth(t)), True)
            # Lift decisively; a slow crossing would let tremor graze.
            line_to(self._board_point(stroke[-1], self.task.hover),
                    self.task.travel_speed, False)
        for _ in range(int(round(self.task.tail_time / dt))):
            emit(points[-1].copy(), False)
        return np.array(points), np.array(pen, dtype=bool)

    # -- sampling ------------------------------------------------------

    def _to_stylus(self, p_robot: np.ndarray) -> np.ndarray:
        inv = quat_conjugate(self.base_rotation)
        return self.stylus_origin + quat_rotate(inv,
                                                p_robot - self.robot_start)

    def sample(self, i: int, t: float, feedback: np.ndarray) -> OperatorSample:
        k = min(int(round(t / self.dt)), len(self._nominal) - 1)
        p_robot = self._nominal[k]
        c = self.task.compliance
        if c.enabled:
            # The hand yields away from the force the device pushes back
            # with; first-order lag approximates limb dynamics.
            target = -c.yield_per_newton * np.asarray(feedback, dtype=float)
            alpha = 1.0 - math.exp(-self.dt / c.tau)
            self._hand_offset = self._hand_offset + alpha * (
                target - self._hand_offset)
        p = self._to_stylus(p_robot) + self._pos_noise.at(t)
        if c.enabled:
            p = p + self._hand_offset
        rot = self._rot_noise.at(t)
        q = quat_identity()
        for axis in range(3):
            if rot[axis] != 0.0:
                axis_vec = np.zeros(3)
                axis_vec[axis] = 1.0
                q = quat_multiply(q, quat_from_axis_angle(axis_vec,
                                                          rot[axis]))
        return OperatorSample(p, quat_normalize(q))

    def pen_down_nominal(self, t: float) -> bool:
        k = min(int(round(t / self.dt)), len(self._pen_down) - 1)
        return bool(self._pen_down[k])


class LiveOperator:
    """Network-fed stylus source; holds the last received pose.

    ``push`` may be called from any thread.  ``sample`` drains pending
    inputs and returns the newest, so a slow or bursty client cannot
    stall the control loop.
    """

    def __init__(self, start_position: np.ndarray | None = None):
        self._lock = threading.Lock()
        self._latest = OperatorSample(
            np.zeros(3) if start_position is None
            else np.asarray(start_position, dtype=float),
            quat_identity())
        self._received = 0
        self.duration: float | None = None

    def push(self, position: np.ndarray, orientation: np.ndarray) -> None:
        sample = OperatorSample(np.asarray(position, dtype=float),
                                quat_normalize(orientation))
        with self._lock:
            self._latest = sample
            self._received += 1

    @property
    def received(self) -> int:
        with self._lock:
            return self._received

    def sample(self, i: int, t: float, feedback: np.ndarray) -> OperatorSample:
        with self._lock:
            return self._latest
