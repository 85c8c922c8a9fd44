"""The bilateral control loop.

One :class:`TeleopSession` owns every stateful piece of the chain and
advances them in a fixed order each cycle:

1. read the operator's stylus sample (feedback it sees is one cycle old)
2. map the stylus pose into the robot base
3. filter position and orientation
4. clamp the reference if saturation is enabled (previous cycle's force)
5. advance the admittance state (previous cycle's force)
6. form the compliant command and step the robot plant
7. evaluate the environment: contact force, chalk, stroke deposition
8. render feedback for the device and clamp it to device limits
9. append one log record

The force that drives steps 4-5 is always the one sensed after the
previous plant update, so information crosses master to slave and back
with an explicit one-cycle delay and the loop stays causal.

Sign bookkeeping: the environment returns the reaction on the robot;
the wrist sensor reads that plus the tool weight; the admittance and
the saturation logic take the force the robot exerts on the
environment, which is the negated compensated reading.  Logs store the
compensated sensor-side force in the robot base, so pressing against
the board shows up negative along the board's outward normal, matching
how force-plate recordings of human writing read.  Rendered feedback
``f_h`` uses the opposite (applied-force) convention in both modes:
positive while pressing, the force the operator is working against.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .admittance import (
    AdmittanceState,
    ContactClassifier,
    ContactState,
    ReferenceSaturation,
    compensate_gravity,
    compliant_command,
    step_admittance,
)
from .config import RENDER_MEASURED, RENDER_VIRTUALIZED, ScenarioConfig
from .environment import ChalkState, RobotPlant, StrokeCanvas, contact_force
from .master import MappingCalibration, PoseFilter, map_stylus_pose
from .operator import OperatorSample
from .rendering import (
    CoshMappingParams,
    clamp_to_device,
    frame_error_to_haptic,
    measured_force_to_haptic,
    render_measured_cosh,
    render_virtualized,
    rotate_force_scale,
)
from .se3 import EFFECTOR, ROBOT_BASE, Pose, quat_conjugate, quat_rotate

LOG_COLUMNS = (
    ["t"]
    + ["sp_x", "sp_y", "sp_z", "sq_w", "sq_x", "sq_y", "sq_z"]
    + ["ph_x", "ph_y", "ph_z"]
    + ["pd_x", "pd_y", "pd_z"]
    + ["pc_x", "pc_y", "pc_z"]
    + ["rp_x", "rp_y", "rp_z", "rq_w", "rq_x", "rq_y", "rq_z"]
    + ["fe_x", "fe_y", "fe_z"]
    + ["fh_x", "fh_y", "fh_z"]
    + ["contact_state"]
    + ["sat_x", "sat_y", "sat_z"]
    + ["chalk_intact"]
    + ["adm_err_x", "adm_err_y", "adm_err_z"]
    + ["adm_rate_x", "adm_rate_y", "adm_rate_z"]
)


class SessionLog:
    """Column-oriented per-cycle record with byte-stable CSV round-trip."""

    def __init__(self) -> None:
        self.t: list[float] = []
        self.stylus_p: list[np.ndarray] = []
        self.stylus_q: list[np.ndarray] = []
        self.p_h: list[np.ndarray] = []
        self.p_d: list[np.ndarray] = []
        self.p_c: list[np.ndarray] = []
        self.plant_p: list[np.ndarray] = []
        self.plant_q: list[np.ndarray] = []
        self.f_e: list[np.ndarray] = []
        self.f_h: list[np.ndarray] = []
        self.contact_state: list[str] = []
        self.sat_flags: list[np.ndarray] = []
        self.chalk_intact: list[bool] = []
        self.adm_err: list[np.ndarray] = []
        self.adm_rate: list[np.ndarray] = []

    def __len__(self) -> int:
        return len(self.t)

    def append(self, **kw) -> None:
        self.t.append(kw["t"])
        self.stylus_p.append(kw["stylus_p"])
        self.stylus_q.append(kw["stylus_q"])
        self.p_h.append(kw["p_h"])
        self.p_d.append(kw["p_d"])
        self.p_c.append(kw["p_c"])
        self.plant_p.append(kw["plant_p"])
        self.plant_q.append(kw["plant_q"])
        self.f_e.append(kw["f_e"])
        self.f_h.append(kw["f_h"])
        self.contact_state.append(kw["contact_state"])
        self.sat_flags.append(kw["sat_flags"])
        self.chalk_intact.append(kw["chalk_intact"])
        self.adm_err.append(kw["adm_err"])
        self.adm_rate.append(kw["adm_rate"])

    def column(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name))

    def to_csv(self) -> str:
        """Render as CSV with shortest-round-trip floats (bit exact)."""
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for i in range(len(self.t)):
            row: list[str] = [repr(float(self.t[i]))]
            for vec in (self.stylus_p[i], self.stylus_q[i], self.p_h[i],
                        self.p_d[i], self.p_c[i], self.plant_p[i],
                        self.plant_q[i], self.f_e[i], self.f_h[i]):
                row.extend(repr(float(x)) for x in vec)
            row.append(self.contact_state[i])
            row.extend(str(int(b)) for b in self.sat_flags[i])
            row.append(str(int(self.chalk_intact[i])))
            for vec in (self.adm_err[i], self.adm_rate[i]):
                row.extend(repr(float(x)) for x in vec)
            w.writerow(row)
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SessionLog":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != LOG_COLUMNS:
            raise ValueError("log CSV header does not match schema")
        log = cls()
        for row in reader:
            if not row:
                continue
            vals = row
            log.append(
                t=float(vals[0]),
                stylus_p=np.array([float(x) for x in vals[1:4]]),
                stylus_q=np.array([float(x) for x in vals[4:8]]),
                p_h=np.array([float(x) for x in vals[8:11]]),
                p_d=np.array([float(x) for x in vals[11:14]]),
                p_c=np.array([float(x) for x in vals[14:17]]),
                plant_p=np.array([float(x) for x in vals[17:20]]),
                plant_q=np.array([float(x) for x in vals[20:24]]),
                f_e=np.array([float(x) for x in vals[24:27]]),
                f_h=np.array([float(x) for x in vals[27:30]]),
                contact_state=vals[30],
                sat_flags=np.array([int(x) for x in vals[31:34]], dtype=bool),
                chalk_intact=bool(int(vals[34])),
                adm_err=np.array([float(x) for x in vals[35:38]]),
                adm_rate=np.array([float(x) for x in vals[38:41]]),
            )
        return log

    @classmethod
    def read(cls, path: str | Path) -> "SessionLog":
        return cls.from_csv(Path(path).read_text())


@dataclass
class SessionOutcome:
    success: bool
    failure_reason: str  # "none" | "chalk_broken" | "safety_stop"
    diagnostic: str
    canvas: StrokeCanvas
    log: SessionLog
    steps: int
    duration: float


@dataclass
class StepSnapshot:
    """Immutable view of one cycle handed to telemetry consumers."""

    i: int
    t: float
    plant_p: np.ndarray
    plant_q: np.ndarray
    f_e: np.ndarray
    f_h: np.ndarray
    contact_state: str
    sat_flags: tuple[bool, bool, bool]
    chalk_intact: bool
    stroke_delta: list[tuple[int, tuple[float, float]]] = field(
        default_factory=list)


class TeleopSession:
    """Owns and advances the full bilateral chain for one scenario."""

    def __init__(self, config: ScenarioConfig, operator,
                 on_step: Callable[[StepSnapshot], None] | None = None):
        self.config = config
        self.operator = operator
        self.on_step = on_step
        self.dt = config.control.dt

        self.filter = PoseFilter(config.filter.window_n)
        start_pose = Pose(config.plant.start_orientation,
                          config.plant.start_position, EFFECTOR, ROBOT_BASE)
        self.plant = RobotPlant(start_pose, config.plant.bandwidth_hz)
        self.adm_state = AdmittanceState()
        sat_params = config.saturation
        self.saturation = ReferenceSaturation(sat_params,
                                              config.admittance.stiffness)
        self.classifier = ContactClassifier(config.contact.force_epsilon,
                                            config.contact.collision_window)
        self.chalk = ChalkState()
        self.canvas = StrokeCanvas()
        self.log = SessionLog()

        self.calibration: MappingCalibration | None = None
        self._f_sensed_re = np.zeros(3)   # compensated sensor force, effector
        self._f_sensed_rb = np.zeros(3)   # same, robot base
        self._last_rendered = np.zeros(3)
        self._p_c_last = config.plant.start_position.copy()
        self._canvas_cursor = (0, 0)
        self.step_index = 0
        self.failed = False
        self.failure_reason = "none"
        self.diagnostic = ""

    # -- single cycle ---------------------------------------------------

    def step_once(self) -> None:
        cfg = self.config
        i = self.step_index
        t = i * self.dt

        # 1. operator sees only last cycle's rendered force
        sample: OperatorSample = self.operator.sample(i, t,
                                                      self._last_rendered)
        if self.calibration is None:
            self.calibration = MappingCalibration(
                base_rotation=cfg.mapping.base_rotation,
                tool_rotation=cfg.mapping.tool_rotation,
                stylus_start=sample.position.copy(),
                effector_start=cfg.plant.start_position.copy())

        # 2-3. map into the robot base, then smooth
        mapped = map_stylus_pose(sample.as_pose(), self.calibration)
        p_h = self.filter.filter_position(mapped.translation)
        q_h = self.filter.filter_orientation(mapped.rotation)

        # 4. reference clamp driven by last cycle's exerted force
        f_exerted_rb = -self._f_sensed_rb
        if cfg.saturation_enabled:
            p_d = self.saturation.step(p_h, f_exerted_rb, self._p_c_last)
        else:
            p_d = p_h.copy()

        # 5. admittance update from last cycle's exerted force (effector
        #    frame); 6. compliant command and plant update
        f_exerted_re = -self._f_sensed_re
        self.adm_state = step_admittance(self.adm_state, cfg.admittance,
                                         f_exerted_re, self.dt)
        p_c = compliant_command(p_d, q_h, self.adm_state.error)
        plant_pose, tip_velocity = self.plant.step(p_c, q_h, self.dt)

        # 7. environment: reaction on the robot, chalk, stroke record
        f_contact_rb, depth = contact_force(cfg.env, plant_pose.translation,
                                            tip_velocity)
        self.chalk.update(cfg.env.stiffness * depth, cfg.env.breakage_force,
                          t)
        in_contact = depth > 0.0
        self.canvas.deposit(cfg.env.to_board(plant_pose.translation),
                            in_contact, self.chalk.intact)
        rot_inv = quat_conjugate(plant_pose.rotation)
        weight = cfg.tool.mass * cfg.tool.gravity
        f_meas_re = quat_rotate(rot_inv, f_contact_rb + weight)
        f_sensed_re = compensate_gravity(f_meas_re, plant_pose.rotation,
                                         cfg.tool)
        f_sensed_rb = quat_rotate(plant_pose.rotation, f_sensed_re)

        # 8. feedback rendering; both modes emit the operator's applied
        #    force (positive while pressing), so the hand model and the
        #    device see one convention regardless of the source
        if cfg.render_mode == RENDER_VIRTUALIZED:
            err, rate = frame_error_to_haptic(
                p_h, p_c, self.adm_state.error_rate,
                cfg.mapping.base_rotation, plant_pose)
            f_raw = render_virtualized(err, rate, cfg.render)
        else:
            f_dev = measured_force_to_haptic(-f_sensed_re,
                                             cfg.mapping.base_rotation,
                                             plant_pose)
            scale = rotate_force_scale(cfg.cosh.force_scale,
                                       cfg.mapping.base_rotation, plant_pose)
            f_raw = render_measured_cosh(
                f_dev, CoshMappingParams(scale, cfg.cosh.deadzone))
        f_h = clamp_to_device(f_raw, cfg.device)

        state = self.classifier.classify(
            t, float(np.linalg.norm(f_sensed_rb)),
            bool(self.saturation.active.any()))

        finite = all(np.isfinite(v).all() for v in
                     (p_h, p_d, p_c, plant_pose.translation, f_sensed_rb,
                      f_h))

        # 9. one record per cycle, then roll the one-cycle force memory
        self.log.append(
            t=t, stylus_p=sample.position.copy(),
            stylus_q=sample.orientation.copy(),
            p_h=p_h.copy(), p_d=np.asarray(p_d, dtype=float).copy(),
            p_c=p_c.copy(), plant_p=plant_pose.translation.copy(),
            plant_q=plant_pose.rotation.copy(), f_e=f_sensed_rb.copy(),
            f_h=f_h.copy(), contact_state=state.value,
            sat_flags=self.saturation.active.copy(),
            chalk_intact=self.chalk.intact,
            adm_err=self.adm_state.error.copy(),
            adm_rate=self.adm_state.error_rate.copy())

        if self.on_step is not None:
            self.on_step(self._snapshot(i, t, plant_pose, f_sensed_rb, f_h,
                                        state))

        self._f_sensed_re = f_sensed_re
        self._f_sensed_rb = f_sensed_rb
        self._last_rendered = f_h
        self._p_c_last = p_c
        self.step_index += 1

        if not self.chalk.intact and not self.failed:
            self.failed = True
            self.failure_reason = "chalk_broken"
            self.diagnostic = (f"chalk broke at t={self.chalk.broken_at:.3f}s"
                               f" (normal force exceeded "
                               f"{cfg.env.breakage_force} N)")
        if not finite and not self.failed:
            self.failed = True
            self.failure_reason = "safety_stop"
            self.diagnostic = f"non-finite state at step {i}"

    def _snapshot(self, i: int, t: float, plant_pose: Pose,
                  f_e: np.ndarray, f_h: np.ndarray,
                  state: ContactState) -> StepSnapshot:
        seg_i, pt_i = self._canvas_cursor
        delta: list[tuple[int, tuple[float, float]]] = []
        segs = self.canvas.segments
        while seg_i < len(segs):
            pts = segs[seg_i]
            while pt_i < len(pts):
                delta.append((seg_i, (float(pts[pt_i][0]),
                                      float(pts[pt_i][1]))))
                pt_i += 1
            if seg_i == len(segs) - 1:
                break
            seg_i += 1
            pt_i = 0
        self._canvas_cursor = (seg_i, pt_i)
        return StepSnapshot(
            i=i, t=t, plant_p=plant_pose.translation.copy(),
            plant_q=plant_pose.rotation.copy(), f_e=f_e.copy(),
            f_h=f_h.copy(), contact_state=state.value,
            sat_flags=tuple(bool(b) for b in self.saturation.active),
            chalk_intact=self.chalk.intact, stroke_delta=delta)

    # -- whole run --------------------------------------------------------

    def run(self, duration: float | None = None) -> SessionOutcome:
        """Step until the duration or the operator's plan is exhausted.

        Stops immediately on failure (broken chalk models the physical
        safety stop).  A zero duration is a valid empty session.
        """
        if duration is None:
            duration = getattr(self.operator, "duration", None)
        if duration is None:
            raise ValueError("duration required for unbounded operators")
        steps = int(round(duration / self.dt))
        for _ in range(steps):
            self.step_once()
            if self.failed:
                break
        return self.outcome()

    def outcome(self) -> SessionOutcome:
        return SessionOutcome(
            success=not self.failed,
            failure_reason=self.failure_reason,
            diagnostic=self.diagnostic,
            canvas=self.canvas,
            log=self.log,
            steps=self.step_index,
            duration=self.step_index * self.dt)


def run_session(config: ScenarioConfig, operator,
                duration: float | None = None,
                on_step: Callable[[StepSnapshot], None] | None = None
                ) -> SessionOutcome:
    return TeleopSession(config, operator, on_step=on_step).run(duration)
