"""Quantitative evaluation of a writing session.

Force comparisons run against a reference profile of freehand human
writing along the axis perpendicular to the board.  Two scalar scores
summarize similarity:

* mean difference: absolute difference of the per-profile means, each
  mean taken over its own sample count;
* peak difference: absolute difference of the magnitudes of each
  profile's largest-magnitude (signed) extremum.

Handwriting continuity is scored from the stroke canvas: every loss of
contact inside an intended stroke splits a segment, so unintended gaps
are the observed segment surplus over the task's stroke count.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .environment import BlackboardModel, StrokeCanvas
from .session import SessionLog

HUMAN_MEAN_N = -7.25
HUMAN_EXTREMUM_N = -12.16


@dataclass(frozen=True)
class ForceProfile:
    """Sampled force along the board-normal axis."""

    t: np.ndarray
    f: np.ndarray
    source: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float))
        if self.t.shape != self.f.shape:
            raise ValueError("profile t and f must have matching shapes")
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.f))):
            raise ValueError("profile samples must be finite")

    def __len__(self) -> int:
        return len(self.t)

    def mean(self) -> float:
        if len(self.f) == 0:
            raise ValueError("empty profile has no mean")
        return float(np.mean(self.f))

    def extremum(self) -> float:
        """Signed value of the largest-magnitude sample."""
        if len(self.f) == 0:
            raise ValueError("empty profile has no extremum")
        return float(self.f[int(np.argmax(np.abs(self.f)))])

    @classmethod
    def from_csv(cls, text: str, source: str = "human") -> "ForceProfile":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "f"]:
            raise ValueError("force profile CSV must have header t,f")
        rows = [(float(a), float(b)) for a, b in
                (r for r in reader if r)]
        data = np.array(rows) if rows else np.zeros((0, 2))
        return cls(data[:, 0], data[:, 1], source)

    @classmethod
    def read(cls, path: str | Path, source: str = "human") -> "ForceProfile":
        return cls.from_csv(Path(path).read_text(), source)


def board_axis(board: BlackboardModel) -> int:
    """Index of the base axis most aligned with the board normal."""
    return int(np.argmax(np.abs(board.normal)))


def extract_profile(log: SessionLog, board: BlackboardModel,
                    source: str = "robot",
                    contact_epsilon: float = 0.5) -> ForceProfile:
    """Board-normal force over the in-contact samples of a session log.

    Only samples with force magnitude above ``contact_epsilon`` enter
    the profile.  Keeping free-motion samples out makes the mean a
    measure of applied force level rather than contact duty cycle: a
    run with many brief touches and a run with one sustained press are
    compared by how hard they pressed, and air time between letters
    (which varies with trajectory, not with control architecture) never
    dilutes the statistic.  A session that never touched the board
    yields its full trace.
    """
    t = log.column("t")
    f_e = log.column("f_e")
    if len(t) == 0:
        return ForceProfile(t, np.zeros(0), source)
    axis = board_axis(board)
    mags = np.linalg.norm(f_e, axis=1)
    idx = np.flatnonzero(mags >= contact_epsilon)
    if len(idx) == 0:
        return ForceProfile(t, f_e[:, axis], source)
    return ForceProfile(t[idx], f_e[idx, axis], source)


def mean_difference(hum: ForceProfile, rob: ForceProfile) -> float:
    """Absolute difference of profile means (each over its own count)."""
    return abs(hum.mean() - rob.mean())


def peak_difference(hum: ForceProfile, rob: ForceProfile) -> float:
    """Absolute difference of extremum magnitudes.

    Pressing forces read negative in this convention, so extrema are
    compared by magnitude regardless of sign.
    """
    return abs(abs(hum.extremum()) - abs(rob.extremum()))


def continuity_metrics(canvas: StrokeCanvas,
                       intended_segments: int) -> tuple[int, int]:
    """(observed segment count, unintended gap count, floored at zero)."""
    observed = canvas.segment_count
    return observed, max(0, observed - intended_segments)


def settle_and_bound(profile: ForceProfile, f_th: float,
                     settle_window: float,
                     tolerance: float = 0.05) -> tuple[float, bool]:
    """Largest force magnitude after the settling window, and whether it
    respects the threshold with the given relative tolerance.

    The initial ``settle_window`` seconds of the profile are treated as
    transient and excluded; the reference clamp only bounds the force
    once the commanded pose has settled against the surface.
    """
    if len(profile) == 0:
        raise ValueError("empty profile")
    t0 = float(profile.t[0])
    span = float(profile.t[-1]) - t0
    if span < settle_window:
        raise ValueError("profile shorter than the settling window")
    settled = np.abs(profile.f[profile.t >= t0 + settle_window])
    peak = float(np.max(settled))
    return peak, peak <= f_th * (1.0 + tolerance)


def human_reference(duration: float, rate_hz: float,
                    mean: float = HUMAN_MEAN_N,
                    extremum: float = HUMAN_EXTREMUM_N) -> ForceProfile:
    """Synthetic freehand writing pressure hitting both anchors exactly.

    The waveform is a slow pressure swell with a faster overlay,
    de-meaned and peak-normalized on the sample grid so that the sample
    mean equals ``mean`` and the largest-magnitude sample equals
    ``extremum`` to rounding. Shape is synthetic; only the anchors carry
    meaning.
    """
    n = max(2, int(round(duration * rate_hz)))
    t = np.arange(n) / rate_hz
    period = duration / max(1.0, round(duration / 2.5))
    w = (np.sin(2.0 * np.pi * t / period)
         + 0.35 * np.sin(6.0 * np.pi * t / period + 0.7)
         + 0.15 * np.sin(10.0 * np.pi * t / period + 2.1))
    w = w - np.mean(w)
    w = w / np.max(w)
    f = mean + (extremum - mean) * w
    return ForceProfile(t, f, "human")


def rise_time_10_90(t: np.ndarray, signal: np.ndarray,
                    plateau_fraction: float = 0.25) -> float | None:
    """10-90% rise time of a transient that climbs to a plateau.

    The plateau level is the mean magnitude over the trailing
    ``plateau_fraction`` of the window; returns None if the signal never
    crosses both thresholds in order.
    """
    t = np.asarray(t, dtype=float)
    s = np.abs(np.asarray(signal, dtype=float))
    if len(s) < 4:
        return None
    k = max(1, int(len(s) * plateau_fraction))
    plateau = float(np.mean(s[-k:]))
    if plateau <= 0.0:
        return None
    lo = np.flatnonzero(s >= 0.1 * plateau)
    if len(lo) == 0:
        return None
    hi = np.flatnonzero(s[lo[0]:] >= 0.9 * plateau)
    if len(hi) == 0:
        return None
    return float(t[lo[0] + hi[0]] - t[lo[0]])


def session_metrics(log: SessionLog, canvas: StrokeCanvas,
                    board: BlackboardModel, intended_segments: int | None,
                    human: ForceProfile,
                    f_th: float | None = None,
                    settle_window: float = 1.0) -> dict:
    """Full metrics dictionary for one session against a human reference.

    ``intended_segments`` is unknown for replayed traces; pass None to
    skip the gap count.
    """
    robot = extract_profile(log, board)
    report: dict = {
        "robot_mean_n": robot.mean() if len(robot) else 0.0,
        "robot_extremum_n": robot.extremum() if len(robot) else 0.0,
        "human_mean_n": human.mean(),
        "human_extremum_n": human.extremum(),
    }
    if len(robot):
        report["mean_difference_n"] = mean_difference(human, robot)
        report["peak_difference_n"] = peak_difference(human, robot)
    report["stroke_segments"] = canvas.segment_count
    if intended_segments is not None:
        segments, gaps = continuity_metrics(canvas, intended_segments)
        report["intended_segments"] = intended_segments
        report["unintended_gaps"] = gaps
    if f_th is not None and len(robot):
        span = float(robot.t[-1] - robot.t[0]) if len(robot) > 1 else 0.0
        if span >= settle_window:
            settled, ok = settle_and_bound(robot, f_th, settle_window)
            report["settled_max_n"] = settled
            report["force_bound_satisfied"] = ok
    return report
