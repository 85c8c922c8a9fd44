"""Shared oracles and trace builders used across the test suite.

Oracles here are written independently of the implementation: closed
forms, brute-force recomputation, or textbook formulas.  Tests compare
package output against these, never against the package itself.
"""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from hapticsim import ReplayOperator, ScenarioConfig
from hapticsim.se3 import quat_identity


def unit_quat_strategy():
    """Well-conditioned random unit quaternions for property tests."""
    comp = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
    return (
        st.tuples(comp, comp, comp, comp)
        .filter(lambda q: sum(x * x for x in q) > 1e-2)
        .map(lambda q: np.asarray(q, dtype=float) / np.linalg.norm(q))
    )


def vec3_strategy(bound: float = 10.0):
    comp = st.floats(-bound, bound, allow_nan=False, allow_infinity=False)
    return st.tuples(comp, comp, comp).map(
        lambda v: np.asarray(v, dtype=float))


def naive_moving_average(samples: np.ndarray, window: int) -> np.ndarray:
    """Brute-force windowed mean, recomputed from scratch per sample."""
    samples = np.asarray(samples, dtype=float)
    out = np.empty_like(samples)
    for i in range(len(samples)):
        lo = max(0, i + 1 - window)
        out[i] = samples[lo:i + 1].mean(axis=0)
    return out


def moving_average_gain(freq_hz: float, window: int, rate_hz: float) -> float:
    """Magnitude response of an n-sample boxcar at the given frequency."""
    t = 1.0 / rate_hz
    num = np.sin(np.pi * freq_hz * window * t)
    den = window * np.sin(np.pi * freq_hz * t)
    return abs(float(num / den))


def fit_sine_amplitude(t: np.ndarray, y: np.ndarray, freq_hz: float) -> float:
    """Least-squares amplitude of a sinusoid of known frequency."""
    w = 2.0 * np.pi * freq_hz
    basis = np.column_stack([np.sin(w * t), np.cos(w * t)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return float(np.hypot(coef[0], coef[1]))


def second_order_step(mass: float, damping: float, stiffness: float,
                      force: float, t: float) -> float:
    """Exact step response of m x'' + d x' + k x = f from rest.

    Solved through the eigendecomposition of the companion matrix, which
    covers under- and overdamped cases alike (exactly critical damping
    is defective and not used by any test).
    """
    A = np.array([[0.0, 1.0], [-stiffness / mass, -damping / mass]])
    bu = np.array([0.0, force / mass])
    vals, vecs = np.linalg.eig(A)
    e_at = (vecs @ np.diag(np.exp(vals * t)) @ np.linalg.inv(vecs))
    x = np.linalg.inv(A) @ (e_at - np.eye(2)) @ bu
    return float(x[0].real)


def brute_quat_average(quats: np.ndarray) -> np.ndarray:
    """Principal eigenvector of the accumulated outer products."""
    acc = np.zeros((4, 4))
    for q in quats:
        acc += np.outer(q, q)
    vals, vecs = np.linalg.eigh(acc)
    v = vecs[:, -1]
    if v[0] < 0.0:
        v = -v
    return v / np.linalg.norm(v)


def press_replay(cfg: ScenarioConfig, depth: float,
                 approach_time: float = 0.6,
                 hold_time: float = 3.0) -> ReplayOperator:
    """Stylus trace that ramps straight into the surface and holds.

    The ramp runs at the control rate so the zero-order hold is smooth;
    the final sample commands a tip exactly ``depth`` past the surface.
    """
    n = cfg.env.normal
    start = cfg.plant.start_position
    clearance = -float(np.dot(cfg.env.origin - start, n))
    if clearance < 0.0:
        raise ValueError("plant start must begin clear of the surface")
    travel = clearance + depth
    dt = cfg.control.dt
    steps = int(round((approach_time + hold_time) / dt))
    times = np.arange(steps + 1) * dt
    frac = np.clip(times / approach_time, 0.0, 1.0)
    positions = frac[:, None] * (travel * -n)[None, :]
    quats = np.tile(quat_identity(), (steps + 1, 1))
    return ReplayOperator(times, positions, quats)


def hold_replay(position: np.ndarray, duration: float,
                rate_hz: float) -> ReplayOperator:
    """Trace that sits still at one stylus position."""
    steps = int(round(duration * rate_hz))
    times = np.arange(steps + 1) / rate_hz
    positions = np.tile(np.asarray(position, dtype=float), (steps + 1, 1))
    quats = np.tile(quat_identity(), (steps + 1, 1))
    return ReplayOperator(times, positions, quats)
