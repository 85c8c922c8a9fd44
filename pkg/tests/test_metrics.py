"""Force profiles, writing-quality metrics, and the synthetic human
pressure reference."""

import numpy as np
import pytest

from hapticsim.environment import BlackboardModel, StrokeCanvas
from hapticsim.metrics import (
    HUMAN_EXTREMUM_N,
    HUMAN_MEAN_N,
    ForceProfile,
    board_axis,
    continuity_metrics,
    extract_profile,
    human_reference,
    mean_difference,
    peak_difference,
    rise_time_10_90,
    session_metrics,
    settle_and_bound,
)
from hapticsim.session import SessionLog


def profile(f, t=None, source="robot"):
    f = np.asarray(f, dtype=float)
    if t is None:
        t = np.arange(len(f), dtype=float)
    return ForceProfile(np.asarray(t, dtype=float), f, source)


def synthetic_log(fx_values, contact_state="penetration"):
    """Minimal log with a given board-normal force history."""
    log = SessionLog()
    q = np.array([1.0, 0.0, 0.0, 0.0])
    for i, fx in enumerate(fx_values):
        log.append(t=i * 0.002,
                   stylus_p=np.zeros(3), stylus_q=q.copy(),
                   p_h=np.zeros(3), p_d=np.zeros(3), p_c=np.zeros(3),
                   plant_p=np.zeros(3), plant_q=q.copy(),
                   f_e=np.array([fx, 0.0, 0.0]),
                   f_h=np.zeros(3), contact_state=contact_state,
                   sat_flags=np.zeros(3, dtype=bool), chalk_intact=True,
                   adm_err=np.zeros(3), adm_rate=np.zeros(3))
    return log


class TestForceProfile:
    def test_mean_and_extremum(self):
        p = profile([-1.0, -3.0, 2.0])
        assert p.mean() == pytest.approx(-2.0 / 3.0)
        assert p.extremum() == -3.0  # signed, largest magnitude

    def test_extremum_keeps_the_sign_of_the_peak(self):
        assert profile([1.0, 5.0, -2.0]).extremum() == 5.0

    def test_csv_round_trip(self):
        p = profile([-7.25, -12.16, -3.0], t=[0.0, 0.1, 0.2])
        text = "t,f\n" + "\n".join(f"{t},{f}" for t, f in zip(p.t, p.f))
        back = ForceProfile.from_csv(text)
        assert np.array_equal(back.t, p.t)
        assert np.array_equal(back.f, p.f)

    def test_from_csv_rejects_bad_header(self):
        with pytest.raises(ValueError):
            ForceProfile.from_csv("time,force\n0,1")

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            ForceProfile(np.zeros(3), np.zeros(2), "x")


class TestHumanReference:
    @pytest.mark.parametrize("duration,rate", [
        (5.0, 500.0), (12.0, 500.0), (21.56, 500.0), (8.0, 250.0),
    ])
    def test_anchors_hit_exactly_for_any_span(self, duration, rate):
        ref = human_reference(duration, rate)
        assert ref.mean() == pytest.approx(HUMAN_MEAN_N, abs=1e-9)
        assert ref.extremum() == pytest.approx(HUMAN_EXTREMUM_N, abs=1e-9)

    def test_custom_anchors(self):
        ref = human_reference(6.0, 100.0, mean=-5.0, extremum=-9.0)
        assert ref.mean() == pytest.approx(-5.0, abs=1e-9)
        assert ref.extremum() == pytest.approx(-9.0, abs=1e-9)

    def test_pressure_stays_negative(self):
        ref = human_reference(10.0, 500.0)
        assert np.all(ref.f < 0.0)


class TestProfileExtraction:
    def test_keeps_only_in_contact_samples(self):
        log = synthetic_log([0.0, -0.1, -3.0, -5.0, 0.0, -2.0])
        p = extract_profile(log, BlackboardModel())
        assert np.array_equal(p.f, [-3.0, -5.0, -2.0])

    def test_duty_cycle_does_not_dilute_the_mean(self):
        solid = synthetic_log([-6.0] * 100)
        chattering = synthetic_log(([-6.0] * 10 + [0.0] * 90))
        board = BlackboardModel()
        assert extract_profile(solid, board).mean() == pytest.approx(-6.0)
        assert extract_profile(chattering, board).mean() \
            == pytest.approx(-6.0)

    def test_contact_free_run_returns_full_trace(self):
        log = synthetic_log([0.0, 0.1, -0.2])
        p = extract_profile(log, BlackboardModel())
        assert len(p) == 3

    def test_board_axis_follows_the_normal(self):
        assert board_axis(BlackboardModel()) == 0
        flat = BlackboardModel(normal=np.array([0.0, 0.0, 1.0]))
        assert board_axis(flat) == 2


class TestComparisons:
    def test_mean_difference_is_absolute(self):
        assert mean_difference(profile([-7.0]), profile([-9.0])) \
            == pytest.approx(2.0)
        assert mean_difference(profile([-9.0]), profile([-7.0])) \
            == pytest.approx(2.0)

    def test_peak_difference_compares_magnitudes(self):
        hum = profile([-12.0])
        assert peak_difference(hum, profile([-10.0])) == pytest.approx(2.0)
        # a positive-convention profile with the same magnitude matches
        assert peak_difference(hum, profile([12.0])) == pytest.approx(0.0)

    def test_continuity_counts_extra_segments_only(self):
        canvas = StrokeCanvas()
        for seg in range(3):
            canvas.deposit(np.array([seg * 0.1, 0.0]), True, True)
            canvas.deposit(np.array([0.0, 0.0]), False, True)
        assert continuity_metrics(canvas, 2) == (3, 1)
        assert continuity_metrics(canvas, 5) == (3, 0)


class TestSettleAndBound:
    def test_transient_is_excluded(self):
        t = np.arange(0, 3.0, 0.01)
        f = np.where(t < 0.5, -20.0, -11.0)
        settled, ok = settle_and_bound(ForceProfile(t, f, "robot"),
                                       f_th=12.0, settle_window=1.0)
        assert settled == pytest.approx(11.0)
        assert ok

    def test_bound_violations_are_flagged(self):
        t = np.arange(0, 3.0, 0.01)
        f = np.full_like(t, -13.0)
        settled, ok = settle_and_bound(ForceProfile(t, f, "robot"),
                                       f_th=12.0, settle_window=1.0)
        assert settled == pytest.approx(13.0)
        assert not ok

    def test_tolerance_is_relative_to_threshold(self):
        t = np.arange(0, 3.0, 0.01)
        f = np.full_like(t, -12.5)
        _, ok = settle_and_bound(ForceProfile(t, f, "robot"),
                                 f_th=12.0, settle_window=1.0,
                                 tolerance=0.05)
        assert ok  # 12.5 <= 12.6

    def test_short_profiles_rejected(self):
        with pytest.raises(ValueError):
            settle_and_bound(profile([-1.0] * 5, t=np.arange(5) * 0.01),
                             12.0, 1.0)


class TestRiseTime:
    def test_matches_exponential_closed_form(self):
        tau = 0.05
        t = np.arange(0, 1.0, 1e-3)
        s = 1.0 - np.exp(-t / tau)
        rise = rise_time_10_90(t, s)
        assert rise == pytest.approx(tau * np.log(9.0), abs=5e-3)

    def test_none_when_signal_never_rises(self):
        t = np.arange(0, 1.0, 1e-3)
        assert rise_time_10_90(t, np.zeros_like(t)) is None


class TestSessionMetrics:
    def test_report_fields_for_a_contact_run(self):
        log = synthetic_log([-0.1, -6.0, -8.0, -6.5] * 200)
        canvas = StrokeCanvas()
        canvas.deposit(np.array([0.0, 0.0]), True, True)
        human = human_reference(2.0, 500.0)
        report = session_metrics(log, canvas, BlackboardModel(),
                                 intended_segments=1, human=human,
                                 f_th=12.0, settle_window=0.5)
        assert report["robot_extremum_n"] == -8.0
        assert report["unintended_gaps"] == 0
        assert report["human_mean_n"] == pytest.approx(HUMAN_MEAN_N,
                                                       abs=1e-9)
        assert report["force_bound_satisfied"]
        assert report["mean_difference_n"] > 0.0

    def test_contact_free_run_reports_zero_means(self):
        log = synthetic_log([0.0, 0.0])
        report = session_metrics(log, StrokeCanvas(), BlackboardModel(),
                                 intended_segments=None,
                                 human=human_reference(1.0, 500.0))
        assert report["stroke_segments"] == 0
        assert "unintended_gaps" not in report
