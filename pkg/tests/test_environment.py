"""Board contact model, chalk, stroke canvas, and the robot plant."""

import numpy as np
import pytest

from hapticsim.environment import (
    BlackboardModel,
    ChalkState,
    RobotPlant,
    StrokeCanvas,
    contact_force,
)
from hapticsim.se3 import Pose, quat_from_axis_angle, quat_identity, vec3


class TestBoardGeometry:
    def test_penetration_is_one_sided(self):
        board = BlackboardModel()
        assert board.penetration(vec3(0.41, 0.0, 0.30)) \
            == pytest.approx(0.01)
        assert board.penetration(vec3(0.39, 0.0, 0.30)) == 0.0

    def test_normal_is_normalized(self):
        board = BlackboardModel(normal=np.array([-2.0, 0.0, 0.0]))
        assert np.allclose(board.normal, [-1.0, 0.0, 0.0])

    def test_basis_is_orthonormal_right_handed(self):
        for normal in ([-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0],
                       [1.0, 1.0, 0.5]):
            board = BlackboardModel(normal=np.array(normal))
            u, v = board.basis()
            assert np.linalg.norm(u) == pytest.approx(1.0)
            assert np.linalg.norm(v) == pytest.approx(1.0)
            assert np.dot(u, v) == pytest.approx(0.0, abs=1e-12)
            assert np.allclose(np.cross(u, v), board.normal, atol=1e-12)

    def test_upright_board_keeps_letters_upright(self):
        board = BlackboardModel()
        _, v = board.basis()
        # the in-plane vertical of a wall-mounted board is world up
        assert np.allclose(v, [0.0, 0.0, 1.0])

    def test_to_board_round_trips_in_plane_offsets(self):
        board = BlackboardModel()
        u, v = board.basis()
        p = board.origin + 0.03 * u - 0.07 * v
        assert np.allclose(board.to_board(p), [0.03, -0.07], atol=1e-12)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            BlackboardModel(normal=np.zeros(3))
        with pytest.raises(ValueError):
            BlackboardModel(stiffness=0.0)
        with pytest.raises(ValueError):
            BlackboardModel(breakage_force=0.0)


class TestContactForce:
    def test_free_tip_feels_nothing(self):
        board = BlackboardModel()
        f, depth = contact_force(board, vec3(0.30, 0.0, 0.30), np.zeros(3))
        assert np.array_equal(f, np.zeros(3))
        assert depth == 0.0

    def test_normal_reaction_is_linear_in_depth(self):
        board = BlackboardModel()
        f, depth = contact_force(board, vec3(0.405, 0.0, 0.30), np.zeros(3))
        assert depth == pytest.approx(0.005)
        assert np.allclose(f, [-15.0, 0.0, 0.0])

    def test_friction_opposes_sliding_at_mu_times_normal(self):
        board = BlackboardModel()
        vel = vec3(0.0, 0.05, 0.0)  # sliding along the board
        f, _ = contact_force(board, vec3(0.405, 0.0, 0.30), vel)
        normal_part = np.dot(f, board.normal) * board.normal
        tangential = f - normal_part
        assert np.linalg.norm(normal_part) == pytest.approx(15.0)
        assert np.linalg.norm(tangential) \
            == pytest.approx(board.friction * 15.0)
        assert np.dot(tangential, vel) < 0.0

    def test_normal_velocity_does_not_create_friction(self):
        board = BlackboardModel()
        f, _ = contact_force(board, vec3(0.405, 0.0, 0.30),
                             vec3(0.2, 0.0, 0.0))
        assert np.allclose(f, [-15.0, 0.0, 0.0])


class TestChalk:
    def test_survives_forces_at_the_rating(self):
        chalk = ChalkState()
        assert not chalk.update(30.0, 30.0, 1.0)
        assert chalk.intact

    def test_breaks_above_rating_and_latches(self):
        chalk = ChalkState()
        assert chalk.update(30.5, 30.0, 1.25)
        assert not chalk.intact
        assert chalk.broken_at == 1.25
        # further updates cannot resurrect it or move the timestamp
        assert not chalk.update(0.0, 30.0, 2.0)
        assert chalk.broken_at == 1.25


class TestCanvas:
    def test_contact_runs_become_segments(self):
        canvas = StrokeCanvas()
        for x in (0.0, 0.01, 0.02):
            canvas.deposit(np.array([x, 0.0]), True, True)
        canvas.deposit(np.array([0.03, 0.0]), False, True)
        for x in (0.05, 0.06):
            canvas.deposit(np.array([x, 0.0]), True, True)
        assert canvas.segment_count == 2
        assert canvas.total_points() == 5
        arrays = canvas.as_arrays()
        assert arrays[0].shape == (3, 2)
        assert arrays[1].shape == (2, 2)

    def test_broken_chalk_leaves_no_mark(self):
        canvas = StrokeCanvas()
        canvas.deposit(np.array([0.0, 0.0]), True, True)
        canvas.deposit(np.array([0.01, 0.0]), True, False)
        canvas.deposit(np.array([0.02, 0.0]), True, False)
        assert canvas.segment_count == 1
        assert canvas.total_points() == 1

    def test_no_contact_leaves_empty_canvas(self):
        canvas = StrokeCanvas()
        for _ in range(5):
            canvas.deposit(np.array([0.0, 0.0]), False, True)
        assert canvas.segment_count == 0


class TestRobotPlant:
    def start_pose(self):
        return Pose(quat_identity(), vec3(0.34, 0.0, 0.30), "Re", "Rb")

    def test_discrete_gain_matches_zero_order_hold(self):
        dt, bw = 0.002, 20.0
        plant = RobotPlant(self.start_pose(), bandwidth_hz=bw)
        target = vec3(0.40, 0.0, 0.30)
        pose, vel = plant.step(target, quat_identity(), dt)
        alpha = 1.0 - np.exp(-2.0 * np.pi * bw * dt)
        expected = 0.34 + alpha * (0.40 - 0.34)
        assert pose.translation[0] == pytest.approx(expected, abs=1e-15)
        assert vel[0] == pytest.approx((expected - 0.34) / dt, abs=1e-9)

    def test_converges_to_a_held_command(self):
        plant = RobotPlant(self.start_pose(), bandwidth_hz=20.0)
        target = vec3(0.42, -0.05, 0.33)
        q = quat_from_axis_angle(vec3(0, 0, 1), 0.3)
        for _ in range(2000):
            pose, _ = plant.step(target, q, 0.002)
        assert np.allclose(pose.translation, target, atol=1e-12)
        assert min(np.linalg.norm(pose.rotation - q),
                   np.linalg.norm(pose.rotation + q)) < 1e-9

    def test_stable_for_large_timesteps(self):
        plant = RobotPlant(self.start_pose(), bandwidth_hz=100.0)
        target = vec3(1.0, 0.0, 0.0)
        for _ in range(10):
            pose, _ = plant.step(target, quat_identity(), 1.0)
            gap = abs(pose.translation[0] - 1.0)
            assert gap <= 0.66  # never overshoots, always contracts
        with pytest.raises(ValueError):
            plant.step(target, quat_identity(), 0.0)

    def test_rejects_nonpositive_bandwidth(self):
        with pytest.raises(ValueError):
            RobotPlant(self.start_pose(), bandwidth_hz=0.0)
