import math

import numpy as np
import pytest

from autopark.control import (
    DECISION_RULES,
    FIVE_TERMS,
    PFIT,
    POSTURE_RULES,
    TURN_RULES,
    UNFIT,
    VFIT,
    Direction,
    ParkAction,
    ParkingDecider,
    SlotScanner,
    posture_errors,
    slot_length,
    steering_command,
)
from autopark.fuzzy import MembershipFamily, RuleTable, evaluate
from autopark.vehicle import VehicleParams
from autopark.world import SensorFrame


def frame_with(**readings):
    base = {"FC": 0.8, "BC": 0.8, "FL": 0.8, "BL": 0.8, "FR": 0.8, "BR": 0.8}
    base.update(readings)
    return SensorFrame(distances=base, encoder_count=0, yaw=0.0)


class TestPostureErrors:
    def test_on_track_forward(self):
        f = frame_with(FR=0.15, BR=0.15)
        assert posture_errors(f, Direction.FORWARD, 0.15) == (0.0, 0.0)

    def test_forward_substitution(self):
        f = frame_with(FR=0.25, BR=0.20)
        gap, skew = posture_errors(f, Direction.FORWARD, 0.15)
        assert gap == pytest.approx(0.10)
        assert skew == pytest.approx(0.05)

    def test_backward_swaps_leading_sensor(self):
        f = frame_with(FR=0.20, BR=0.25)
        gap, skew = posture_errors(f, Direction.BACKWARD, 0.15)
        assert gap == pytest.approx(0.10)
        assert skew == pytest.approx(0.05)


class TestPostureTable:
    def test_sign_convention_at_extremes(self, posture_controller):
        ctrl = posture_controller.controller
        peaks = ctrl.input_a.breakpoints
        max_singleton = ctrl.outputs.values[-1]
        # far off the wall and drifting farther: steer hard right (positive)
        assert evaluate(ctrl, peaks[-1], peaks[-1]) == pytest.approx(max_singleton)
        assert evaluate(ctrl, 0.0, 0.0) == 0.0
        assert evaluate(ctrl, peaks[0], peaks[0]) == pytest.approx(-max_singleton)

    def test_table_matches_transcription(self):
        # independent re-typing of the 25-cell rule grid, indexed
        # [gap error term][skew term]
        expected = {
            "NL": ["NL", "NL", "NS", "NS", "ZO"],
            "NS": ["NL", "NS", "NS", "ZO", "PS"],
            "ZO": ["NS", "NS", "ZO", "PS", "PS"],
            "PS": ["NS", "ZO", "PS", "PS", "PL"],
            "PL": ["ZO", "PS", "PS", "PL", "PL"],
        }
        for a in FIVE_TERMS:
            for j, b in enumerate(FIVE_TERMS):
                assert POSTURE_RULES[a][b] == expected[a][j], (a, b)

    def test_table_symmetry(self):
        for a in FIVE_TERMS:
            for b in FIVE_TERMS:
                assert POSTURE_RULES[a][b] == POSTURE_RULES[b][a]


class TestTurnTable:
    def test_table_matches_transcription(self):
        # 25-cell grid indexed [error term][error-rate term]; this is the
        # saturated PD surface with both gains positive
        expected = {
            "NL": ["NL", "NL", "NL", "NS", "ZO"],
            "NS": ["NL", "NL", "NS", "ZO", "PS"],
            "ZO": ["NL", "NS", "ZO", "PS", "PL"],
            "PS": ["NS", "ZO", "PS", "PL", "PL"],
            "PL": ["ZO", "PS", "PL", "PL", "PL"],
        }
        for a in FIVE_TERMS:
            for j, b in enumerate(FIVE_TERMS):
                assert TURN_RULES[a][b] == expected[a][j], (a, b)

    def test_center_cell_holds(self, turn_controller):
        assert turn_controller.steer(0.0, 0.0, 0.0) == 0.0

    def test_pinned_extreme_cells(self, turn_controller):
        ctrl = turn_controller.controller
        e_peaks = ctrl.input_a.breakpoints
        r_peaks = ctrl.input_b.breakpoints
        top = ctrl.outputs.values[-1]
        # large positive error, error still growing fast: hard positive turn
        assert evaluate(ctrl, e_peaks[-1], r_peaks[-1]) == pytest.approx(top)
        # large positive error but collapsing at the fastest rate: back to zero
        assert evaluate(ctrl, e_peaks[-1], r_peaks[0]) == pytest.approx(0.0)

    def test_monotone_along_centered_slices(self, turn_controller):
        # strict monotonicity holds on the slices through the zero peak; off
        # center the max-aggregation can leave sub-0.01 rad ripples in the
        # saturated corners, which we bound instead
        ctrl = turn_controller.controller
        es = np.linspace(*ctrl.input_a.universe, 201)
        outs = [evaluate(ctrl, float(e), 0.0) for e in es]
        assert all(b - a >= -1e-12 for a, b in zip(outs, outs[1:]))
        rates = np.linspace(*ctrl.input_b.universe, 201)
        outs = [evaluate(ctrl, 0.0, float(r)) for r in rates]
        assert all(b - a >= -1e-12 for a, b in zip(outs, outs[1:]))
        for rate in (-0.5, 0.5):
            outs = [evaluate(ctrl, float(e), rate) for e in es]
            assert all(b - a >= -0.01 for a, b in zip(outs, outs[1:]))

    def test_direction_aware_command_flips_for_forward(self, turn_controller):
        params = VehicleParams()
        back = steering_command(turn_controller, -math.pi / 2, 0.0, 0.0,
                                Direction.BACKWARD, params.max_steer)
        fwd = steering_command(turn_controller, -math.pi / 2, 0.0, 0.0,
                               Direction.FORWARD, params.max_steer)
        assert back == pytest.approx(-fwd)
        assert abs(back) <= params.max_steer


class TestSlotLength:
    def test_zero_counts(self):
        assert slot_length(0, VehicleParams()) == 0.0

    def test_full_revolution_is_circumference(self):
        params = VehicleParams(wheel_diameter=0.05)
        got = slot_length(params.encoder_counts_per_rev, params)
        assert got == pytest.approx(math.pi * 0.05)
        assert got == pytest.approx(0.157, abs=5e-4)

    def test_coefficient_is_configurable(self):
        params = VehicleParams(wheel_diameter=0.05)
        doubled = slot_length(params.encoder_counts_per_rev, params,
                              circumference_coeff=2 * math.pi)
        assert doubled == pytest.approx(2 * math.pi * 0.05)

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            slot_length(-1, VehicleParams())


class TestParkingDecision:
    def test_action_at_term_peaks(self, decider):
        depth_peak = dict(zip(decider.depth_family.labels, decider.depth_family.breakpoints))
        length_peak = dict(zip(decider.length_family.labels, decider.length_family.breakpoints))
        assert decider.decide(depth_peak[PFIT], length_peak[PFIT]) is ParkAction.PARALLEL
        assert decider.decide(depth_peak[VFIT], length_peak[VFIT]) is ParkAction.VERTICAL
        for length in (0.0, length_peak[VFIT], length_peak[PFIT], 0.5):
            assert decider.decide(depth_peak[UNFIT], length) is ParkAction.CONTINUE

    def test_nine_cell_grid(self, decider):
        depth_peak = dict(zip(decider.depth_family.labels, decider.depth_family.breakpoints))
        length_peak = dict(zip(decider.length_family.labels, decider.length_family.breakpoints))
        actions = {"P": ParkAction.PARALLEL, "V": ParkAction.VERTICAL, "C": ParkAction.CONTINUE}
        for d_label, row in DECISION_RULES.items():
            for l_label, cell in row.items():
                got = decider.decide(depth_peak[d_label], length_peak[l_label])
                assert got is actions[cell], (d_label, l_label)

    def test_tie_breaks_to_continue(self, decider):
        # exactly between the unfit and parallel depth peaks both P and C fire
        # at 0.5: the conservative action wins
        bp = decider.depth_family.breakpoints
        boundary_depth = (bp[0] + bp[1]) / 2.0
        long_enough = decider.length_family.breakpoints[-1]
        assert decider.decide(boundary_depth, long_enough) is ParkAction.CONTINUE

    def test_scaling_invariance(self, decider):
        k = 14.0  # desk scale back to full scale
        scaled = ParkingDecider(
            depth_family=MembershipFamily(
                decider.depth_family.labels,
                tuple(b * k for b in decider.depth_family.breakpoints),
                tuple(u * k for u in decider.depth_family.universe),
            ),
            length_family=MembershipFamily(
                decider.length_family.labels,
                tuple(b * k for b in decider.length_family.breakpoints),
                tuple(u * k for u in decider.length_family.universe),
            ),
            rules=decider.rules,
        )
        rng = np.random.default_rng(31)
        for _ in range(500):
            depth = float(rng.uniform(0.0, 0.5))
            length = float(rng.uniform(0.0, 0.5))
            assert decider.decide(depth, length) is scaled.decide(depth * k, length * k)


class TestSlotScanner:
    def make(self):
        return SlotScanner(edge_threshold=0.24, hysteresis=0.02, depth_offset=0.12)

    def test_measures_an_open_stretch(self):
        scanner = self.make()
        travel = 0.0
        out = None
        for reading in [0.12] * 10 + [0.42] * 20 + [0.12] * 5:
            out = scanner.update(reading, travel) or out
            travel += 0.002
        assert out is not None
        assert out.length == pytest.approx(0.002 * 20, abs=1e-9)
        assert out.depth == pytest.approx(0.30, abs=1e-9)

    def test_initial_open_space_is_ignored(self):
        scanner = self.make()
        travel = 0.0
        for reading in [0.8] * 50 + [0.12] * 10:
            assert scanner.update(reading, travel) is None
            travel += 0.002

    def test_depth_uses_minimum_open_reading(self):
        scanner = self.make()
        travel = 0.0
        out = None
        for reading in [0.12] * 5 + [0.42, 0.42, 0.35, 0.42] + [0.12]:
            out = scanner.update(reading, travel) or out
            travel += 0.002
        assert out.depth == pytest.approx(0.35 - 0.12)

    def test_hysteresis_suppresses_chatter(self):
        scanner = self.make()
        travel = 0.0
        candidates = []
        readings = [0.12] * 5 + [0.245, 0.235, 0.245, 0.235] * 3 + [0.12] * 5
        for reading in readings:
            c = scanner.update(reading, travel)
            if c:
                candidates.append(c)
            travel += 0.002
        assert candidates == []
