import math

import numpy as np
import pytest

from autopark.fuzzy import (
    FuzzyController,
    InferenceError,
    MembershipFamily,
    RuleTable,
    SingletonOutputs,
    defuzzify,
    evaluate,
    fuzzify,
    infer,
)
from autopark.control import POSTURE_RULES, FIVE_TERMS, make_five_term_controller

BP = (-0.10, -0.04, 0.0, 0.04, 0.10)
UNIVERSE = (-0.15, 0.15)
SINGLETONS = (-30.0, -15.0, 0.0, 15.0, 30.0)


def family():
    return MembershipFamily(FIVE_TERMS, BP, UNIVERSE)


def table_i_controller():
    return make_five_term_controller(BP, UNIVERSE, BP, UNIVERSE, SINGLETONS, POSTURE_RULES)


class TestMembershipFamily:
    def test_rejects_non_increasing_breakpoints(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            MembershipFamily(FIVE_TERMS, (-0.1, -0.1, 0.0, 0.04, 0.1), UNIVERSE)

    def test_rejects_breakpoints_outside_universe(self):
        with pytest.raises(ValueError, match="outside universe"):
            MembershipFamily(FIVE_TERMS, BP, (-0.05, 0.15))

    def test_rejects_label_count_mismatch(self):
        with pytest.raises(ValueError):
            MembershipFamily(("A", "B"), BP, UNIVERSE)


class TestFuzzify:
    def test_peak_membership_is_one(self):
        mu = fuzzify(0.0, family())
        assert mu["ZO"] == 1.0
        assert sum(mu.values()) == 1.0
        assert all(v == 0.0 for k, v in mu.items() if k != "ZO")

    def test_midpoint_splits_evenly(self):
        mu = fuzzify(0.02, family())  # midway between ZO and PS peaks
        assert mu["ZO"] == pytest.approx(0.5)
        assert mu["PS"] == pytest.approx(0.5)

    def test_clamped_shoulder_saturates(self):
        mu = fuzzify(UNIVERSE[1] + 100.0, family())
        assert mu["PL"] == 1.0
        mu = fuzzify(UNIVERSE[0] - 100.0, family())
        assert mu["NL"] == 1.0

    def test_at_most_two_nonzero_terms(self):
        rng = np.random.default_rng(7)
        for x in rng.uniform(-0.2, 0.2, size=500):
            mu = fuzzify(float(x), family())
            assert sum(1 for v in mu.values() if v > 0.0) <= 2

    def test_partition_of_unity(self):
        rng = np.random.default_rng(11)
        fam = family()
        for x in rng.uniform(*UNIVERSE, size=10_000):
            assert abs(sum(fuzzify(float(x), fam).values()) - 1.0) <= 1e-12


class TestInfer:
    def test_both_inputs_at_extreme_peak(self):
        acts = infer(table_i_controller(), 0.10, 0.10)
        assert acts == {"PL": 1.0}

    def test_center_cell(self):
        acts = infer(table_i_controller(), 0.0, 0.0)
        assert acts == {"ZO": 1.0}

    def test_four_firing_rules_aggregate_by_max(self):
        # a midway NS/ZO fires two terms at 0.5; b sits exactly on ZO peak,
        # so rules (NS,ZO)->NS and (ZO,ZO)->ZO fire at 0.5 each
        acts = infer(table_i_controller(), -0.02, 0.0)
        assert acts == {"NS": pytest.approx(0.5), "ZO": pytest.approx(0.5)}

    def test_activations_bounded(self):
        rng = np.random.default_rng(3)
        ctrl = table_i_controller()
        for _ in range(200):
            a, b = rng.uniform(-0.2, 0.2, size=2)
            acts = infer(ctrl, float(a), float(b))
            assert acts
            assert all(0.0 < v <= 1.0 for v in acts.values())


class TestDefuzzify:
    def outputs(self):
        return SingletonOutputs(FIVE_TERMS, SINGLETONS)

    def test_single_active_term(self):
        assert defuzzify({"ZO": 1.0}, self.outputs()) == 0.0

    def test_two_equal_terms_average(self):
        assert defuzzify({"PS": 0.5, "PL": 0.5}, self.outputs()) == pytest.approx(22.5)

    def test_all_zero_raises(self):
        with pytest.raises(InferenceError):
            defuzzify({"ZO": 0.0}, self.outputs())

    def test_rejects_unordered_singletons(self):
        with pytest.raises(ValueError, match="not increasing"):
            SingletonOutputs(FIVE_TERMS, (-30.0, -15.0, 0.0, 15.0, 10.0))


class TestEvaluate:
    def test_every_table_cell_exact_at_peaks(self):
        # at term peaks exactly one rule fires, so the output must equal the
        # cell's singleton with no averaging error
        ctrl = table_i_controller()
        outputs = dict(zip(FIVE_TERMS, SINGLETONS))
        for i, la in enumerate(FIVE_TERMS):
            for j, lb in enumerate(FIVE_TERMS):
                got = evaluate(ctrl, BP[i], BP[j])
                assert got == pytest.approx(outputs[POSTURE_RULES[la][lb]], abs=1e-9)

    def test_continuity_under_tiny_perturbation(self):
        ctrl = table_i_controller()
        rng = np.random.default_rng(5)
        for _ in range(300):
            a, b = (float(v) for v in rng.uniform(-0.12, 0.12, size=2))
            assert abs(evaluate(ctrl, a + 1e-9, b) - evaluate(ctrl, a, b)) < 1e-6
            assert abs(evaluate(ctrl, a, b + 1e-9) - evaluate(ctrl, a, b)) < 1e-6

    def test_monotone_in_gap_error_at_zero_skew(self):
        ctrl = table_i_controller()
        xs = np.linspace(-0.15, 0.15, 301)
        outs = [evaluate(ctrl, float(x), 0.0) for x in xs]
        assert all(b - a >= -1e-12 for a, b in zip(outs, outs[1:]))

    def test_output_bounded_by_extreme_singletons(self):
        ctrl = table_i_controller()
        rng = np.random.default_rng(9)
        for _ in range(500):
            a, b = (float(v) for v in rng.uniform(-0.5, 0.5, size=2))
            out = evaluate(ctrl, a, b)
            assert SINGLETONS[0] <= out <= SINGLETONS[-1]

    def test_deterministic_bit_identical(self):
        ctrl = table_i_controller()
        vals = {evaluate(ctrl, 0.0123456, -0.0456789) for _ in range(10)}
        assert len(vals) == 1


class TestValidation:
    def test_rule_table_missing_cell(self):
        cells = {(a, b): "ZO" for a in FIVE_TERMS for b in FIVE_TERMS}
        del cells[("ZO", "ZO")]
        with pytest.raises(ValueError, match="missing cell"):
            RuleTable(FIVE_TERMS, FIVE_TERMS, cells)

    def test_controller_rejects_unknown_output_label(self):
        rules = {a: {b: "XX" for b in FIVE_TERMS} for a in FIVE_TERMS}
        with pytest.raises(ValueError, match="singleton values"):
            make_five_term_controller(BP, UNIVERSE, BP, UNIVERSE, SINGLETONS, rules)

    def test_controller_rejects_mismatched_table(self):
        fam = family()
        table = RuleTable.from_rows({a: {b: "ZO" for b in ("X", "Y")} for a in FIVE_TERMS})
        with pytest.raises(ValueError, match="columns"):
            FuzzyController(fam, fam, table, SingletonOutputs(FIVE_TERMS, SINGLETONS))
