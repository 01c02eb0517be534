#!/usr/bin/env python3
"""
Tests for scaling schedules, integer dimensioning and regime diagnostics.
"""

import io
import math
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from data import EXPANSION_TOL, SCHEDULE_COLUMNS
from keygraph import (
    REGIME_LABEL,
    DeviationSpec,
    InfeasibleTargetError,
    InvalidParameterError,
    ModelParams,
    Theta,
    alpha_schedule_from_config,
    build_schedule,
    classify_regime,
    deviation_from_config,
    deviation_of,
    one_minus_q,
    probability_bounds,
    strong_to_deviation,
    write_schedule_csv,
)


def constant(alpha):
    return lambda n: alpha


class TestDeviation:
    def test_strong_scaling_at_threshold(self):
        assert all(strong_to_deviation(1.0, n) == 0.0 for n in (2, 10, 1000))

    def test_strong_scaling_below_threshold(self):
        assert strong_to_deviation(0.5, 100) == pytest.approx(-0.5 * math.log(100))

    def test_strong_scaling_rejects_bad_c(self):
        with pytest.raises(InvalidParameterError):
            strong_to_deviation(0.0, 10)

    def test_kinds(self):
        assert DeviationSpec("constant", value=1.5).at(10) == 1.5
        assert DeviationSpec("c_log", value=2.0).at(100) == pytest.approx(math.log(100))
        assert DeviationSpec("log_log", value=-1).at(100) == pytest.approx(
            -math.log(math.log(100))
        )
        assert DeviationSpec("table", table={"10": 0.25}).at(10) == 0.25

    def test_table_gap(self):
        with pytest.raises(InvalidParameterError):
            DeviationSpec("table", table={10: 0.0}).at(11)

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameterError):
            DeviationSpec("quadratic")

    def test_fixed_instance_deviation_grows(self):
        gammas = [
            deviation_of(ModelParams.from_values(n=n, K=2, P=50, alpha=0.5))
            for n in (10, 100, 1000)
        ]
        assert gammas[0] < gammas[1] < gammas[2]

    def test_from_config(self):
        assert deviation_from_config({"kind": "c_log", "c": 3}).value == 3.0
        assert deviation_from_config({"kind": "log_log", "sign": -1}).value == -1
        with pytest.raises(InvalidParameterError):
            deviation_from_config("c_log")


class TestBuildSchedule:
    def test_threshold_schedule(self):
        schedule = build_schedule(
            [100, 1000, 10000], constant(1.0), DeviationSpec("c_log", 1.0), {"fix_K": 4}
        )
        assert [entry.n for entry in schedule] == [100, 1000, 10000]
        for entry in schedule:
            assert entry.theta.K == 4
            assert entry.c_equiv == pytest.approx(1.0, rel=0.10)

    def test_small_n_feasible(self):
        (entry,) = build_schedule([3], constant(1.0), DeviationSpec("constant"), {"fix_K": 1})
        assert entry.gamma_target == 0.0
        assert (entry.theta.K, entry.theta.P) == (1, 3)

    def test_round_trip(self):
        schedule = build_schedule(
            [50, 200, 800], constant(0.7), DeviationSpec("c_log", 1.5), {"fix_K": 3}
        )
        for entry in schedule:
            implied = entry.n * entry.alpha * one_minus_q(entry.theta) - math.log(entry.n)
            assert implied == pytest.approx(entry.gamma_achieved, abs=EXPANSION_TOL)
            assert entry.params.theta == entry.theta

    def test_sorted_and_deduplicated(self):
        schedule = build_schedule(
            [800, 50, 800], constant(1.0), DeviationSpec("c_log", 2.0), {"fix_K": 2}
        )
        assert [entry.n for entry in schedule] == [50, 800]

    def test_pool_grows_as_target_shrinks(self):
        n_values = [100, 200, 400, 800, 1600, 3200]
        schedule = build_schedule(
            n_values, constant(1.0), DeviationSpec("c_log", 1.0), {"fix_K": 4}
        )
        pools = [entry.theta.P for entry in schedule]
        assert pools == sorted(pools)

    def test_fix_pool(self):
        schedule = build_schedule(
            [100, 1000], constant(1.0), DeviationSpec("c_log", 2.0), {"fix_P": 10000}
        )
        assert all(entry.theta.P == 10000 for entry in schedule)
        ks = [entry.theta.K for entry in schedule]
        assert ks[0] >= ks[1]

    def test_huge_fixed_pool(self):
        started = time.perf_counter()
        (entry,) = build_schedule(
            [1000], constant(1.0), DeviationSpec("c_log", 2.0), {"fix_P": 10**9}
        )
        elapsed = time.perf_counter() - started

        assert entry.theta.P == 10**9
        assert entry.c_equiv == pytest.approx(2.0, rel=0.01)
        # 1 - q is about K^2 / P, so K sits near sqrt(target * P)
        target = 2.0 * math.log(1000) / 1000
        assert entry.theta.K == pytest.approx(math.sqrt(target * 10**9), rel=0.05)
        assert elapsed < 10.0

    @pytest.mark.parametrize("target", [0.05, 0.2, 0.6, 0.9])
    def test_fix_pool_picks_closest_ring(self, target):
        n, P = 100, 2000
        gamma = target * n - math.log(n)
        (entry,) = build_schedule(
            [n], constant(1.0), DeviationSpec("table", table={n: gamma}), {"fix_P": P}
        )

        wanted = (math.log(n) + gamma) / n
        # Past P // 2 + 1 every ring meets every other, so 1 - q stays at 1
        best = min(
            range(1, P // 2 + 2),
            key=lambda K: abs(one_minus_q(Theta(K=K, P=P)) - wanted),
        )
        assert entry.theta.K == best

    def test_zero_alpha_is_infeasible(self):
        with pytest.raises(InfeasibleTargetError) as info:
            build_schedule([100], constant(0.0), DeviationSpec("c_log", 2.0), {"fix_K": 4})
        assert info.value.n == 100

    def test_target_above_one_is_infeasible(self):
        with pytest.raises(InfeasibleTargetError):
            build_schedule([10], constant(1.0), DeviationSpec("c_log", 50.0), {"fix_K": 4})

    def test_unresolvable_target_is_infeasible(self):
        # K = 1 and P = 2 gives 1 - q = 0.5, nowhere near a tiny target
        with pytest.raises(InfeasibleTargetError):
            build_schedule([10000], constant(1.0), DeviationSpec("c_log", 1.0), {"fix_P": 2})

    @pytest.mark.parametrize(
        "rule", [{}, {"fix_K": 0}, {"fix_Q": 3}, {"fix_K": 2, "fix_P": 9}, {"fix_P": 2.5}]
    )
    def test_bad_dimension_rule(self, rule):
        with pytest.raises(InvalidParameterError):
            build_schedule([100], constant(1.0), DeviationSpec("c_log", 1.0), rule)

    def test_csv(self):
        schedule = build_schedule(
            [100, 400], constant(1.0), DeviationSpec("c_log", 2.0), {"fix_K": 4}
        )
        buffer = io.StringIO()
        write_schedule_csv(schedule, buffer)
        lines = buffer.getvalue().split("\n")
        assert lines[0] == ",".join(SCHEDULE_COLUMNS)
        assert lines[1].startswith("100,4,")
        assert lines[-1] == ""
        assert len(lines) == 4


class TestFixedTheta:
    def test_constant_parameters(self):
        schedule = build_schedule(
            [100, 400, 1600], constant(0.5), None, {"fixed": (2, 100)}
        )
        assert [entry.theta for entry in schedule] == [Theta(K=2, P=100)] * 3
        assert [entry.alpha for entry in schedule] == [0.5] * 3
        assert all(entry.gamma_target is None for entry in schedule)
        for entry in schedule:
            assert entry.gamma_achieved == pytest.approx(deviation_of(entry.params), abs=1e-9)

    def test_one_law_for_any_fixed_instance(self):
        schedule = build_schedule(
            [100, 400, 1600], constant(0.5), None, {"fixed": (2, 100)}
        )
        gammas = [entry.gamma_achieved for entry in schedule]
        assert gammas[0] < gammas[1] < gammas[2]

        lowers = [probability_bounds(entry.params)[0] for entry in schedule]
        assert lowers == sorted(lowers)
        assert lowers[-1] > 0.999

        report = classify_regime(schedule)
        assert report["gamma_sign"] == "positive"
        assert report["gamma_trend"] == "increasing"
        assert report["one_law_trend"]

    def test_target_recorded_when_given(self):
        (entry,) = build_schedule(
            [100], constant(1.0), DeviationSpec("constant", 0.0), {"fixed": (1, 50)}
        )
        assert entry.gamma_target == 0.0
        assert entry.theta == Theta(K=1, P=50)

    @pytest.mark.parametrize("pair", [(5, 5), (0, 10), 3, (1, 2, 3)])
    def test_bad_pair(self, pair):
        with pytest.raises(InvalidParameterError):
            build_schedule([100], constant(1.0), None, {"fixed": pair})

    def test_other_rules_need_a_deviation(self):
        with pytest.raises(InvalidParameterError):
            build_schedule([100], constant(1.0), None, {"fix_K": 4})


class TestAlphaSchedules:
    def test_constant(self):
        assert alpha_schedule_from_config(0.3)(1000) == 0.3
        assert alpha_schedule_from_config({"kind": "constant", "value": 0.4})(5) == 0.4

    def test_inverse_log(self):
        schedule = alpha_schedule_from_config({"kind": "inverse_log", "scale": 1.0})
        assert schedule(1000) == pytest.approx(1 / math.log(1000))
        assert schedule(2) == 1.0

    def test_table(self):
        schedule = alpha_schedule_from_config({"kind": "table", "values": {"100": 0.5}})
        assert schedule(100) == 0.5
        with pytest.raises(InfeasibleTargetError):
            schedule(200)

    @pytest.mark.parametrize("value", [1.5, "half", {"kind": "spiral"}, True])
    def test_rejects(self, value):
        with pytest.raises(InvalidParameterError):
            alpha_schedule_from_config(value)


class TestClassifyRegime:
    def test_supercritical_trend(self):
        schedule = build_schedule(
            [200, 800, 3200, 12800], constant(0.5), DeviationSpec("c_log", 2.0), {"fix_K": 4}
        )
        report = classify_regime(schedule)
        assert report["label"] == REGIME_LABEL
        assert report["gamma_sign"] == "positive"
        assert report["gamma_trend"] == "increasing"
        assert report["one_law_trend"]
        assert len(report["rows"]) == 4
        for row in report["rows"]:
            assert row["e_I"] <= row["first_moment_bound"] * (1 + 1e-12)

    def test_inverse_log_channels(self):
        schedule = build_schedule(
            [100, 1000, 10000],
            alpha_schedule_from_config({"kind": "inverse_log", "scale": 1.0}),
            DeviationSpec("c_log", 0.5),
            {"fix_K": 4},
        )
        report = classify_regime(schedule)
        assert [row["alpha_log_n"] for row in report["rows"]] == pytest.approx([1.0] * 3)
        assert report["alpha_log_n_trend"] == "constant"
        assert report["zero_law_covered"]

    def test_uncovered_zero_law(self):
        schedule = build_schedule(
            [100, 1000, 10000], constant(1.0), DeviationSpec("c_log", 0.5), {"fix_K": 4}
        )
        report = classify_regime(schedule)
        assert report["gamma_sign"] == "negative"
        assert report["alpha_log_n_trend"] == "diverging"
        assert report["limsup_alpha_one"]
        assert not report["zero_law_covered"]

    def test_needs_entries(self):
        with pytest.raises(InvalidParameterError):
            classify_regime([])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
