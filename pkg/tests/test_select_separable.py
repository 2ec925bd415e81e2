"""Tests for the analytic top-k selection and the exhaustive oracle."""

import numpy as np
import pytest

from sensel import measure, model
from sensel.errors import NotSeparableNoise, TooLarge
from sensel.select_separable import exhaustive_opt, select_topk, top_k_indices

from conftest import rand_scenario


def scenario_with_measures(values, per_step, rng, horizon=1, energy=None):
    """Scalar-state scenario whose per-sensor measures are exactly `values`
    (sensor i has H = 1 and noise 1/value)."""
    num = len(values)
    system = model.DynamicSystem.build([[1.0]], [[1.0]])
    sensors = [model.SensorModel.build([[1.0]], [float(i), 0.0]) for i in range(num)]
    blocks = [[[1.0 / v]] for v in values]
    noise = model.NoiseModel.build([1] * num, base_blocks=blocks)
    return model.make_scenario(
        system, sensors, noise,
        model.ConstraintSet.build([per_step] * horizon, energy=energy),
        np.ones(horizon), [0.0], [[1.0]], seed=0,
    )


class TestTopK:
    def test_orders_by_measure(self, rng):
        scenario = scenario_with_measures([0.3, 0.1, 0.2], 2, rng)
        column = select_topk(scenario, 0)
        np.testing.assert_array_equal(column, [1, 0, 1])

    def test_tie_goes_to_lowest_index(self, rng):
        scenario = scenario_with_measures([0.2, 0.2, 0.2], 1, rng)
        column = select_topk(scenario, 0)
        np.testing.assert_array_equal(column, [1, 0, 0])

    def test_correlated_noise_rejected(self, rng):
        scenario = rand_scenario(rng, num_sensors=3, horizon=1, correlated=True)
        with pytest.raises(NotSeparableNoise):
            select_topk(scenario, 0)

    def test_top_k_indices_stable(self):
        assert top_k_indices(np.array([1.0, 3.0, 3.0, 2.0]), 2) == [1, 2]


class TestExhaustive:
    def test_three_sensor_enumeration(self, rng):
        scenario = scenario_with_measures([0.3, 0.1, 0.2], 1, rng)
        schedule, value = exhaustive_opt(scenario, "f3")
        np.testing.assert_array_equal(schedule.gamma[:, 0], [1, 0, 0])
        assert value == pytest.approx(0.3)

    def test_budget_pruning_respected(self, rng):
        """With a one-use budget on the best sensor, it appears only once."""
        scenario = scenario_with_measures(
            [0.5, 0.2, 0.1], 1, rng, horizon=2, energy=[1, 2, 2]
        )
        schedule, _ = exhaustive_opt(scenario, "f3")
        assert schedule.satisfies(scenario.constraints)
        assert schedule.gamma[0].sum() <= 1

    def test_cap_exceeded(self, rng):
        scenario = rand_scenario(
            rng, num_sensors=8, horizon=3, per_step=[4, 4, 4], correlated=False
        )
        with pytest.raises(TooLarge):
            exhaustive_opt(scenario, "f3", cap=10)

    def test_extra_linear_row_filters_schedules(self, rng):
        """A row forbidding the strongest sensor changes the optimum."""
        scenario = scenario_with_measures([0.5, 0.2, 0.1], 1, rng)
        forbid_first = model.LinearConstraint.build([1.0, 0.0, 0.0], "<=", 0.0)
        constraints = model.ConstraintSet.build([1], extra=[forbid_first])
        import dataclasses

        constrained = dataclasses.replace(scenario, constraints=constraints)
        schedule, value = exhaustive_opt(constrained, "f3")
        np.testing.assert_array_equal(schedule.gamma[:, 0], [0, 1, 0])
        assert value == pytest.approx(0.2)

    def test_topk_matches_exhaustive_f3_single_step(self, rng):
        """Count-constrained single step: the analytic rule attains the
        enumerated maximum exactly."""
        for _ in range(20):
            num = int(rng.integers(2, 7))
            scenario = rand_scenario(
                rng, num_sensors=num, horizon=1, correlated=False,
                per_step=[int(rng.integers(1, num + 1))],
            )
            column = select_topk(scenario, 0)
            schedule = model.SelectionSchedule.from_columns([column])
            _, best = exhaustive_opt(scenario, "f3")
            mine = measure.objective_f3(schedule, scenario)
            assert mine == best

    def test_topk_minimizes_both_trace_objectives(self, rng):
        """Uncorrelated noise, count constraints: the analytic selection
        attains the enumerated minima of both covariance traces on regular
        instances, where at every step the trace-best selection dominates
        the alternatives in the semidefinite order."""
        import itertools

        from sensel import linalg
        from sensel.filter import selection_gain

        checked = 0
        skipped = 0
        for _ in range(25):
            num = int(rng.integers(2, 6))
            horizon = int(rng.integers(1, 4))
            # scalar states keep every pair of gains comparable, so a good
            # share of instances stays regular
            state_dim = 1 if rng.random() < 0.5 else int(rng.integers(2, 4))
            scenario = rand_scenario(
                rng, num_sensors=num, horizon=horizon, correlated=False,
                per_step=[int(rng.integers(1, num))] * horizon,
                state_dim=state_dim,
            )
            noise_seq = scenario.noise_sequence()
            regular = True
            for n in range(horizon):
                gains = []
                for combo in itertools.combinations(
                    range(num), scenario.constraints.per_step[n]
                ):
                    col = np.zeros(num, dtype=np.int8)
                    col[list(combo)] = 1
                    gains.append(
                        selection_gain(scenario.sensors, noise_seq[n], col, n)
                    )
                traces = [float(np.trace(g)) for g in gains]
                top = int(np.argmax(traces))
                scale = 1.0 + abs(traces[top])
                if not all(
                    linalg.min_eigenvalue(gains[top] - g) >= -1e-9 * scale
                    for g in gains
                ):
                    regular = False
                    break
            if not regular:
                skipped += 1
                continue
            columns = [
                select_topk(scenario, n) for n in range(scenario.horizon)
            ]
            schedule = model.SelectionSchedule.from_columns(columns)
            _, f1_min = exhaustive_opt(scenario, "f1_trace")
            _, f2_min = exhaustive_opt(scenario, "f2_trace")
            mine_f1 = float(np.trace(measure.objective_f1(schedule, scenario)))
            mine_f2 = float(np.trace(measure.objective_f2(schedule, scenario)))
            assert mine_f1 == pytest.approx(f1_min, abs=1e-9)
            assert mine_f2 == pytest.approx(f2_min, abs=1e-9)
            checked += 1
        print(f"\ntop-k optimality: {checked} checked, {skipped} non-regular skipped")
        assert checked > 0

    def test_tie_break_lexicographic(self, rng):
        """Equal-measure sensors: the reported optimum has the smallest
        step-major 0/1 vector among the tied schedules."""
        scenario = scenario_with_measures([0.2, 0.2, 0.2], 1, rng)
        schedule, _ = exhaustive_opt(scenario, "f3")
        np.testing.assert_array_equal(schedule.gamma[:, 0], [0, 0, 1])

    def test_reduced_forty_sensor_replica(self):
        """Reduced replica of the 40-sensor direct-observation study
        (8 sensors, pick 3): the analytic selection reproduces the
        enumerated final-covariance trace on the frozen replica seed."""
        scenario = model.gen_uniform_scenario(
            8, 100.0, [(5.0, 7.0), (10.0, 12.0)], seed=0,
            model="random_walk", per_step=3, weights=[1.0],
            x0=[50.0, 50.0], p0=10.0 * np.eye(2),
        )
        column = select_topk(scenario, 0)
        schedule = model.SelectionSchedule.from_columns([column])
        mine = float(np.trace(measure.objective_f1(schedule, scenario)))
        _, best = exhaustive_opt(scenario, "f1_trace")
        assert mine == pytest.approx(best, abs=1e-9)

    def test_budgeted_nine_sensor_study(self):
        """The bundled 9-sensor, 3-step, budget-2 configuration enumerates
        quickly under budget pruning and the result respects every
        constraint; the relaxation route can only do as well or worse on
        the final covariance it does not directly optimize."""
        scenario = model.load_scenario("src/sensel/scenarios/example2.json")
        schedule, value = exhaustive_opt(scenario, "f1_trace")
        assert schedule.satisfies(scenario.constraints)
        from sensel.select_lp import build_lp, round_energy, solve_lp

        problem = build_lp(scenario)
        rounded = round_energy(solve_lp(problem), scenario, problem)
        lp_f1 = float(np.trace(measure.objective_f1(rounded.schedule, scenario)))
        assert value <= lp_f1 + 1e-12
