import json
from fractions import Fraction

import pytest  # type: ignore

from scripts.engine.core import game, search, zoo
from scripts.engine.internal.constant import OutputFormat, ValueMethod
from scripts.engine.internal.definition import BudgetConfigData, SearchConfigData
from scripts.engine.internal.error import BudgetExceededError, UsageError

SMALL_SEARCH = SearchConfigData(restarts=10, max_sweeps=50, kicks=5, kick_size=3, seed=1)


def test_baseline_strategy_is_repeated_optimum():
    g = zoo.anti_correlation()
    baseline = search.baseline_strategy(g, 2)
    assert game.strategy_value(game.tensor_power(g, 2), baseline) == Fraction(4, 9)


def test_baseline_strategy_falls_back_to_first_answers():
    g = zoo.hw1_canonical(2)
    baseline = search.baseline_strategy(g, 1, BudgetConfigData(max_strategy_count=10))
    assert all(set(table.values()) == {g.answers[j][0]} for j, table in enumerate(baseline.tables))


test_heuristic_value_search_parameters = [
    (1, Fraction(2, 3)),
    (3, Fraction(2, 3)),  # three copies still have value 2/3
]


@pytest.mark.parametrize(["n", "expected"], test_heuristic_value_search_parameters)
def test_heuristic_value_search(n: int, expected: Fraction):
    g = zoo.anti_correlation()
    value, strategy = search.heuristic_value_search(g, n, SMALL_SEARCH)
    assert value == expected
    assert game.strategy_value(game.tensor_power(g, n), strategy) == value


def test_heuristic_value_search_is_a_lower_bound():
    g = zoo.ghz_game()
    value, _ = search.heuristic_value_search(g, 2, SMALL_SEARCH)
    exact = game.game_value(game.tensor_power(g, 2))[0]
    assert Fraction(9, 16) <= value <= exact


def test_heuristic_value_search_is_reproducible():
    g = zoo.four_point_and_game()
    first = search.heuristic_value_search(g, 2, SMALL_SEARCH, seed=4)
    second = search.heuristic_value_search(g, 2, SMALL_SEARCH, seed=4)
    assert first[0] == second[0]
    assert first[1] == second[1]


def test_decay_curve_exhaustive(benchmark):
    curve = benchmark.pedantic(search.decay_curve, args=(zoo.anti_correlation(), 2), rounds=1, iterations=1)
    assert [record.n for record in curve.records] == [1, 2]
    assert all(record.method == ValueMethod.EXHAUSTIVE for record in curve.records)
    assert [record.exact_value for record in curve.records] == [Fraction(2, 3), Fraction(2, 3)]
    assert all(record.lower_bound == record.exact_value for record in curve.records)


def test_decay_curve_falls_back_to_search():
    g = zoo.anti_correlation()
    budget = BudgetConfigData(max_strategy_count=1000)
    curve = search.decay_curve(g, 2, seed=3, config=SMALL_SEARCH, budget=budget)
    first, second = curve.records
    assert first.method == ValueMethod.EXHAUSTIVE
    assert second.exact_value is None
    assert second.method in (ValueMethod.HEURISTIC, ValueMethod.BASELINE)
    assert Fraction(4, 9) <= second.lower_bound <= Fraction(2, 3)
    assert len(second.witness_digest) == 16


def test_decay_curve_emit():
    curve = search.decay_curve(zoo.anti_correlation(), 1)
    record = json.loads(curve.emit(OutputFormat.JSON))
    assert record["curve"][0]["exact_value"] == "2/3"
    assert record["curve"][0]["method"] == "exhaustive"

    lines = curve.emit(OutputFormat.CSV).splitlines()
    assert lines[0] == "n,exact_value,lower_bound,method,witness_digest,runtime_seconds"
    assert lines[1].startswith("1,2/3,2/3,exhaustive,")

    with pytest.raises(UsageError):
        curve.emit("xml")


def test_decay_curve_past_the_repetition_budget():
    # each copy of anti-correlation has 12 win entries, so only two copies fit
    g = zoo.anti_correlation()
    curve = search.decay_curve(g, 4, config=SMALL_SEARCH, budget=BudgetConfigData(max_win_entries=200))
    assert [record.n for record in curve.records] == [1, 2, 3, 4]
    assert [record.method for record in curve.records[:2]] == [ValueMethod.EXHAUSTIVE] * 2
    assert [record.method for record in curve.records[2:]] == [ValueMethod.BASELINE] * 2
    assert [record.exact_value for record in curve.records[2:]] == [None, None]
    assert [record.lower_bound for record in curve.records[2:]] == [Fraction(8, 27), Fraction(16, 81)]
    assert curve.records[2].witness_digest != curve.records[3].witness_digest


def test_hw1_canonical_two_copies_between_bounds():
    # two copies of G_2 are past the exhaustive budget; any strategy sits between val^2 and val
    g = zoo.hw1_canonical(2)
    assert game.game_value(g)[0] == Fraction(2, 3)
    with pytest.raises(BudgetExceededError):
        game.game_value(game.tensor_power(g, 2))
    value, _ = search.heuristic_value_search(g, 2, SMALL_SEARCH)
    assert Fraction(4, 9) <= value <= Fraction(2, 3)
