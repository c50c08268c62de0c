import itertools
import math
from fractions import Fraction

import pytest  # type: ignore

from scripts.engine.core import game, structure, zoo
from scripts.engine.core.utility import create_rng
from scripts.engine.internal.constant import BINARY
from scripts.engine.internal.error import AlphabetMismatchError, InvalidGameError, UnsupportedGameError


test_zoo_registry_parameters = sorted(zoo.ZOO)


@pytest.mark.parametrize("name", test_zoo_registry_parameters)
def test_zoo_registry(name: str):
    constructor = zoo.ZOO[name]
    g = constructor(1) if name == "hw1-canonical" else constructor()
    assert sum(g.distribution.values()) == 1
    assert g.players == 3


def test_anti_correlation_predicate():
    g = zoo.anti_correlation()
    assert set(g.distribution) == {("0", "1", "1"), ("1", "0", "1"), ("1", "1", "0")}
    assert g.win_weight(("0", "1", "1"), ("1", "1", "0")) == 1  # player 1's answer is ignored
    assert g.win_weight(("0", "1", "1"), ("0", "1", "1")) == 0


def test_ghz_support_game_table_predicate():
    table = {((0, 0, 0), (0, 0, 0)): 1, ((0, 1, 1), (1, 1, 1)): Fraction(1, 2)}
    g = zoo.ghz_support_game(table)
    assert g.win_weight(("0", "1", "1"), ("1", "1", "1")) == Fraction(1, 2)
    assert not g.is_deterministic


def test_ghz_support_game_refuses_bad_weight():
    with pytest.raises(AlphabetMismatchError):
        zoo.ghz_support_game(lambda x, a: 2)


def test_four_point_and_custom_predicate():
    g = zoo.four_point_and_game(lambda x, a: a[2] == 1)
    assert game.game_value(g)[0] == 1


############################ HW1 ############################


test_hw1_canonical_parameters = [1, 2, 3]


@pytest.mark.parametrize("k", test_hw1_canonical_parameters)
def test_hw1_canonical_shape(k: int):
    g = zoo.hw1_canonical(k)
    assert len(g.answers[0]) == 2 ** k
    assert g.answers[2] == tuple(str(c) for c in range(k))
    # disjoint strings at (0,0,1): 3^k pairs per index
    assert len(g.wins_at(("0", "0", "1"))) == 3 ** k * k


def test_hw1_canonical_refuses_zero():
    with pytest.raises(InvalidGameError):
        zoo.hw1_canonical(0)


def test_translate_hw1_strategy_wins_wherever_source_wins():
    source = zoo.flip_presentation(zoo.anti_correlation())
    n = 2
    repeated = game.tensor_power(source, n)
    value, witness = game.game_value(repeated)
    translated = zoo.translate_hw1_strategy(source, witness, n)
    target = game.tensor_power(zoo.hw1_canonical(2), n)

    assert game.strategy_value(target, translated) >= value
    for x in repeated.distribution:
        if repeated.win_weight(x, witness.answer(x)):
            assert target.win_weight(x, translated.answer(x)) == 1


def test_translate_hw1_strategy_random_pairs():
    source = zoo.flip_presentation(zoo.anti_correlation())
    repeated = game.tensor_power(source, 2)
    target = game.tensor_power(zoo.hw1_canonical(2), 2)
    support = sorted(repeated.distribution)
    for trial in range(100):
        rng = create_rng(31, trial)
        strategy = game.ProductStrategy(
            tuple(
                {q: repeated.answers[j][int(rng.integers(0, len(repeated.answers[j])))] for q in repeated.questions[j]}
                for j in range(3)
            )
        )
        translated = zoo.translate_hw1_strategy(source, strategy, 2)
        x = support[int(rng.integers(0, len(support)))]
        if repeated.win_weight(x, strategy.answer(x)):
            assert target.win_weight(x, translated.answer(x)) == 1
        assert game.strategy_value(target, translated) >= game.strategy_value(repeated, strategy)


def test_translate_hw1_strategy_refuses():
    with pytest.raises(UnsupportedGameError):
        zoo.translate_hw1_strategy(zoo.ghz_game(), game.game_value(zoo.ghz_game())[1], 1)


############################ RESTRICTED GAMES ############################


test_restricted_two_player_parameters = ["0", "1"]


@pytest.mark.parametrize("c0", test_restricted_two_player_parameters)
def test_restricted_two_player(c0: str):
    g = zoo.restricted_two_player(zoo.four_point_and_game(), c0, {"0"}, {"1"})
    assert g.players == 2
    value = game.game_value(g)[0]
    assert value == Fraction(2, 3)
    assert value < 1


def test_restricted_two_player_unrestricted():
    g = zoo.restricted_two_player(zoo.four_point_and_game(), "0", BINARY, BINARY)
    assert game.game_value(g)[0] == 1


def test_restricted_two_player_refuses():
    with pytest.raises(UnsupportedGameError):
        zoo.restricted_two_player(zoo.ghz_game(), "0", BINARY, BINARY)
    with pytest.raises(AlphabetMismatchError):
        zoo.restricted_two_player(zoo.four_point_and_game(), "2", BINARY, BINARY)


def test_fixed_answer_two_player():
    source = zoo.flip_presentation(zoo.anti_correlation())
    g = zoo.fixed_answer_two_player(source, 2, "0")
    assert g.players == 2
    assert set(g.distribution) == {("0", "0"), ("0", "1"), ("1", "0")}
    assert game.game_value(g)[0] <= game.game_value(source)[0]


############################ RANDOM 3-CNF ############################


def test_random_3cnf_game_is_reproducible():
    first, g = zoo.random_3cnf_game(4, 10, 11)
    second, h = zoo.random_3cnf_game(4, 10, 11)
    assert first == second
    assert game.dump_game(g) == game.dump_game(h)
    assert len(first.clauses) == 10
    assert all(0 <= v < 4 and sign in (0, 1) for clause in first.clauses for v, sign in clause)


def test_random_3cnf_game_seeds_differ():
    formulas = {zoo.random_3cnf_game(4, 10, seed)[0].clauses for seed in range(1000)}
    assert len(formulas) == 1000


def test_random_3cnf_game_value_is_best_satisfied_fraction_or_more():
    formula, g = zoo.random_3cnf_game(3, 8, 5)
    best = max(formula.satisfied_fraction(bits) for bits in itertools.product((0, 1), repeat=3))
    # a shared assignment is one strategy; the players may also answer inconsistently
    assert game.game_value(g)[0] >= best


def test_random_3cnf_game_refuses():
    with pytest.raises(InvalidGameError):
        zoo.random_3cnf_game(0, 5, 1)


def test_cnf_connectivity_experiment(benchmark):
    rows = benchmark(zoo.cnf_connectivity_experiment, 3, 20, 4, 100)
    assert [row.seed for row in rows] == [100, 101, 102, 103]
    for row in rows:
        assert row.value is not None and 0 <= row.value <= 1
        _, g = zoo.random_3cnf_game(3, 20, row.seed)
        assert row.connected == structure.connection_graph(g).is_connected
    assert set(rows[0].to_record()) == {"seed", "connected", "playerwise_connected", "value"}


def test_cnf_connectivity_experiment_independent_of_workers():
    serial = zoo.cnf_connectivity_experiment(3, 12, 3, 7, with_value=False)
    parallel = zoo.cnf_connectivity_experiment(3, 12, 3, 7, with_value=False, workers=2)
    assert serial == parallel
    assert all(row.value is None for row in serial)


def test_cnf_trends(benchmark):
    def _fractions():
        connected = {}
        for d in range(4, 9):
            sizes = [d, 2 * d * d, 8 * d * d * math.ceil(math.log2(d))]
            connected[d] = [
                sum(row.playerwise_connected for row in zoo.cnf_connectivity_experiment(d, m, 100, 0, False, 4)) / 100
                for m in sizes
            ]
        values = {
            d: [row.value for row in zoo.cnf_connectivity_experiment(d, 50 * d, 100, 0, True, 4)] for d in (4, 5, 6)
        }
        return connected, values

    connected, values = benchmark.pedantic(_fractions, rounds=1, iterations=1)
    for fractions in connected.values():
        assert fractions == sorted(fractions)
        assert fractions[0] <= 0.2
        assert fractions[-1] >= 0.95
    for row_values in values.values():
        assert sum(1 for value in row_values if Fraction(4, 5) <= value < 1) >= 90
