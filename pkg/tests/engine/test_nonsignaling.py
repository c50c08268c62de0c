from fractions import Fraction

import pytest  # type: ignore

from scripts.engine.core import game, nonsignaling, zoo
from scripts.engine.core.nonsignaling import EQ, GE, LE, LinearConstraint, LinearProgram, LpSolution, NsStrategy
from scripts.engine.internal.constant import BINARY, LpMethod, SubsetMode
from scripts.engine.internal.definition import BudgetConfigData
from scripts.engine.internal.error import BudgetExceededError, LpInfeasibleError, LpUnboundedError, UsageError


def _lp(constraints, objective, variables=2) -> LinearProgram:
    rows = tuple(
        LinearConstraint({j: Fraction(c) for j, c in coefficients.items()}, sense, Fraction(rhs))
        for coefficients, sense, rhs in constraints
    )
    return LinearProgram(tuple(f"v{j}" for j in range(variables)), rows, {j: Fraction(c) for j, c in objective.items()})


def _box_value(g: game.Game, box: NsStrategy) -> Fraction:
    return sum(
        (weight * w * box.probability(x, a) for x, weight in g.distribution.items() for a, w in g.wins_at(x).items()),
        Fraction(0),
    )


############################ SIMPLEX ############################


test_simplex_solve_parameters = [
    (  # two inequalities meeting at (4/5, 3/5)
        [({0: 1, 1: 2}, LE, 2), ({0: 3, 1: 1}, LE, 3)],
        {0: 1, 1: 1},
        Fraction(7, 5),
    ),
    (  # the same equality twice leaves a redundant row
        [({0: 1, 1: 1}, EQ, 1), ({0: 1, 1: 1}, EQ, 1)],
        {0: Fraction(1, 3)},
        Fraction(1, 3),
    ),
    (  # a lower bound with a negative objective
        [({0: 2}, GE, 1)],
        {0: -1},
        Fraction(-1, 2),
    ),
    (  # negative right hand side
        [({0: -1, 1: -1}, LE, -1), ({0: 1}, LE, 3)],
        {0: 1, 1: -1},
        Fraction(3),
    ),
    (  # a denominator far beyond anything a float rounds back to
        [({0: 999983}, LE, 1)],
        {0: 1},
        Fraction(1, 999983),
    ),
    (  # the cheaper of two large coefficients carries the optimum
        [({0: 1234567, 1: 7654321}, LE, 1000003)],
        {0: 1, 1: 1},
        Fraction(1000003, 1234567),
    ),
]


@pytest.mark.parametrize(["constraints", "objective", "expected"], test_simplex_solve_parameters)
@pytest.mark.parametrize("method", [LpMethod.EXACT, LpMethod.CERTIFIED])
def test_simplex_solve(constraints, objective, expected: Fraction, method):
    lp = _lp(constraints, objective)
    solution = nonsignaling.simplex_solve(lp, method)
    assert solution.optimum == expected
    assert solution.method == method
    assert nonsignaling.verify_certificate(lp, solution)


def test_simplex_solve_vertex():
    lp = _lp([({0: 1, 1: 2}, LE, 2), ({0: 3, 1: 1}, LE, 3)], {0: 1, 1: 1})
    solution = nonsignaling.simplex_solve(lp, LpMethod.EXACT)
    assert solution.primal == (Fraction(4, 5), Fraction(3, 5))
    assert solution.dual == (Fraction(2, 5), Fraction(1, 5))


def test_simplex_solve_infeasible():
    lp = _lp([({0: 1}, LE, -1)], {0: 1}, variables=1)
    with pytest.raises(LpInfeasibleError) as info:
        nonsignaling.simplex_solve(lp, LpMethod.EXACT)
    farkas = [Fraction(value) for value in info.value.certificate]
    assert farkas[0] * 1 <= 0  # y·A
    assert farkas[0] * -1 > 0  # y·b


def test_simplex_solve_unbounded():
    lp = _lp([({0: 1, 1: -1}, LE, 1)], {0: 1})
    with pytest.raises(LpUnboundedError) as info:
        nonsignaling.simplex_solve(lp, LpMethod.EXACT)
    assert info.value.certificate == {"v0": "1/1", "v1": "1/1"}


def test_simplex_solve_unknown_method():
    with pytest.raises(UsageError):
        nonsignaling.simplex_solve(_lp([({0: 1}, LE, 1)], {0: 1}, variables=1), "dual")


def test_verify_certificate_rejects_weak_dual():
    lp = _lp([({0: 1, 1: 2}, LE, 2), ({0: 3, 1: 1}, LE, 3)], {0: 1, 1: 1})
    solution = nonsignaling.simplex_solve(lp, LpMethod.EXACT)
    weak = LpSolution(solution.optimum, solution.primal, (Fraction(0), Fraction(0)), solution.method)
    assert not nonsignaling.verify_certificate(lp, weak)


############################ NON-SIGNALING VALUE ############################


def test_build_ns_lp_shape():
    lp, questions, answers = nonsignaling.build_ns_lp(zoo.anti_correlation())
    assert len(questions) == 8 and len(answers) == 8
    assert lp.shape == (8 + 3 * 16, 64)
    assert sum(lp.objective.values()) == Fraction(1, 3) * 12  # four winning answers at each of three points


def test_build_ns_lp_budget():
    with pytest.raises(BudgetExceededError):
        nonsignaling.build_ns_lp(zoo.anti_correlation(), budget=BudgetConfigData(max_lp_variables=10))


test_ns_value_parameters = [
    (zoo.anti_correlation, LpMethod.EXACT, Fraction(2, 3)),
    (zoo.anti_correlation, LpMethod.CERTIFIED, Fraction(2, 3)),
    (zoo.ghz_game, LpMethod.AUTO, Fraction(1)),
]


@pytest.mark.parametrize(["constructor", "method", "expected"], test_ns_value_parameters)
def test_ns_value(benchmark, constructor, method, expected: Fraction):
    g = constructor()
    value, box = benchmark(nonsignaling.ns_value, g, SubsetMode.COMPLEMENTARY, method)
    assert value == expected
    assert nonsignaling.is_non_signaling(box)
    assert _box_value(g, box) == value


test_ns_value_bounds_classical_parameters = [
    zoo.anti_correlation,
    zoo.ghz_game,
    zoo.four_point_and_game,
    zoo.five_point_example,
]


@pytest.mark.parametrize("constructor", test_ns_value_bounds_classical_parameters)
def test_ns_value_bounds_classical(constructor):
    g = constructor()
    assert nonsignaling.ns_value(g)[0] >= game.game_value(g)[0]


def test_ns_value_subset_modes_agree():
    g = zoo.four_point_and_game()
    complementary = nonsignaling.ns_value(g, SubsetMode.COMPLEMENTARY)[0]
    every = nonsignaling.ns_value(g, SubsetMode.ALL)[0]
    assert complementary == every


def test_ns_value_single_player_is_classical():
    g = game.create_game(
        [["a", "b"]],
        [BINARY],
        {("a",): Fraction(1, 2), ("b",): Fraction(1, 2)},
        {(("a",), ("0",)): Fraction(1), (("b",), ("1",)): Fraction(1, 2)},
    )
    assert nonsignaling.player_subsets(1) == []
    assert nonsignaling.ns_value(g)[0] == game.game_value(g)[0] == Fraction(3, 4)


def test_ns_value_of_repetition_does_not_decay():
    g = zoo.anti_correlation()
    repeated, box = nonsignaling.ns_value(game.tensor_power(g, 2))
    assert repeated == nonsignaling.ns_value(g)[0] == Fraction(2, 3)
    assert nonsignaling.is_non_signaling(box, SubsetMode.COMPLEMENTARY)


def test_ns_value_of_repetition_certified(benchmark):
    repeated = game.tensor_power(zoo.anti_correlation(), 2)
    value, box = benchmark.pedantic(
        nonsignaling.ns_value, args=(repeated, SubsetMode.COMPLEMENTARY, LpMethod.CERTIFIED), rounds=1, iterations=1
    )
    assert value == Fraction(2, 3)
    assert _box_value(repeated, box) == value
    assert nonsignaling.is_non_signaling(box, SubsetMode.COMPLEMENTARY)


test_player_subsets_parameters = [
    (3, SubsetMode.COMPLEMENTARY, [(0, 1), (0, 2), (1, 2)]),
    (3, SubsetMode.ALL, [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]),
    (2, SubsetMode.COMPLEMENTARY, [(0,), (1,)]),
]


@pytest.mark.parametrize(["k", "mode", "expected"], test_player_subsets_parameters)
def test_player_subsets(k: int, mode, expected):
    assert nonsignaling.player_subsets(k, mode) == expected


def test_is_non_signaling_detects_signaling():
    questions = (BINARY, BINARY)
    answers = (BINARY, BINARY)
    # player 1 answers player 2's question
    table = {(x, y): {(y, "0"): Fraction(1)} for x in BINARY for y in BINARY}
    assert not nonsignaling.is_non_signaling(NsStrategy(questions, answers, table))

    shared = {(x, y): {("0", "0"): Fraction(1, 2), ("1", "1"): Fraction(1, 2)} for x in BINARY for y in BINARY}
    assert nonsignaling.is_non_signaling(NsStrategy(questions, answers, shared))

    short = {(x, y): {("0", "0"): Fraction(1, 2)} for x in BINARY for y in BINARY}
    assert not nonsignaling.is_non_signaling(NsStrategy(questions, answers, short))
