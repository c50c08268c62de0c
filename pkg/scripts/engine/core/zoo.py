from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from scripts.engine.core.game import (
    create_game,
    flip_questions,
    game_value,
    normalize_determined,
    ProductStrategy,
)
from scripts.engine.core.structure import connection_graph, playerwise_graphs
from scripts.engine.core.utility import create_rng, join_symbols, product_symbols, split_symbol
from scripts.engine.internal.constant import BINARY
from scripts.engine.internal.error import AlphabetMismatchError, InvalidGameError, UnsupportedGameError

if TYPE_CHECKING:
    from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

    from scripts.engine.core.game import Game

    Predicate = Union[Callable[[Tuple[int, ...], Tuple[int, ...]], Any], Mapping[Tuple[Tuple[int, ...], Tuple[int, ...]], Any]]

__all__ = [
    "CnfFormula",
    "CnfExperimentRow",
    "anti_correlation",
    "ghz_game",
    "ghz_support_game",
    "four_point_and_game",
    "five_point_example",
    "hw1_canonical",
    "translate_hw1_strategy",
    "restricted_two_player",
    "fixed_answer_two_player",
    "flip_presentation",
    "random_3cnf_game",
    "cnf_connectivity_experiment",
    "ZOO",
]

ANTI_CORRELATION_SUPPORT = ((0, 1, 1), (1, 0, 1), (1, 1, 0))
GHZ_POINTS = ((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0))
FOUR_POINT_AND_POINTS = ((0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 1))
FIVE_POINT_POINTS = ((0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1))
HW1_POINTS = ((0, 0, 1), (0, 1, 0), (1, 0, 0))


############################ BINARY GAMES ############################


def _binary_game(points: Sequence[Tuple[int, ...]], predicate: Predicate) -> Game:
    """
    Uniform game on binary points with binary answers. The predicate is either a callable on integer tuples or a
    table keyed by (point, answer) integer tuples; missing table entries lose.
    """
    k = len(points[0])
    share = Fraction(1, len(points))
    distribution = {}
    win = {}
    for point in points:
        x = tuple(str(bit) for bit in point)
        distribution[x] = share
        for answer in itertools.product((0, 1), repeat=k):
            if callable(predicate):
                outcome = predicate(point, answer)
            else:
                outcome = predicate.get((tuple(point), answer), 0)
            if outcome not in (0, 1, True, False) and not isinstance(outcome, Fraction):
                raise AlphabetMismatchError(f"predicate value {outcome!r} at {point}, {answer} is not a weight", "v")
            if outcome:
                win[(x, tuple(str(bit) for bit in answer))] = Fraction(outcome)
    return create_game([BINARY] * k, [BINARY] * k, distribution, win)


def anti_correlation() -> Game:
    """
    Two random players get 1 and must answer differently; the player given 0 does not matter.
    """
    return _binary_game(ANTI_CORRELATION_SUPPORT, lambda x, a: sum(q * b for q, b in zip(x, a)) == 1)


def ghz_game() -> Game:
    return ghz_support_game(lambda x, a: (a[0] ^ a[1] ^ a[2]) == (x[0] | x[1] | x[2]))


def ghz_support_game(v: Predicate) -> Game:
    """
    Uniform on the even parity points with a caller supplied predicate.
    """
    return _binary_game(GHZ_POINTS, v)


def _chsh_on_and(x: Tuple[int, ...], a: Tuple[int, ...]) -> bool:
    # equal answers from players 1 and 2 everywhere except on (1,1,1), where they must differ
    return (a[0] != a[1]) if x == (1, 1, 1) else (a[0] == a[1])


def four_point_and_game(v: Optional[Predicate] = None) -> Game:
    """
    Uniform on z = x AND y. Without a predicate the players win when their answers agree, except on (1,1,1) where
    they must disagree, which has value 3/4.
    """
    return _binary_game(FOUR_POINT_AND_POINTS, v if v is not None else _chsh_on_and)


def five_point_example() -> Game:
    """
    Playerwise connected but not connected: win iff (a+b+c = 1) exactly when x+y+z != 3.
    """
    return _binary_game(FIVE_POINT_POINTS, lambda x, a: (sum(a) == 1) == (sum(x) != 3))


def flip_presentation(g: Game) -> Game:
    """
    Flip every player's question bit, e.g. the weight-2 anti-correlation support to weight 1.
    """
    return flip_questions(g, [True] * g.players)


############################ HW1 FAMILY ############################


def _bitstrings(k: int) -> List[str]:
    return ["".join(bits) for bits in itertools.product(BINARY, repeat=k)]


def hw1_canonical(k: int) -> Game:
    """
    The canonical HW1 game G_k. Players 1 and 2 answer k-bit strings, player 3 an index below k.

    On (0,0,1) the strings must share no 1; on (0,1,0) player 1's string has a 1 at player 3's index; on (1,0,0)
    player 2's string has a 1 there.
    """
    if k < 1:
        raise InvalidGameError(f"k must be positive, got {k}", "k")
    strings = _bitstrings(k)
    indices = [str(c) for c in range(k)]
    share = Fraction(1, 3)
    distribution = {("0", "0", "1"): share, ("0", "1", "0"): share, ("1", "0", "0"): share}
    win = {}
    for a, b, c in itertools.product(strings, strings, indices):
        answer = (a, b, c)
        if all(not (p == "1" and q == "1") for p, q in zip(a, b)):
            win[(("0", "0", "1"), answer)] = Fraction(1)
        if a[int(c)] == "1":
            win[(("0", "1", "0"), answer)] = Fraction(1)
        if b[int(c)] == "1":
            win[(("1", "0", "0"), answer)] = Fraction(1)
    return create_game([BINARY] * 3, [strings, strings, indices], distribution, win)


def translate_hw1_strategy(
    g: Game, s: ProductStrategy, n: int, k: Optional[int] = None, check_value: bool = True
) -> ProductStrategy:
    """
    Map a strategy for g^n, g a game on the support {(1,0,0),(0,1,0),(0,0,1)}, to one for G_k^n that wins wherever
    s wins. Player 1 answers, per coordinate, the bits V((0,1,0), (a, *, c)) over player 3's answers c; player 2 the
    bits V((1,0,0), (*, b, c)); player 3 the index of its answer. Needs val(g) < 1.
    """
    support = {tuple(int(bit) for bit in x) for x in g.distribution}
    if support != set(HW1_POINTS) or any(set(alphabet) != set(BINARY) for alphabet in g.questions):
        raise UnsupportedGameError("needs binary questions on the support {(1,0,0),(0,1,0),(0,0,1)}", "support")
    k = k if k is not None else max(len(alphabet) for alphabet in g.answers)
    for j, alphabet in enumerate(g.answers):
        if len(alphabet) > k:
            raise AlphabetMismatchError(f"{len(alphabet)} answers do not fit in [{k}]", f"answers[{j}]")
    if check_value and game_value(g)[0] == 1:
        raise UnsupportedGameError("the translation needs a game of value below 1", "win")

    normalised = normalize_determined(g)
    third = normalised.answers[2]
    any_b = normalised.answers[1][0]
    any_a = normalised.answers[0][0]

    def _player_one(a: str) -> str:
        bits = [normalised.win_weight(("0", "1", "0"), (a, any_b, c)) > 0 for c in third]
        return "".join("1" if bit else "0" for bit in bits).ljust(k, "0")

    def _player_two(b: str) -> str:
        bits = [normalised.win_weight(("1", "0", "0"), (any_a, b, c)) > 0 for c in third]
        return "".join("1" if bit else "0" for bit in bits).ljust(k, "0")

    translators = (_player_one, _player_two, lambda c: str(third.index(c)))
    tables = []
    for j in range(3):
        table = {}
        for question in product_symbols(BINARY, n):
            coordinates = split_symbol(s.tables[j][question], n)
            table[question] = join_symbols(translators[j](answer) for answer in coordinates)
        tables.append(table)
    return ProductStrategy(tuple(tables))


############################ RESTRICTED GAMES ############################


_TWO_PLAYER_POINTS = (("0", "0"), ("0", "1"), ("1", "0"))


def restricted_two_player(g: Game, c0: str, a_set: Iterable[str], b_set: Iterable[str]) -> Game:
    """
    Two-player game on uniform {(0,0),(0,1),(1,0)} from a four-point AND game: win iff V((x,y,0),(a,b,c0)), with a
    in a_set whenever x = 1 and b in b_set whenever y = 1.
    """
    support = {tuple(int(bit) for bit in x) for x in g.distribution}
    if g.players != 3 or support != set(FOUR_POINT_AND_POINTS):
        raise UnsupportedGameError("needs a game on the four-point AND support", "support")
    if c0 not in g.answers[2]:
        raise AlphabetMismatchError(f"'{c0}' is not an answer of player 3", "c0")
    a_set = set(a_set)
    b_set = set(b_set)

    share = Fraction(1, 3)
    distribution = {x: share for x in _TWO_PLAYER_POINTS}
    win = {}
    for x, y in _TWO_PLAYER_POINTS:
        for a, b in itertools.product(g.answers[0], g.answers[1]):
            weight = g.win_weight((x, y, "0"), (a, b, c0))
            if x == "1" and a not in a_set:
                weight = Fraction(0)
            if y == "1" and b not in b_set:
                weight = Fraction(0)
            if weight:
                win[((x, y), (a, b))] = weight
    return create_game([BINARY, BINARY], [g.answers[0], g.answers[1]], distribution, win)


def fixed_answer_two_player(g: Game, player: int, answer: str) -> Game:
    """
    From a game on {(1,0,0),(0,1,0),(0,0,1)}, the two-player game left when `player` always answers `answer`. The
    remaining players see their own bits (p, q), uniform on {(0,0),(0,1),(1,0)}; the fixed player's bit is 1 - p - q.
    """
    support = {tuple(int(bit) for bit in x) for x in g.distribution}
    if g.players != 3 or support != set(HW1_POINTS):
        raise UnsupportedGameError("needs a game on the support {(1,0,0),(0,1,0),(0,0,1)}", "support")
    if answer not in g.answers[player]:
        raise AlphabetMismatchError(f"'{answer}' is not an answer of player {player}", "answer")
    others = [j for j in range(3) if j != player]

    share = Fraction(1, 3)
    distribution = {x: share for x in _TWO_PLAYER_POINTS}
    win = {}
    for p, q in _TWO_PLAYER_POINTS:
        full = ["", "", ""]
        full[others[0]], full[others[1]] = p, q
        full[player] = str(1 - int(p) - int(q))
        for first, second in itertools.product(g.answers[others[0]], g.answers[others[1]]):
            a = ["", "", ""]
            a[others[0]], a[others[1]], a[player] = first, second, answer
            weight = g.win_weight(tuple(full), tuple(a))
            if weight:
                win[((p, q), (first, second))] = weight
    return create_game([BINARY, BINARY], [g.answers[others[0]], g.answers[others[1]]], distribution, win)


############################ RANDOM 3-CNF ############################


@dataclass(frozen=True)
class CnfFormula:
    """
    m ordered literal triples over d variables. A literal (v, 1) is satisfied by v = 1, (v, 0) by v = 0.
    """

    variables: int
    clauses: Tuple[Tuple[Tuple[int, int], ...], ...]

    def to_record(self) -> Dict[str, Any]:
        return {"d": self.variables, "clauses": [[list(literal) for literal in clause] for clause in self.clauses]}

    def satisfied_fraction(self, assignment: Sequence[int]) -> Fraction:
        satisfied = sum(1 for clause in self.clauses if any(assignment[v] == sign for v, sign in clause))
        return Fraction(satisfied, len(self.clauses))


def random_3cnf_game(d: int, m: int, seed: int) -> Tuple[CnfFormula, Game]:
    """
    Sample m clauses uniformly with replacement from the 8d^3 ordered literal triples. In the game the referee picks
    a clause and hands each player one of its variables; the players win if their bits satisfy it. When several
    clauses share a variable triple the win weight is the satisfied share of them.
    """
    if d < 1 or m < 1:
        raise InvalidGameError(f"need d >= 1 and m >= 1, got d={d}, m={m}", "d" if d < 1 else "m")
    rng = create_rng(seed)
    variables = rng.integers(0, d, size=(m, 3))
    signs = rng.integers(0, 2, size=(m, 3))
    clauses = tuple(
        tuple((int(variables[r, j]), int(signs[r, j])) for j in range(3)) for r in range(m)
    )
    formula = CnfFormula(d, clauses)

    by_triple: Dict[Tuple[str, ...], List[Tuple[Tuple[int, int], ...]]] = {}
    for clause in clauses:
        by_triple.setdefault(tuple(str(v) for v, _ in clause), []).append(clause)

    distribution = {}
    win = {}
    for x, members in by_triple.items():
        distribution[x] = Fraction(len(members), m)
        for bits in itertools.product((0, 1), repeat=3):
            satisfied = sum(1 for clause in members if any(bits[j] == clause[j][1] for j in range(3)))
            if satisfied:
                win[(x, tuple(str(bit) for bit in bits))] = Fraction(satisfied, len(members))

    alphabet = [str(v) for v in range(d)]
    game = create_game([alphabet] * 3, [BINARY] * 3, distribution, win)
    logging.debug(f"random_3cnf_game: d={d}, m={m}, seed={seed}, {len(distribution)} distinct triples.")
    return formula, game


@dataclass(frozen=True)
class CnfExperimentRow:
    seed: int
    connected: bool
    playerwise_connected: bool
    value: Optional[Fraction]

    def to_record(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "connected": self.connected,
            "playerwise_connected": self.playerwise_connected,
            "value": None if self.value is None else f"{self.value.numerator}/{self.value.denominator}",
        }


def _cnf_row(d: int, m: int, seed: int, with_value: bool) -> CnfExperimentRow:
    _, game = random_3cnf_game(d, m, seed)
    # every variable has to reach every player for a player graph on [d] to be connected
    covered = all(len({x[j] for x in game.distribution}) == d for j in range(3))
    playerwise = covered and all(graph.is_connected for graph in playerwise_graphs(game))
    value = game_value(game)[0] if with_value else None
    return CnfExperimentRow(seed, connection_graph(game).is_connected, playerwise, value)


def cnf_connectivity_experiment(
    d: int, m: int, seeds: int, base_seed: int = 0, with_value: Optional[bool] = None, workers: int = 1
) -> List[CnfExperimentRow]:
    """
    One row per seed base_seed, base_seed + 1, ... Values are computed exhaustively when with_value, which defaults
    to d <= 6.
    """
    with_value = d <= 6 if with_value is None else with_value
    seed_list = [base_seed + i for i in range(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_cnf_row, [d] * seeds, [m] * seeds, seed_list, [with_value] * seeds))
    else:
        rows = [_cnf_row(d, m, seed, with_value) for seed in seed_list]

    fraction = sum(row.playerwise_connected for row in rows) / max(len(rows), 1)
    logging.info(f"cnf_connectivity_experiment: d={d}, m={m}, playerwise connected in {fraction:.2f} of seeds.")
    return rows


############################ REGISTRY ############################

ZOO: Dict[str, Callable[..., Game]] = {
    "anti-correlation": anti_correlation,
    "ghz": ghz_game,
    "four-point-and": four_point_and_game,
    "five-point": five_point_example,
    "hw1-canonical": hw1_canonical,
}
