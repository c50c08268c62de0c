from __future__ import annotations

import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

from scripts.engine.core.utility import (
    format_rational,
    join_symbols,
    parse_rational,
    product_symbols,
    split_symbol,
)
from scripts.engine.internal import library
from scripts.engine.internal.constant import SYMBOL_SEPARATOR
from scripts.engine.internal.error import (
    AlphabetMismatchError,
    BudgetExceededError,
    IndexOutOfRangeError,
    InvalidGameError,
    ZeroProbabilityError,
)
from scripts.engine.internal.extend_json import dumps_canonical

if TYPE_CHECKING:
    from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

    from scripts.engine.internal.definition import BudgetConfigData

    Question = Tuple[str, ...]
    Answer = Tuple[str, ...]

__all__ = [
    "Game",
    "ProductStrategy",
    "ProductEvent",
    "create_game",
    "validate_game",
    "load_game",
    "game_to_record",
    "dump_game",
    "strategy_to_record",
    "strategy_from_record",
    "strategy_encoding",
    "check_strategy",
    "strategy_value",
    "game_value",
    "tensor_power",
    "repeat_strategy",
    "coordinate_value",
    "coordinate_game",
    "coordinate_game_value",
    "create_product_event",
    "event_probability",
    "condition_game",
    "win_probability_on_event",
    "uniformize",
    "uniform_decomposition",
    "normalize_determined",
    "flip_questions",
    "permute_players",
    "question_marginal",
]


################################ TYPES ####################################


@dataclass(frozen=True, eq=True)
class Game:
    """
    A k-player game. `distribution` holds the support of Q only. `win` maps (question, answer) to the probability
    the referee accepts, a rational in (0, 1]; ordinary games only hold 1s. Alphabets are sorted.

    Build through create_game or validate_game so the invariants hold.
    """

    questions: Tuple[Tuple[str, ...], ...]
    answers: Tuple[Tuple[str, ...], ...]
    distribution: Mapping[Question, Fraction]
    win: Mapping[Tuple[Question, Answer], Fraction]
    _win_table: Dict[Question, Dict[Answer, Fraction]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    __hash__ = None  # type: ignore

    def __post_init__(self):
        table: Dict[Question, Dict[Answer, Fraction]] = {x: {} for x in self.distribution}
        for (x, a), weight in self.win.items():
            table.setdefault(x, {})[a] = weight
        object.__setattr__(self, "_win_table", table)

    @property
    def players(self) -> int:
        return len(self.questions)

    @property
    def support(self) -> Tuple[Question, ...]:
        return tuple(sorted(self.distribution))

    @property
    def is_deterministic(self) -> bool:
        """
        True if every win weight is 1.
        """
        return all(weight == 1 for weight in self.win.values())

    def wins_at(self, x: Question) -> Dict[Answer, Fraction]:
        """
        The accepted answers at a question tuple with their weights.
        """
        return self._win_table.get(x, {})

    def win_weight(self, x: Question, a: Answer) -> Fraction:
        return self._win_table.get(x, {}).get(a, Fraction(0))

    def answer_tuples(self) -> Iterator[Answer]:
        return itertools.product(*self.answers)


@dataclass(frozen=True)
class ProductStrategy:
    """
    One deterministic answer table per player.
    """

    tables: Tuple[Mapping[str, str], ...]

    __hash__ = None  # type: ignore

    def answer(self, x: Question) -> Answer:
        return tuple(self.tables[j][x[j]] for j in range(len(x)))


@dataclass(frozen=True)
class ProductEvent:
    """
    E = E^1 x ... x E^k over the questions of an n-fold repeated game. Build through create_product_event.
    """

    sets: Tuple[FrozenSet[str], ...]
    n: int

    def contains(self, x: Question) -> bool:
        return all(x[j] in self.sets[j] for j in range(len(x)))


################################ CONSTRUCTION ####################################


def create_game(
    questions: Sequence[Sequence[str]],
    answers: Sequence[Sequence[str]],
    distribution: Mapping[Sequence[str], Fraction],
    win: Mapping[Tuple[Sequence[str], Sequence[str]], Fraction],
    budget: Optional[BudgetConfigData] = None,
) -> Game:
    """
    Build a Game, checking every invariant. Zero weight support points are stripped and win entries off the support
    are dropped, since V only ever matters on the support.
    """
    budget = budget or library.BUDGET_CONFIG

    if len(questions) == 0:
        raise InvalidGameError("a game needs at least one player", "players")
    if len(questions) != len(answers):
        raise InvalidGameError(
            f"{len(questions)} question alphabets but {len(answers)} answer alphabets", "answers"
        )
    k = len(questions)
    sorted_questions = tuple(_check_alphabet(alphabet, f"questions[{j}]") for j, alphabet in enumerate(questions))
    sorted_answers = tuple(_check_alphabet(alphabet, f"answers[{j}]") for j, alphabet in enumerate(answers))
    question_sets = [set(alphabet) for alphabet in sorted_questions]
    answer_sets = [set(alphabet) for alphabet in sorted_answers]

    support: Dict[Question, Fraction] = {}
    total = Fraction(0)
    for index, (raw_x, raw_weight) in enumerate(distribution.items()):
        path = f"support[{index}]"
        x = _check_tuple(raw_x, question_sets, f"{path}.q", "question")
        weight = Fraction(raw_weight)
        if weight < 0:
            raise InvalidGameError(f"negative weight {format_rational(weight)}", f"{path}.w")
        total += weight
        if weight > 0:
            support[x] = support.get(x, Fraction(0)) + weight
    if total != 1:
        raise InvalidGameError(f"weights sum to {format_rational(total)}", "support")
    if not support:
        raise InvalidGameError("support is empty", "support")

    checked_win: Dict[Tuple[Question, Answer], Fraction] = {}
    for index, ((raw_x, raw_a), raw_weight) in enumerate(win.items()):
        path = f"win[{index}]"
        x = _check_tuple(raw_x, question_sets, f"{path}.q", "question")
        a = _check_tuple(raw_a, answer_sets, f"{path}.a", "answer")
        weight = Fraction(raw_weight)
        if weight < 0 or weight > 1:
            raise InvalidGameError(f"win weight {format_rational(weight)} outside [0, 1]", f"{path}.w")
        if weight > 0 and x in support:
            checked_win[(x, a)] = weight
        if len(checked_win) > budget.max_win_entries:
            raise BudgetExceededError(f"more than {budget.max_win_entries} win entries", "win")

    ordered_support = {x: support[x] for x in sorted(support)}
    ordered_win = {key: checked_win[key] for key in sorted(checked_win)}
    logging.debug(f"create_game: {k} players, support {len(ordered_support)}, {len(ordered_win)} win entries.")
    return Game(sorted_questions, sorted_answers, ordered_support, ordered_win)


def _check_alphabet(alphabet: Sequence[str], path: str) -> Tuple[str, ...]:
    if isinstance(alphabet, str) or len(alphabet) == 0:
        raise InvalidGameError("alphabet must be a nonempty array of strings", path)
    for index, symbol in enumerate(alphabet):
        if not isinstance(symbol, str):
            raise InvalidGameError(f"symbol {symbol!r} is not a string", f"{path}[{index}]")
    if len(set(alphabet)) != len(alphabet):
        raise InvalidGameError("alphabet repeats a symbol", path)
    return tuple(sorted(alphabet))


def _check_tuple(raw: Sequence[str], alphabets: List[set], path: str, what: str) -> Tuple[str, ...]:
    if isinstance(raw, str) or len(raw) != len(alphabets):
        raise InvalidGameError(f"{what} tuple must have one symbol per player", path)
    for j, symbol in enumerate(raw):
        if symbol not in alphabets[j]:
            raise InvalidGameError(f"symbol '{symbol}' outside the {what} alphabet of player {j}", f"{path}[{j}]")
    return tuple(raw)


################################ SERIALISATION ####################################


def validate_game(description: Mapping[str, Any]) -> Game:
    """
    Turn a parsed game record into a Game. Errors name the offending field path.
    """
    if not isinstance(description, dict):
        raise InvalidGameError("a game record must be a json object", "")
    for key in ("players", "questions", "answers", "support", "win"):
        if key not in description:
            raise InvalidGameError(f"missing field '{key}'", key)

    players = description["players"]
    if not isinstance(players, int) or isinstance(players, bool) or players < 1:
        raise InvalidGameError("players must be a positive integer", "players")
    for key in ("questions", "answers"):
        if not isinstance(description[key], list) or len(description[key]) != players:
            raise InvalidGameError(f"{key} must hold one alphabet per player", key)
        for j, alphabet in enumerate(description[key]):
            if not isinstance(alphabet, list):
                raise InvalidGameError("alphabet must be an array of strings", f"{key}[{j}]")
            for index, symbol in enumerate(alphabet):
                if isinstance(symbol, str) and SYMBOL_SEPARATOR in symbol:
                    raise InvalidGameError(
                        f"symbol '{symbol}' contains the reserved '{SYMBOL_SEPARATOR}'", f"{key}[{j}][{index}]"
                    )

    distribution: Dict[Question, Fraction] = {}
    for index, entry in enumerate(_as_list(description["support"], "support")):
        path = f"support[{index}]"
        x = _as_symbols(entry, "q", path)
        if x in distribution:
            raise InvalidGameError("question tuple listed twice", f"{path}.q")
        if not isinstance(entry, dict) or "w" not in entry:
            raise InvalidGameError("missing weight", f"{path}.w")
        distribution[x] = parse_rational(entry["w"], f"{path}.w")

    win: Dict[Tuple[Question, Answer], Fraction] = {}
    for index, entry in enumerate(_as_list(description["win"], "win")):
        path = f"win[{index}]"
        key = (_as_symbols(entry, "q", path), _as_symbols(entry, "a", path))
        if key in win:
            raise InvalidGameError("win entry listed twice", path)
        win[key] = parse_rational(entry.get("w", 1), f"{path}.w")

    return create_game(description["questions"], description["answers"], distribution, win)


def _as_list(value: Any, path: str) -> List:
    if not isinstance(value, list):
        raise InvalidGameError("expected an array", path)
    return value


def _as_symbols(entry: Any, key: str, path: str) -> Tuple[str, ...]:
    if not isinstance(entry, dict) or not isinstance(entry.get(key), list):
        raise InvalidGameError(f"expected an array of strings", f"{path}.{key}")
    return tuple(entry[key])


def load_game(text: str) -> Game:
    try:
        description = json.loads(text)
    except json.JSONDecodeError as error:
        raise InvalidGameError(f"not valid json: {error.msg}", "")
    return validate_game(description)


def game_to_record(g: Game) -> Dict[str, Any]:
    """
    The canonical record of a game: sorted alphabets, support and win entries sorted, weight 1 win entries without
    a "w" field.
    """
    win_entries = []
    for (x, a), weight in g.win.items():
        entry: Dict[str, Any] = {"q": list(x), "a": list(a)}
        if weight != 1:
            entry["w"] = format_rational(weight)
        win_entries.append(entry)

    return {
        "players": g.players,
        "questions": [list(alphabet) for alphabet in g.questions],
        "answers": [list(alphabet) for alphabet in g.answers],
        "support": [{"q": list(x), "w": format_rational(weight)} for x, weight in g.distribution.items()],
        "win": win_entries,
    }


def dump_game(g: Game) -> str:
    return dumps_canonical(game_to_record(g))


def strategy_to_record(s: ProductStrategy) -> List[Dict[str, str]]:
    return [{question: table[question] for question in sorted(table)} for table in s.tables]


def strategy_from_record(record: Sequence[Mapping[str, str]]) -> ProductStrategy:
    if not isinstance(record, list):
        raise AlphabetMismatchError("a strategy is an array of per player tables", "strategy")
    return ProductStrategy(tuple(dict(table) for table in record))


def strategy_encoding(g: Game, s: ProductStrategy) -> Tuple[int, ...]:
    """
    The answer index of every table entry, player by player, question by question in alphabet order. Optimal
    witnesses are the smallest under this encoding.
    """
    check_strategy(g, s)
    encoding = []
    for j in range(g.players):
        index = {symbol: i for i, symbol in enumerate(g.answers[j])}
        encoding.extend(index[s.tables[j][question]] for question in g.questions[j])
    return tuple(encoding)


################################ STRATEGIES ####################################


def check_strategy(g: Game, s: ProductStrategy):
    """
    Raise AlphabetMismatchError unless every table is total on its question alphabet and answers inside the answer
    alphabet.
    """
    _check_tables(g.questions, g.answers, s)


def _check_tables(questions: Sequence[Sequence[str]], answers: Sequence[Sequence[str]], s: ProductStrategy):
    if len(s.tables) != len(questions):
        raise AlphabetMismatchError(f"strategy has {len(s.tables)} tables for {len(questions)} players", "strategy")
    for j, table in enumerate(s.tables):
        allowed = set(answers[j])
        for question in questions[j]:
            if question not in table:
                raise AlphabetMismatchError(f"no answer for question '{question}'", f"strategy[{j}]")
            if table[question] not in allowed:
                raise AlphabetMismatchError(
                    f"answer '{table[question]}' outside the answer alphabet", f"strategy[{j}].{question}"
                )


def strategy_value(g: Game, s: ProductStrategy) -> Fraction:
    """
    Exact winning probability of a product strategy.
    """
    check_strategy(g, s)
    return sum((weight * g.win_weight(x, s.answer(x)) for x, weight in g.distribution.items()), Fraction(0))


def repeat_strategy(g: Game, s: ProductStrategy, n: int) -> ProductStrategy:
    """
    Play s independently in each of n coordinates.
    """
    check_strategy(g, s)
    tables = []
    for j in range(g.players):
        table = {}
        for parts in itertools.product(g.questions[j], repeat=n):
            table[join_symbols(parts)] = join_symbols(s.tables[j][part] for part in parts)
        tables.append(table)
    return ProductStrategy(tuple(tables))


################################ VALUE ####################################


def game_value(
    g: Game, budget: Optional[BudgetConfigData] = None, workers: int = 1, allow_over_budget: bool = False
) -> Tuple[Fraction, ProductStrategy]:
    """
    Exact value by branch and bound over the answer tables of every player but the last, who best responds. The
    witness is the smallest optimal strategy under strategy_encoding, whatever the worker count.
    """
    budget = budget or library.BUDGET_CONFIG
    count = 1
    for j in range(g.players):
        count *= len(g.answers[j]) ** len(g.questions[j])
    if count > budget.max_strategy_count and not allow_over_budget:
        raise BudgetExceededError(
            f"{count} strategies exceed the exhaustive budget of {budget.max_strategy_count}", "game"
        )

    search = _BranchAndBound(g)
    if workers > 1 and search.prefix_variables:
        first_values = list(range(search.domain(0)))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_chunk, [search] * len(first_values), first_values))
        best_total, encoding, _ = max(results, key=lambda result: (result[0], [-i for i in result[1]]))
        nodes = sum(result[2] for result in results)
    else:
        best_total, encoding = search.run()
        nodes = search.nodes

    value = Fraction(best_total, search.scale)
    strategy = search.decode(encoding)
    logging.info(f"game_value: value {format_rational(value)} after {nodes} nodes.")
    return value, strategy


def _run_chunk(search: _BranchAndBound, first_value: int) -> Tuple[int, Tuple[int, ...], int]:
    total, encoding = search.run(first_value)
    return total, encoding, search.nodes


class _BranchAndBound:
    """
    Index based search state. Masses are integers scaled by the lcm of every Q(x)*V(x, a) denominator so the inner
    loop never touches Fractions.
    """

    def __init__(self, g: Game):
        self.g = g
        self.k = g.players
        self.last = self.k - 1
        question_index = [{symbol: i for i, symbol in enumerate(alphabet)} for alphabet in g.questions]
        answer_index = [{symbol: i for i, symbol in enumerate(alphabet)} for alphabet in g.answers]

        denominators = [(weight * w).denominator for x, weight in g.distribution.items() for w in g.wins_at(x).values()]
        self.scale = 1
        for denominator in denominators:
            self.scale = self.scale * denominator // math.gcd(self.scale, denominator)

        last_size = len(g.answers[self.last])
        self.points: List[Tuple[int, ...]] = []
        # per point: prefix answer indices -> masses per last player answer
        self.tables: List[Dict[Tuple[int, ...], List[int]]] = []
        for x, weight in g.distribution.items():
            self.points.append(tuple(question_index[j][x[j]] for j in range(self.k)))
            table: Dict[Tuple[int, ...], List[int]] = {}
            for a, w in g.wins_at(x).items():
                indices = tuple(answer_index[j][a[j]] for j in range(self.k))
                row = table.setdefault(indices[: self.last], [0] * last_size)
                row[indices[self.last]] = int(weight * w * self.scale)
            self.tables.append(table)
        self.row_best = [{prefix: max(row) for prefix, row in table.items()} for table in self.tables]

        self.prefix_variables = [(j, q) for j in range(self.last) for q in range(len(g.questions[j]))]
        self.points_by = [[[] for _ in g.questions[j]] for j in range(self.k)]
        for t, point in enumerate(self.points):
            for j in range(self.k):
                self.points_by[j][point[j]].append(t)
        self.nodes = 0

    def domain(self, variable: int) -> int:
        return len(self.g.answers[self.prefix_variables[variable][0]])

    def run(self, first_value: Optional[int] = None) -> Tuple[int, Tuple[int, ...]]:
        self.assignment = [[-1] * len(self.g.questions[j]) for j in range(self.k)]
        self.potential = [max(best.values(), default=0) for best in self.row_best]
        self.bound = sum(self.potential)
        self.best_total = -1
        self.best_encoding: Tuple[int, ...] = ()
        if not self.prefix_variables:
            self._leaf()
        elif first_value is None:
            self._descend(0)
        else:
            self._assign(0, first_value)
            self._descend(1)
        return self.best_total, self.best_encoding

    def _assign(self, variable: int, value: int) -> List[Tuple[int, int]]:
        j, q = self.prefix_variables[variable]
        self.assignment[j][q] = value
        changed = []
        for t in self.points_by[j][q]:
            new = self._point_potential(t)
            if new != self.potential[t]:
                changed.append((t, self.potential[t]))
                self.bound += new - self.potential[t]
                self.potential[t] = new
        return changed

    def _point_potential(self, t: int) -> int:
        point = self.points[t]
        best = 0
        for prefix, mass in self.row_best[t].items():
            if mass > best and all(
                self.assignment[j][point[j]] in (-1, prefix[j]) for j in range(self.last)
            ):
                best = mass
        return best

    def _descend(self, variable: int):
        if variable == len(self.prefix_variables):
            self._leaf()
            return
        j, q = self.prefix_variables[variable]
        for value in range(len(self.g.answers[j])):
            self.nodes += 1
            changed = self._assign(variable, value)
            if self.bound > self.best_total:
                self._descend(variable + 1)
            for t, old in changed:
                self.bound += old - self.potential[t]
                self.potential[t] = old
            self.assignment[j][q] = -1

    def _leaf(self):
        last_size = len(self.g.answers[self.last])
        total = 0
        responses = []
        for q, members in enumerate(self.points_by[self.last]):
            scores = [0] * last_size
            for t in members:
                point = self.points[t]
                row = self.tables[t].get(tuple(self.assignment[j][point[j]] for j in range(self.last)))
                if row:
                    for c in range(last_size):
                        scores[c] += row[c]
            best = max(scores)
            responses.append(scores.index(best))
            total += best
        if total > self.best_total:
            self.best_total = total
            self.best_encoding = tuple(
                value for j in range(self.last) for value in self.assignment[j]
            ) + tuple(responses)

    def decode(self, encoding: Sequence[int]) -> ProductStrategy:
        tables = []
        position = 0
        for j in range(self.k):
            table = {}
            for question in self.g.questions[j]:
                table[question] = self.g.answers[j][encoding[position]]
                position += 1
            tables.append(table)
        return ProductStrategy(tuple(tables))


################################ REPETITION ####################################


def _repeated_points(g: Game, n: int) -> Iterator[Tuple[Tuple[Question, ...], Fraction]]:
    """
    Every tuple of n support points with its probability under P = Q^n.
    """
    support = list(g.distribution.items())
    for combination in itertools.product(support, repeat=n):
        points = tuple(x for x, _ in combination)
        probability = Fraction(1)
        for _, weight in combination:
            probability *= weight
        yield points, probability


def _join_points(points: Sequence[Question], players: int) -> Question:
    return tuple(join_symbols(x[j] for x in points) for j in range(players))


def _repeated_alphabets(g: Game, n: int, budget: BudgetConfigData) -> Tuple[List[List[str]], List[List[str]]]:
    questions = []
    answers = []
    for j in range(g.players):
        for name, alphabet, target in (("questions", g.questions[j], questions), ("answers", g.answers[j], answers)):
            size = len(alphabet) ** n
            if size > budget.max_alphabet_size:
                raise BudgetExceededError(
                    f"{size} repeated {name[:-1]} symbols for player {j} exceed {budget.max_alphabet_size}",
                    f"{name}[{j}]",
                )
            target.append(product_symbols(alphabet, n))
    return questions, answers


def tensor_power(g: Game, n: int, budget: Optional[BudgetConfigData] = None) -> Game:
    """
    The n-fold parallel repetition of g.
    """
    budget = budget or library.BUDGET_CONFIG
    if n < 1:
        raise IndexOutOfRangeError(f"repetition count must be positive, got {n}", "n")
    questions, answers = _repeated_alphabets(g, n, budget)
    entries = sum(len(g.wins_at(x)) for x in g.distribution) ** n
    if entries > budget.max_win_entries:
        raise BudgetExceededError(f"{entries} repeated win entries exceed {budget.max_win_entries}", "win")

    k = g.players
    distribution: Dict[Question, Fraction] = {}
    win: Dict[Tuple[Question, Answer], Fraction] = {}
    for points, probability in _repeated_points(g, n):
        x = _join_points(points, k)
        distribution[x] = probability
        for combination in itertools.product(*(list(g.wins_at(point).items()) for point in points)):
            a = _join_points([answer for answer, _ in combination], k)
            weight = Fraction(1)
            for _, w in combination:
                weight *= w
            win[(x, a)] = weight

    logging.info(f"tensor_power: built {n}-fold game with support {len(distribution)}.")
    return create_game(questions, answers, distribution, win, budget)


def coordinate_value(g: Game, n: int, i: int, s: ProductStrategy, budget: Optional[BudgetConfigData] = None) -> Fraction:
    """
    Probability under P that s wins coordinate i (1 based) of g^n.
    """
    budget = budget or library.BUDGET_CONFIG
    if not 1 <= i <= n:
        raise IndexOutOfRangeError(f"coordinate {i} outside 1..{n}", "i")
    questions, answers = _repeated_alphabets(g, n, budget)
    _check_tables(questions, answers, s)

    k = g.players
    total = Fraction(0)
    for points, probability in _repeated_points(g, n):
        a = s.answer(_join_points(points, k))
        coordinate_answer = tuple(split_symbol(a[j], n)[i - 1] for j in range(k))
        total += probability * g.win_weight(points[i - 1], coordinate_answer)
    return total


def coordinate_game(g: Game, n: int, i: int, budget: Optional[BudgetConfigData] = None) -> Game:
    """
    The game on the questions and answers of g^n whose referee only checks coordinate i.
    """
    budget = budget or library.BUDGET_CONFIG
    if not 1 <= i <= n:
        raise IndexOutOfRangeError(f"coordinate {i} outside 1..{n}", "i")
    questions, answers = _repeated_alphabets(g, n, budget)
    k = g.players
    free_answers = list(itertools.product(*g.answers))

    distribution: Dict[Question, Fraction] = {}
    win: Dict[Tuple[Question, Answer], Fraction] = {}
    for points, probability in _repeated_points(g, n):
        x = _join_points(points, k)
        distribution[x] = probability
        for a_i, weight in g.wins_at(points[i - 1]).items():
            for others in itertools.product(free_answers, repeat=n - 1):
                coordinates = list(others[: i - 1]) + [a_i] + list(others[i - 1 :])
                win[(x, _join_points(coordinates, k))] = weight
                if len(win) > budget.max_win_entries:
                    raise BudgetExceededError(f"coordinate game exceeds {budget.max_win_entries} win entries", "win")
    return create_game(questions, answers, distribution, win, budget)


def coordinate_game_value(
    g: Game, n: int, i: int, budget: Optional[BudgetConfigData] = None
) -> Tuple[Fraction, ProductStrategy]:
    return game_value(coordinate_game(g, n, i, budget), budget)


################################ EVENTS ####################################


def create_product_event(
    g: Game, n: int, sets: Sequence[Optional[Iterable[str]]], budget: Optional[BudgetConfigData] = None
) -> ProductEvent:
    """
    Build E = E^1 x ... x E^k over the questions of g^n. A None entry means the player's whole alphabet. Raises
    ZeroProbabilityError when P(E) = 0.
    """
    budget = budget or library.BUDGET_CONFIG
    if len(sets) != g.players:
        raise AlphabetMismatchError(f"event has {len(sets)} sets for {g.players} players", "event")
    questions, _ = _repeated_alphabets(g, n, budget)
    frozen = []
    for j, chosen in enumerate(sets):
        alphabet = set(questions[j])
        members = frozenset(alphabet if chosen is None else chosen)
        outside = members - alphabet
        if outside:
            raise AlphabetMismatchError(f"event symbols {sorted(outside)} outside the alphabet", f"event[{j}]")
        frozen.append(members)

    event = ProductEvent(tuple(frozen), n)
    if event_probability(g, n, event) == 0:
        raise ZeroProbabilityError("the product event has probability zero", "event")
    return event


def event_probability(g: Game, n: int, e: ProductEvent) -> Fraction:
    k = g.players
    return sum(
        (probability for points, probability in _repeated_points(g, n) if e.contains(_join_points(points, k))),
        Fraction(0),
    )


def condition_game(g: Game, n: int, e: ProductEvent, budget: Optional[BudgetConfigData] = None) -> Game:
    """
    g^n with P replaced by P conditioned on E. Alphabets stay those of g^n so its strategies still apply. Questions
    outside E leave the support and their win entries go with them; V is unchanged on every question that remains.
    """
    repeated = tensor_power(g, n, budget)
    mass = sum((weight for x, weight in repeated.distribution.items() if e.contains(x)), Fraction(0))
    if mass == 0:
        raise ZeroProbabilityError("the product event has probability zero", "event")
    distribution = {x: (weight / mass if e.contains(x) else Fraction(0)) for x, weight in repeated.distribution.items()}
    return create_game(repeated.questions, repeated.answers, distribution, repeated.win, budget)


def win_probability_on_event(g: Game, n: int, s: ProductStrategy, e: ProductEvent) -> Fraction:
    """
    Pr[s wins every coordinate and E] under P, evaluated coordinate by coordinate without building g^n.
    """
    k = g.players
    total = Fraction(0)
    for points, probability in _repeated_points(g, n):
        x = _join_points(points, k)
        if not e.contains(x):
            continue
        a = s.answer(x)
        weight = probability
        for i, point in enumerate(points):
            weight *= g.win_weight(point, tuple(split_symbol(a[j], n)[i] for j in range(k)))
            if weight == 0:
                break
        total += weight
    return total


################################ TRANSFORMS ####################################


def uniformize(g: Game) -> Game:
    """
    Same game with Q replaced by the uniform distribution on its support.
    """
    share = Fraction(1, len(g.distribution))
    return create_game(g.questions, g.answers, {x: share for x in g.distribution}, g.win)


def uniform_decomposition(g: Game) -> Tuple[Fraction, Optional[Dict[Question, Fraction]]]:
    """
    Split Q = γU + (1 - γ)Q' with U uniform on the support and γ as large as possible. Q' is None when Q is uniform.
    """
    size = len(g.distribution)
    gamma = size * min(g.distribution.values())
    if gamma == 1:
        return gamma, None
    share = Fraction(1, size)
    rest = {x: (weight - gamma * share) / (1 - gamma) for x, weight in g.distribution.items()}
    return gamma, {x: weight for x, weight in rest.items() if weight != 0}


def _determining_pairs(g: Game) -> List[Tuple[int, str, Question]]:
    """
    (player, question, support point) for every question that pins down the whole support point.
    """
    pairs = []
    for j in range(g.players):
        for question in g.questions[j]:
            points = [x for x in g.distribution if x[j] == question]
            if len(points) == 1:
                pairs.append((j, question, points[0]))
    return pairs


def normalize_determined(g: Game, order: Optional[Sequence[Tuple[int, str]]] = None) -> Game:
    """
    Wherever player j's question alone determines the support point y, replace V(y, a) by the max over player j's
    answer, so the predicate stops depending on that answer. Repeats until nothing changes. `order` overrides the
    (player, question) processing order; the fixed point does not depend on it.
    """
    win = dict(g.win)
    pairs = _determining_pairs(g)
    if order is not None:
        position = {(j, question): index for index, (j, question) in enumerate(order)}
        pairs.sort(key=lambda pair: position.get((pair[0], pair[1]), len(position)))

    changed = True
    while changed:
        changed = False
        for j, _, y in pairs:
            best: Dict[Tuple[str, ...], Fraction] = {}
            for (x, a), weight in win.items():
                if x == y:
                    others = a[:j] + a[j + 1 :]
                    best[others] = max(best.get(others, Fraction(0)), weight)
            for others, weight in best.items():
                for answer in g.answers[j]:
                    key = (y, others[:j] + (answer,) + others[j:])
                    if win.get(key, Fraction(0)) != weight:
                        win[key] = weight
                        changed = True

    if len(win) != len(g.win):
        logging.debug(f"normalize_determined: win entries {len(g.win)} -> {len(win)}.")
    return create_game(g.questions, g.answers, g.distribution, win)


def flip_questions(g: Game, flips: Sequence[bool]) -> Game:
    """
    Swap the two question symbols of every flagged player. Flagged players must have binary question alphabets.
    """
    mapping = []
    for j, flip in enumerate(flips):
        alphabet = g.questions[j]
        if flip and len(alphabet) != 2:
            raise AlphabetMismatchError("only binary question alphabets can be flipped", f"questions[{j}]")
        mapping.append({alphabet[0]: alphabet[1], alphabet[1]: alphabet[0]} if flip else {s: s for s in alphabet})

    def _image(x: Question) -> Question:
        return tuple(mapping[j][x[j]] for j in range(len(x)))

    distribution = {_image(x): weight for x, weight in g.distribution.items()}
    win = {(_image(x), a): weight for (x, a), weight in g.win.items()}
    return create_game(g.questions, g.answers, distribution, win)


def permute_players(g: Game, permutation: Sequence[int]) -> Game:
    """
    New player j is old player permutation[j].
    """
    if sorted(permutation) != list(range(g.players)):
        raise InvalidGameError(f"{list(permutation)} is not a permutation of the players", "permutation")

    def _image(values: Tuple[str, ...]) -> Tuple[str, ...]:
        return tuple(values[permutation[j]] for j in range(len(values)))

    questions = [g.questions[p] for p in permutation]
    answers = [g.answers[p] for p in permutation]
    distribution = {_image(x): weight for x, weight in g.distribution.items()}
    win = {(_image(x), _image(a)): weight for (x, a), weight in g.win.items()}
    return create_game(questions, answers, distribution, win)


def question_marginal(g: Game, j: int) -> Dict[str, Fraction]:
    marginal: Dict[str, Fraction] = {}
    for x, weight in g.distribution.items():
        marginal[x[j]] = marginal.get(x[j], Fraction(0)) + weight
    return marginal
