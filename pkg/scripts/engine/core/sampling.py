from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from scripts.engine.core.utility import (
    create_rng,
    hoeffding_radius,
    join_symbols,
    marginalise,
    normalise,
    split_symbol,
)
from scripts.engine.core.zoo import anti_correlation
from scripts.engine.internal import library
from scripts.engine.internal.constant import BINARY, SampleMode
from scripts.engine.internal.error import (
    AlphabetMismatchError,
    BudgetExceededError,
    IndexOutOfRangeError,
    UnsupportedGameError,
    UsageError,
    ZeroProbabilityError,
)

if TYPE_CHECKING:
    from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

    from scripts.engine.core.game import Game, ProductEvent, ProductStrategy
    from scripts.engine.internal.constant import SampleModeType
    from scripts.engine.internal.definition import BudgetConfigData, ExperimentConfigData

    Atom = Tuple[Tuple[str, ...], ...]

__all__ = [
    "JointDistribution",
    "mc_win_estimate",
    "space_P",
    "space_C",
    "dependency_breaking_sample",
    "dependency_breaking_atoms",
    "dependency_breaking_factorizes",
]

# stream ids, so the different samplers of one seed never share draws
_SPACE_P_STREAM = 1
_SPACE_C_STREAM = 2
_DEPENDENCY_STREAM = 3
_MC_STREAM = 4


############################ JOINT DISTRIBUTIONS ############################


@dataclass(frozen=True)
class JointDistribution:
    """
    An exact distribution over named variables. Each atom holds one value per variable and every value is the tuple
    of that variable's coordinates.
    """

    variables: Tuple[str, ...]
    atoms: Mapping[Atom, Fraction]

    __hash__ = None  # type: ignore

    def total(self) -> Fraction:
        return sum(self.atoms.values(), Fraction(0))

    def _positions(self, names: Sequence[str]) -> List[int]:
        missing = [name for name in names if name not in self.variables]
        if missing:
            raise UsageError(f"unknown variables {missing}, expected some of {list(self.variables)}", "variables")
        return [self.variables.index(name) for name in names]

    def marginal(self, names: Sequence[str]) -> JointDistribution:
        return JointDistribution(tuple(names), marginalise(self.atoms, self._positions(names)))

    def coordinate(self, i: int) -> JointDistribution:
        """
        Project every variable onto its i-th coordinate (0 based).
        """
        projected: Dict[Atom, Fraction] = {}
        for atom, weight in self.atoms.items():
            key = tuple((value[i],) for value in atom)
            projected[key] = projected.get(key, Fraction(0)) + weight
        return JointDistribution(self.variables, projected)

    def conditional(self, given: Mapping[str, Tuple[str, ...]]) -> JointDistribution:
        positions = dict(zip(given, self._positions(list(given))))
        kept = {
            atom: weight
            for atom, weight in self.atoms.items()
            if all(atom[positions[name]] == value for name, value in given.items())
        }
        mass = sum(kept.values(), Fraction(0))
        if mass == 0:
            raise ZeroProbabilityError(f"conditioning on {dict(given)} has probability zero", "given")
        return JointDistribution(self.variables, {atom: weight / mass for atom, weight in kept.items()})

    def probability(self, assignment: Mapping[str, Tuple[str, ...]]) -> Fraction:
        positions = dict(zip(assignment, self._positions(list(assignment))))
        return sum(
            (
                weight
                for atom, weight in self.atoms.items()
                if all(atom[positions[name]] == value for name, value in assignment.items())
            ),
            Fraction(0),
        )


def _power(variables: Tuple[str, ...], single: Mapping[Tuple[str, ...], Fraction], n: int) -> JointDistribution:
    """
    n independent coordinates of a one-coordinate joint, regrouped variable by variable.
    """
    atoms: Dict[Atom, Fraction] = {}
    for combination in itertools.product(single.items(), repeat=n):
        weight = Fraction(1)
        for _, w in combination:
            weight *= w
        atom = tuple(tuple(values[v] for values, _ in combination) for v in range(len(variables)))
        atoms[atom] = atoms.get(atom, Fraction(0)) + weight
    return JointDistribution(variables, atoms)


############################ MONTE CARLO ############################


def _strategy_codes(g: Game, n: int, s: ProductStrategy) -> List[np.ndarray]:
    """
    Per player, answer indices by coordinate for every question tuple, rows in mixed radix order.
    """
    codes = []
    for j in range(g.players):
        answer_index = {symbol: index for index, symbol in enumerate(g.answers[j])}
        rows = []
        for parts in itertools.product(g.questions[j], repeat=n):
            symbol = join_symbols(parts)
            if symbol not in s.tables[j]:
                raise AlphabetMismatchError(f"player {j} has no answer for '{symbol}'", f"strategy[{j}]")
            try:
                rows.append([answer_index[part] for part in split_symbol(s.tables[j][symbol], n)])
            except KeyError:
                raise AlphabetMismatchError(f"answer '{s.tables[j][symbol]}' outside the alphabet", f"strategy[{j}]")
        codes.append(np.array(rows, dtype=np.int64))
    return codes


def mc_win_estimate(
    g: Game,
    n: int,
    s: ProductStrategy,
    trials: int,
    seed: int,
    config: Optional[ExperimentConfigData] = None,
    workers: Optional[int] = None,
) -> Tuple[float, float]:
    """
    Estimate Pr[s wins every coordinate of g^n] and a Hoeffding radius. Trials are drawn in blocks, block b from the
    stream (seed, b), so the estimate does not depend on the worker count.
    """
    config = config or library.EXPERIMENT_CONFIG
    workers = workers or config.workers
    if trials < 1:
        raise IndexOutOfRangeError(f"need at least one trial, got {trials}", "trials")
    if n < 1:
        raise IndexOutOfRangeError(f"repetition count must be positive, got {n}", "n")

    support = list(g.distribution)
    probabilities = np.array([float(g.distribution[x]) for x in support])
    probabilities /= probabilities.sum()
    question_index = [
        np.array([g.questions[j].index(x[j]) for x in support], dtype=np.int64) for j in range(g.players)
    ]
    codes = _strategy_codes(g, n, s)
    weights = np.zeros((len(support),) + tuple(len(alphabet) for alphabet in g.answers))
    for t, x in enumerate(support):
        for a, w in g.wins_at(x).items():
            weights[(t,) + tuple(g.answers[j].index(a[j]) for j in range(g.players))] = float(w)

    radix = [len(alphabet) ** np.arange(n - 1, -1, -1) for alphabet in g.questions]

    def _block(block: int) -> float:
        size = min(config.block_size, trials - block * config.block_size)
        rng = create_rng(seed, _MC_STREAM, block)
        drawn = rng.choice(len(support), size=(size, n), p=probabilities)
        per_player = []
        for j in range(g.players):
            row = (question_index[j][drawn] * radix[j]).sum(axis=1)
            per_player.append(codes[j][row])
        outcome = np.ones(size)
        for i in range(n):
            outcome *= weights[(drawn[:, i],) + tuple(answers[:, i] for answers in per_player)]
        return float(outcome.sum())

    blocks = range(-(-trials // config.block_size))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            totals = list(executor.map(_block, blocks))
    else:
        totals = [_block(block) for block in blocks]

    estimate = sum(totals) / trials
    radius = hoeffding_radius(trials, config.confidence)
    logging.info(f"mc_win_estimate: {estimate:.4f} +/- {radius:.4f} over {trials} trials.")
    return estimate, radius


############################ CORRELATED SPACES ############################


def _three_player(g: Optional[Game]) -> Game:
    g = g if g is not None else anti_correlation()
    if g.players != 3:
        raise UnsupportedGameError(f"the correlated spaces need three players, got {g.players}", "game")
    return g


def _conditional(joint: Mapping[Tuple[str, ...], Fraction], given: int) -> Dict[str, Dict[Tuple[str, ...], Fraction]]:
    """
    Split a distribution over question tuples into the law of the other players given player `given`'s question.
    """
    table: Dict[str, Dict[Tuple[str, ...], Fraction]] = {}
    for x, weight in joint.items():
        rest = tuple(value for j, value in enumerate(x) if j != given)
        row = table.setdefault(x[given], {})
        row[rest] = row.get(rest, Fraction(0)) + weight
    return {key: normalise(row) for key, row in table.items()}


def _check_exact(n: int, limit: int, single_atoms: int, budget: BudgetConfigData, name: str):
    if n > limit:
        raise BudgetExceededError(f"exact {name} is limited to n <= {limit}, got {n}", "n")
    if single_atoms ** n > budget.max_diagnostic_atoms:
        raise BudgetExceededError(f"{single_atoms ** n} atoms exceed {budget.max_diagnostic_atoms}", "n")


def _space_p_coordinate(g: Game) -> Dict[Tuple[str, ...], Fraction]:
    # (X, Xt, Y, Z, Zt): Y first, then (X, Z) and (Xt, Zt) i.i.d. given Y
    y_marginal = marginalise(g.distribution, [1])
    given_y = _conditional(g.distribution, 1)
    single: Dict[Tuple[str, ...], Fraction] = {}
    for (y,), p_y in y_marginal.items():
        for ((x, z), p), ((xt, zt), pt) in itertools.product(given_y[y].items(), repeat=2):
            single[(x, xt, y, z, zt)] = p_y * p * pt
    return single


def _draw(rng: np.random.Generator, table: Mapping[Any, Fraction], size: Union[int, Tuple[int, ...]]) -> np.ndarray:
    keys = list(table)
    probabilities = np.array([float(table[key]) for key in keys])
    picks = rng.choice(len(keys), size=size, p=probabilities / probabilities.sum())
    values = np.empty(len(keys), dtype=object)
    for index, key in enumerate(keys):
        values[index] = key
    return values[picks]


def _draw_given(
    rng: np.random.Generator, tables: Mapping[str, Mapping[Any, Fraction]], condition: np.ndarray
) -> np.ndarray:
    out = np.empty(condition.shape, dtype=object)
    for key, table in tables.items():
        mask = condition == key
        count = int(mask.sum())
        if count:
            out[mask] = _draw(rng, table, count)
    return out


def _split(pairs: np.ndarray, position: int) -> np.ndarray:
    return np.vectorize(lambda pair: pair[position], otypes=[object])(pairs).astype(str)


def space_P(
    n: int,
    seed: int = 0,
    mode: SampleModeType = SampleMode.EXACT,
    g: Optional[Game] = None,
    trials: int = 1,
    budget: Optional[BudgetConfigData] = None,
) -> Union[JointDistribution, Dict[str, np.ndarray]]:
    """
    Draw Y from Q_Y^n, then (X, Z) and (Xt, Zt) independently from Q^n conditioned on Y. The exact mode returns the
    joint over (X, Xt, Y, Z, Zt); the sample mode one (trials, n) array per variable.
    """
    g = _three_player(g)
    variables = ("X", "Xt", "Y", "Z", "Zt")
    if mode == SampleMode.EXACT:
        budget = budget or library.BUDGET_CONFIG
        single = _space_p_coordinate(g)
        _check_exact(n, budget.max_exact_space_p_n, len(single), budget, "space_P")
        return _power(variables, single, n)
    if mode != SampleMode.SAMPLE:
        raise UsageError(f"unknown sample mode '{mode}'", "mode")

    rng = create_rng(seed, _SPACE_P_STREAM)
    y = _draw(rng, {y: w for (y,), w in marginalise(g.distribution, [1]).items()}, (trials, n)).astype(str)
    given_y = _conditional(g.distribution, 1)
    first = _draw_given(rng, given_y, y)
    second = _draw_given(rng, given_y, y)
    return {"X": _split(first, 0), "Xt": _split(second, 0), "Y": y, "Z": _split(first, 1), "Zt": _split(second, 1)}


def _space_c_coordinate(g: Game, keep: Fraction) -> Dict[Tuple[str, ...], Fraction]:
    # (X, S, Xt, Yt, Zt): S is "1" when the coordinate is copied
    x_marginal = {x: w for (x,), w in marginalise(g.distribution, [0]).items()}
    given_x = _conditional(g.distribution, 0)
    single: Dict[Tuple[str, ...], Fraction] = {}
    for x, p_x in x_marginal.items():
        for copied, p_s in (("1", keep), ("0", 1 - keep)):
            choices = {x: Fraction(1)} if copied == "1" else x_marginal
            for xt, p_xt in choices.items():
                for (yt, zt), p_yz in given_x[xt].items():
                    key = (x, copied, xt, yt, zt)
                    single[key] = single.get(key, Fraction(0)) + p_x * p_s * p_xt * p_yz
    return {key: weight for key, weight in single.items() if weight}


def space_C(
    n: int,
    seed: int = 0,
    mode: SampleModeType = SampleMode.EXACT,
    g: Optional[Game] = None,
    trials: int = 1,
    keep: Fraction = Fraction(1, 4),
    budget: Optional[BudgetConfigData] = None,
) -> Union[JointDistribution, Dict[str, np.ndarray]]:
    """
    Draw X from Q_X^n and S by keeping each coordinate with probability `keep`. Xt copies X on S and is redrawn from
    Q_X elsewhere; (Yt, Zt) come from Q^n conditioned on Xt.
    """
    g = _three_player(g)
    if not 0 <= keep <= 1:
        raise IndexOutOfRangeError(f"keep probability {keep} outside [0, 1]", "keep")
    variables = ("X", "S", "Xt", "Yt", "Zt")
    if mode == SampleMode.EXACT:
        budget = budget or library.BUDGET_CONFIG
        single = _space_c_coordinate(g, Fraction(keep))
        _check_exact(n, budget.max_exact_space_c_n, len(single), budget, "space_C")
        return _power(variables, single, n)
    if mode != SampleMode.SAMPLE:
        raise UsageError(f"unknown sample mode '{mode}'", "mode")

    rng = create_rng(seed, _SPACE_C_STREAM)
    x_marginal = {x: w for (x,), w in marginalise(g.distribution, [0]).items()}
    x = _draw(rng, x_marginal, (trials, n)).astype(str)
    kept = rng.random((trials, n)) < float(keep)
    fresh = _draw(rng, x_marginal, (trials, n)).astype(str)
    xt = np.where(kept, x, fresh)
    rest = _draw_given(rng, _conditional(g.distribution, 0), xt)
    return {
        "X": x,
        "S": np.where(kept, BINARY[1], BINARY[0]),
        "Xt": xt,
        "Yt": _split(rest, 0),
        "Zt": _split(rest, 1),
    }


############################ DEPENDENCY BREAKING ############################


def _coordinate_points(g: Game, n: int, x: Sequence[str]) -> List[Tuple[str, ...]]:
    if len(x) != g.players:
        raise AlphabetMismatchError(f"question tuple has {len(x)} entries for {g.players} players", "x")
    parts = [split_symbol(symbol, n) for symbol in x]
    points = [tuple(parts[j][i] for j in range(g.players)) for i in range(n)]
    for i, point in enumerate(points):
        if point not in g.distribution:
            raise ZeroProbabilityError(f"coordinate {i + 1} question {point} is off the support", "x")
    return points


def dependency_breaking_sample(
    g: Game, n: int, x: Sequence[str], seed: int
) -> Tuple[Tuple[int, Tuple[str, ...]], ...]:
    """
    R_i = (D_i, M_i): D_i a uniform player and M_i the questions of every other player at coordinate i.
    """
    points = _coordinate_points(g, n, x)
    rng = create_rng(seed, _DEPENDENCY_STREAM)
    dropped = rng.integers(0, g.players, size=n)
    return tuple(
        (int(d), tuple(value for j, value in enumerate(point) if j != d)) for d, point in zip(dropped, points)
    )


def dependency_breaking_atoms(
    g: Game, n: int, event: Optional[ProductEvent] = None, budget: Optional[BudgetConfigData] = None
) -> Iterator[Tuple[Tuple[Tuple[str, ...], ...], Tuple[Tuple[int, Tuple[str, ...]], ...], Fraction]]:
    """
    Every (x, r) of the joint law of X ~ P and R, restricted to the event, with its probability.
    """
    budget = budget or library.BUDGET_CONFIG
    k = g.players
    atoms = (len(g.distribution) * k) ** n
    if atoms > budget.max_diagnostic_atoms:
        raise BudgetExceededError(f"{atoms} atoms exceed {budget.max_diagnostic_atoms}", "n")
    share = Fraction(1, k ** n)
    for combination in itertools.product(g.distribution.items(), repeat=n):
        points = tuple(point for point, _ in combination)
        if event is not None and not event.contains(
            tuple(join_symbols(point[j] for point in points) for j in range(k))
        ):
            continue
        probability = share
        for _, weight in combination:
            probability *= weight
        for dropped in itertools.product(range(k), repeat=n):
            r = tuple((d, tuple(v for j, v in enumerate(point) if j != d)) for d, point in zip(dropped, points))
            yield points, r, probability


def dependency_breaking_factorizes(
    g: Game, n: int, event: Optional[ProductEvent] = None, budget: Optional[BudgetConfigData] = None
) -> bool:
    """
    Exact check that for every coordinate i, given (x_i, r_-i) and the product event, the players' questions are
    independent, each distributed as player j's questions given (r_-i, x_i^j).
    """
    atoms = list(dependency_breaking_atoms(g, n, event, budget))
    if not atoms:
        raise ZeroProbabilityError("the product event has probability zero", "event")
    k = g.players

    for i in range(n):
        joint: Dict[Any, Dict[Tuple, Fraction]] = {}
        factors: Dict[Any, Dict[Tuple, Fraction]] = {}
        for points, r, probability in atoms:
            rest = r[:i] + r[i + 1 :]
            row = joint.setdefault((points[i], rest), {})
            row[points] = row.get(points, Fraction(0)) + probability
            for j in range(k):
                own = tuple(point[j] for point in points)
                factor = factors.setdefault((j, points[i][j], rest), {})
                factor[own] = factor.get(own, Fraction(0)) + probability

        factors = {key: normalise(row) for key, row in factors.items()}
        for (point, rest), row in joint.items():
            row = normalise(row)
            marginals = [factors[(j, point[j], rest)] for j in range(k)]
            for own in itertools.product(*(list(marginal.items()) for marginal in marginals)):
                product = Fraction(1)
                for _, weight in own:
                    product *= weight
                points = tuple(tuple(own[j][0][c] for j in range(k)) for c in range(n))
                if row.get(points, Fraction(0)) != product:
                    logging.debug(f"dependency_breaking_factorizes: fails at coordinate {i + 1}, {point}, {rest}.")
                    return False
    return True

