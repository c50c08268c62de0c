from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from scripts.engine.core.game import (
    game_value,
    ProductStrategy,
    repeat_strategy,
    strategy_encoding,
    strategy_value,
    tensor_power,
)
from scripts.engine.core.utility import create_rng, digest, format_rational
from scripts.engine.internal import library
from scripts.engine.internal.constant import OutputFormat, ValueMethod
from scripts.engine.internal.error import BudgetExceededError, UsageError
from scripts.engine.internal.extend_json import dumps_canonical

if TYPE_CHECKING:
    from typing import Any, Dict, List, Optional, Tuple

    from scripts.engine.core.game import Game
    from scripts.engine.internal.constant import OutputFormatType, ValueMethodType
    from scripts.engine.internal.definition import BudgetConfigData, SearchConfigData

__all__ = ["DecayRecord", "DecayCurve", "baseline_strategy", "heuristic_value_search", "decay_curve"]


############################ TYPES ############################


@dataclass(frozen=True)
class DecayRecord:
    n: int
    exact_value: Optional[Fraction]
    lower_bound: Fraction
    method: ValueMethodType
    witness_digest: str
    runtime_seconds: float

    def to_record(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "exact_value": None if self.exact_value is None else format_rational(self.exact_value),
            "lower_bound": format_rational(self.lower_bound),
            "method": self.method,
            "witness_digest": self.witness_digest,
            "runtime_seconds": round(self.runtime_seconds, 6),
        }


@dataclass(frozen=True)
class DecayCurve:
    records: Tuple[DecayRecord, ...]

    def to_records(self) -> List[Dict[str, Any]]:
        return [record.to_record() for record in self.records]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(DecayRecord.__dataclass_fields__), lineterminator="\n")
        writer.writeheader()
        for row in self.to_records():
            writer.writerow({key: "" if value is None else value for key, value in row.items()})
        return buffer.getvalue()

    def emit(self, output_format: OutputFormatType = OutputFormat.JSON) -> str:
        if output_format == OutputFormat.CSV:
            return self.to_csv()
        if output_format == OutputFormat.JSON:
            return dumps_canonical({"curve": self.to_records()})
        raise UsageError(f"unknown format '{output_format}'", "format")


############################ LOCAL SEARCH ############################


class _LocalSearch:
    """
    Hill climbing over the answer tables of one game. Scores are integers: Q(x)·V(x, a) scaled by a common
    denominator, so a change of one entry is priced exactly from the support points that read it.
    """

    def __init__(self, g: Game):
        self.g = g
        k = g.players
        self.scale = 1
        for x, probability in g.distribution.items():
            for weight in g.wins_at(x).values():
                denominator = (probability * weight).denominator
                self.scale = self.scale * denominator // math.gcd(self.scale, denominator)
        question_index = [{q: i for i, q in enumerate(alphabet)} for alphabet in g.questions]
        answer_index = [{a: i for i, a in enumerate(alphabet)} for alphabet in g.answers]
        self.points: List[Tuple[Tuple[int, ...], Dict[Tuple[int, ...], int]]] = []
        for x, probability in sorted(g.distribution.items()):
            table = {
                tuple(answer_index[j][a[j]] for j in range(k)): int(probability * weight * self.scale)
                for a, weight in g.wins_at(x).items()
            }
            self.points.append((tuple(question_index[j][x[j]] for j in range(k)), table))
        # readers[j][q]: support points where player j is asked q
        self.readers: List[List[List[int]]] = [[[] for _ in alphabet] for alphabet in g.questions]
        for t, (x, _) in enumerate(self.points):
            for j in range(k):
                self.readers[j][x[j]].append(t)
        self.entries = [(j, q) for j in range(k) for q in range(len(g.questions[j])) if self.readers[j][q]]

    def score(self, tables: List[List[int]]) -> int:
        k = self.g.players
        return sum(table.get(tuple(tables[j][x[j]] for j in range(k)), 0) for x, table in self.points)

    def _delta(self, tables: List[List[int]], j: int, q: int, answer: int) -> int:
        k = self.g.players
        change = 0
        for t in self.readers[j][q]:
            x, table = self.points[t]
            current = [tables[p][x[p]] for p in range(k)]
            before = table.get(tuple(current), 0)
            current[j] = answer
            change += table.get(tuple(current), 0) - before
        return change

    def climb(self, tables: List[List[int]], score: int, sweeps: int) -> int:
        """
        Apply the single best improving entry change, sweep after sweep, until none improves.
        """
        for _ in range(sweeps):
            best = (0, -1, -1, -1)
            for j, q in self.entries:
                for answer in range(len(self.g.answers[j])):
                    if answer != tables[j][q]:
                        change = self._delta(tables, j, q, answer)
                        if change > best[0]:
                            best = (change, j, q, answer)
            if best[0] <= 0:
                break
            change, j, q, answer = best
            tables[j][q] = answer
            score += change
        return score

    def decode(self, tables: List[List[int]]) -> ProductStrategy:
        return ProductStrategy(
            tuple(
                {question: self.g.answers[j][tables[j][i]] for i, question in enumerate(self.g.questions[j])}
                for j in range(self.g.players)
            )
        )

    def encode(self, s: ProductStrategy) -> List[List[int]]:
        return [
            [self.g.answers[j].index(s.tables[j][question]) for question in self.g.questions[j]]
            for j in range(self.g.players)
        ]


def _single_copy_strategy(g: Game, budget: Optional[BudgetConfigData] = None) -> ProductStrategy:
    try:
        return game_value(g, budget)[1]
    except BudgetExceededError:
        logging.warning(f"_single_copy_strategy: single copy too large to solve, falling back to first answers.")
        return ProductStrategy(
            tuple({question: g.answers[j][0] for question in g.questions[j]} for j in range(g.players))
        )


def baseline_strategy(g: Game, n: int, budget: Optional[BudgetConfigData] = None) -> ProductStrategy:
    """
    The single copy optimum played independently in every coordinate. Games too big to solve exactly fall back to
    everyone answering their first symbol.
    """
    return repeat_strategy(g, _single_copy_strategy(g, budget), n)


def heuristic_value_search(
    g: Game,
    n: int,
    config: Optional[SearchConfigData] = None,
    seed: Optional[int] = None,
    budget: Optional[BudgetConfigData] = None,
) -> Tuple[Fraction, ProductStrategy]:
    """
    A certified lower bound on val(g^n): the best of the repeated single copy optimum, the echo table (each player
    answers its own question, when the alphabets allow it) and seeded random restarts, all improved by steepest
    ascent, the restarts also with perturbation kicks. Stops early once val(g), an upper bound, is reached.
    """
    config = config or library.SEARCH_CONFIG
    seed = config.seed if seed is None else seed
    repeated = tensor_power(g, n, budget)
    search = _LocalSearch(repeated)

    try:
        ceiling: Optional[Fraction] = game_value(g, budget)[0]
    except BudgetExceededError:
        ceiling = None
    starts = [search.encode(baseline_strategy(g, n, budget))]
    if all(repeated.questions[j] == repeated.answers[j] for j in range(repeated.players)):
        starts.append([list(range(len(alphabet))) for alphabet in repeated.questions])
    best_tables: List[List[int]] = []
    best = -1
    for tables in starts:
        score = search.climb(tables, search.score(tables), config.max_sweeps)
        if score > best:
            best_tables, best = tables, score

    for restart in range(config.restarts):
        if ceiling is not None and Fraction(best, search.scale) >= ceiling:
            break
        rng = create_rng(seed, restart)
        tables = [
            [int(value) for value in rng.integers(0, len(repeated.answers[j]), size=len(repeated.questions[j]))]
            for j in range(repeated.players)
        ]
        score = search.climb(tables, search.score(tables), config.max_sweeps)
        for _ in range(config.kicks):
            trial = [list(table) for table in tables]
            for pick in rng.integers(0, len(search.entries), size=config.kick_size):
                j, q = search.entries[int(pick)]
                trial[j][q] = int(rng.integers(0, len(repeated.answers[j])))
            trial_score = search.climb(trial, search.score(trial), config.max_sweeps)
            if trial_score > score:
                tables, score = trial, trial_score
        if score > best:
            best_tables, best = tables, score
            logging.debug(f"heuristic_value_search: restart {restart} improves to {Fraction(best, search.scale)}.")

    strategy = search.decode(best_tables)
    value = strategy_value(repeated, strategy)
    logging.info(f"heuristic_value_search: n={n}, lower bound {format_rational(value)}.")
    return value, strategy


############################ DECAY ############################


def decay_curve(
    g: Game,
    n_max: int,
    seed: Optional[int] = None,
    config: Optional[SearchConfigData] = None,
    budget: Optional[BudgetConfigData] = None,
    workers: int = 1,
) -> DecayCurve:
    """
    For n = 1..n_max, the exact value of g^n when exhaustive search fits the budget, otherwise a heuristic lower
    bound. Every lower bound is at least val(g)^n. When g^n itself is too large to build, the row is the repeated
    single copy strategy, priced without building g^n since independent coordinates multiply.
    """
    budget = budget or library.BUDGET_CONFIG
    records = []
    single: Optional[ProductStrategy] = None
    for n in range(1, n_max + 1):
        start = time.perf_counter()
        try:
            repeated = tensor_power(g, n, budget)
        except BudgetExceededError as error:
            logging.warning(f"decay_curve: n={n} cannot be built, {error.message}; recording the repeated baseline.")
            if single is None:
                single = _single_copy_strategy(g, budget)
            value = strategy_value(g, single) ** n
            witness_digest = digest(("repeat", n, strategy_encoding(g, single)))
            records.append(
                DecayRecord(n, None, value, ValueMethod.BASELINE, witness_digest, time.perf_counter() - start)
            )
            continue
        try:
            value, witness = game_value(repeated, budget, workers)
            exact: Optional[Fraction] = value
            method = ValueMethod.EXHAUSTIVE
        except BudgetExceededError:
            exact = None
            value, witness = heuristic_value_search(g, n, config, seed, budget)
            baseline = strategy_value(repeated, baseline_strategy(g, n, budget))
            method = ValueMethod.HEURISTIC if value > baseline else ValueMethod.BASELINE
        records.append(
            DecayRecord(
                n, exact, value, method, digest(strategy_encoding(repeated, witness)), time.perf_counter() - start
            )
        )
        logging.info(f"decay_curve: n={n} {method} {format_rational(value)}.")
    return DecayCurve(tuple(records))
