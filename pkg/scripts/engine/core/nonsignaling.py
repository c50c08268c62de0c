from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from scripts.engine.core.utility import format_rational, join_symbols
from scripts.engine.internal import library
from scripts.engine.internal.constant import LpMethod, SubsetMode
from scripts.engine.internal.error import (
    BudgetExceededError,
    CertificateError,
    LpInfeasibleError,
    LpUnboundedError,
    UsageError,
)

if TYPE_CHECKING:
    from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

    from scripts.engine.core.game import Game
    from scripts.engine.internal.constant import LpMethodType, SubsetModeType
    from scripts.engine.internal.definition import BudgetConfigData

__all__ = [
    "LinearConstraint",
    "LinearProgram",
    "LpSolution",
    "NsStrategy",
    "build_ns_lp",
    "simplex_solve",
    "verify_certificate",
    "ns_value",
    "is_non_signaling",
    "player_subsets",
]

EQ = "=="
LE = "<="
GE = ">="

_CROSSOVER_TOLERANCES = (1e-9, 1e-7, 1e-5)


######################################## TYPES ########################################


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: Mapping[int, Fraction]  # variable index -> coefficient, zeros omitted
    sense: str
    rhs: Fraction
    name: str = ""


@dataclass(frozen=True)
class LinearProgram:
    """
    maximise objective · v subject to the constraints and v >= 0. Rows are sparse, every number exact.
    """

    variables: Tuple[str, ...]
    constraints: Tuple[LinearConstraint, ...]
    objective: Mapping[int, Fraction]

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.constraints), len(self.variables)


@dataclass(frozen=True)
class LpSolution:
    """
    An optimum with its proof: `primal` attains it, `dual` (one multiplier per constraint) bounds it from above.
    """

    optimum: Fraction
    primal: Tuple[Fraction, ...]
    dual: Tuple[Fraction, ...]
    method: LpMethodType
    pivots: int = 0


@dataclass(frozen=True)
class NsStrategy:
    """
    A conditional distribution p(a|x) over every question tuple of the full product, not only the support. `table`
    keeps the nonzero entries.
    """

    questions: Tuple[Tuple[str, ...], ...]
    answers: Tuple[Tuple[str, ...], ...]
    table: Mapping[Tuple[str, ...], Mapping[Tuple[str, ...], Fraction]]

    __hash__ = None  # type: ignore

    def probability(self, x: Tuple[str, ...], a: Tuple[str, ...]) -> Fraction:
        return self.table.get(x, {}).get(a, Fraction(0))

    def marginal(self, x: Tuple[str, ...], players: Sequence[int]) -> Dict[Tuple[str, ...], Fraction]:
        marginal: Dict[Tuple[str, ...], Fraction] = {}
        for a, weight in self.table.get(x, {}).items():
            key = tuple(a[j] for j in players)
            marginal[key] = marginal.get(key, Fraction(0)) + weight
        return marginal

    def to_record(self) -> List[Dict[str, Any]]:
        return [
            {"x": list(x), "p": [{"a": list(a), "p": format_rational(w)} for a, w in sorted(row.items())]}
            for x, row in sorted(self.table.items())
        ]


######################################## LP BUILDER ########################################


def player_subsets(k: int, subsets: SubsetModeType = SubsetMode.COMPLEMENTARY) -> List[Tuple[int, ...]]:
    """
    The player sets J whose answer marginals may only depend on x^J.
    """
    if subsets == SubsetMode.COMPLEMENTARY:
        sizes = [k - 1] if k > 1 else []
    elif subsets == SubsetMode.ALL:
        sizes = list(range(1, k))
    else:
        raise UsageError(f"unknown subset mode '{subsets}'", "subsets")
    return [combination for size in sizes for combination in itertools.combinations(range(k), size)]


def _grouped(tuples: Sequence[Tuple[str, ...]], players: Sequence[int]) -> Dict[Tuple[str, ...], List[int]]:
    groups: Dict[Tuple[str, ...], List[int]] = {}
    for index, values in enumerate(tuples):
        groups.setdefault(tuple(values[j] for j in players), []).append(index)
    return groups


def build_ns_lp(
    g: Game, subsets: SubsetModeType = SubsetMode.COMPLEMENTARY, budget: Optional[BudgetConfigData] = None
) -> Tuple[LinearProgram, List[Tuple[str, ...]], List[Tuple[str, ...]]]:
    """
    The non-signaling LP of g. Variable x_index * |A| + a_index is p(a|x). Returns the program with the question
    and answer tuples in variable order.
    """
    budget = budget or library.BUDGET_CONFIG
    questions = list(itertools.product(*g.questions))
    answers = list(itertools.product(*g.answers))
    size = len(questions) * len(answers)
    if size > budget.max_lp_variables:
        raise BudgetExceededError(f"{size} LP variables exceed {budget.max_lp_variables}", "game")
    width = len(answers)

    variables = tuple(
        f"p({join_symbols(a)}|{join_symbols(x)})" for x in questions for a in answers
    )
    constraints = []
    for xi, x in enumerate(questions):
        row = {xi * width + ai: Fraction(1) for ai in range(width)}
        constraints.append(LinearConstraint(row, EQ, Fraction(1), f"sum|{join_symbols(x)}"))

    for players in player_subsets(g.players, subsets):
        answer_groups = _grouped(answers, players)
        for members in _grouped(questions, players).values():
            reference = members[0]
            for other in members[1:]:
                for a_part, a_indices in answer_groups.items():
                    row: Dict[int, Fraction] = {}
                    for ai in a_indices:
                        row[other * width + ai] = Fraction(1)
                        row[reference * width + ai] = Fraction(-1)
                    name = f"ns{list(players)}|{join_symbols(questions[other])}|{join_symbols(a_part)}"
                    constraints.append(LinearConstraint(row, EQ, Fraction(0), name))

    question_index = {x: xi for xi, x in enumerate(questions)}
    answer_index = {a: ai for ai, a in enumerate(answers)}
    objective: Dict[int, Fraction] = {}
    for x, probability in g.distribution.items():
        for a, weight in g.wins_at(x).items():
            objective[question_index[x] * width + answer_index[a]] = probability * weight

    lp = LinearProgram(variables, tuple(constraints), objective)
    logging.debug(f"build_ns_lp: {len(constraints)} rows, {len(variables)} variables, subsets={subsets}.")
    return lp, questions, answers


######################################## CERTIFICATES ########################################


def _row_value(coefficients: Mapping[int, Fraction], values: Sequence[Fraction]) -> Fraction:
    return sum((c * values[j] for j, c in coefficients.items()), Fraction(0))


def _primal_feasible(lp: LinearProgram, primal: Sequence[Fraction]) -> bool:
    if len(primal) != len(lp.variables) or any(v < 0 for v in primal):
        return False
    for constraint in lp.constraints:
        value = _row_value(constraint.coefficients, primal)
        if constraint.sense == EQ and value != constraint.rhs:
            return False
        if constraint.sense == LE and value > constraint.rhs:
            return False
        if constraint.sense == GE and value < constraint.rhs:
            return False
    return True


def _dual_feasible(lp: LinearProgram, dual: Sequence[Fraction]) -> bool:
    if len(dual) != len(lp.constraints):
        return False
    for constraint, y in zip(lp.constraints, dual):
        if (constraint.sense == LE and y < 0) or (constraint.sense == GE and y > 0):
            return False
    reduced = [Fraction(0)] * len(lp.variables)
    for constraint, y in zip(lp.constraints, dual):
        if y:
            for j, c in constraint.coefficients.items():
                reduced[j] += c * y
    return all(reduced[j] >= lp.objective.get(j, Fraction(0)) for j in range(len(lp.variables)))


def verify_certificate(lp: LinearProgram, solution: LpSolution) -> bool:
    """
    Exact check that the primal is feasible, the dual is feasible and both objectives equal the optimum.
    """
    if not _primal_feasible(lp, solution.primal) or not _dual_feasible(lp, solution.dual):
        return False
    primal_objective = _row_value(lp.objective, solution.primal)
    dual_objective = sum((y * c.rhs for y, c in zip(solution.dual, lp.constraints)), Fraction(0))
    return primal_objective == solution.optimum == dual_objective


######################################## EXACT SIMPLEX ########################################


class _Tableau:
    """
    Dense rational tableau of the standard form [A | slacks | artificials | b] with one artificial per row.
    Entering and leaving variables follow Bland's rule.
    """

    def __init__(self, lp: LinearProgram):
        m, n = lp.shape
        slack_rows = [i for i, c in enumerate(lp.constraints) if c.sense != EQ]
        self.m = m
        self.n = n
        self.slack_start = n
        self.artificial_start = n + len(slack_rows)
        self.width = self.artificial_start + m
        self.signs: List[int] = []
        self.rows: List[List[Fraction]] = []
        slack_of = {i: n + position for position, i in enumerate(slack_rows)}
        zero = Fraction(0)
        for i, constraint in enumerate(lp.constraints):
            row = [zero] * (self.width + 1)
            for j, c in constraint.coefficients.items():
                row[j] = Fraction(c)
            if constraint.sense == LE:
                row[slack_of[i]] = Fraction(1)
            elif constraint.sense == GE:
                row[slack_of[i]] = Fraction(-1)
            row[-1] = Fraction(constraint.rhs)
            sign = -1 if row[-1] < 0 else 1
            if sign < 0:
                row = [-value for value in row]
            row[self.artificial_start + i] = Fraction(1)
            self.signs.append(sign)
            self.rows.append(row)
        self.basis = [self.artificial_start + i for i in range(m)]
        self.costs: List[Fraction] = []
        self.reduced: List[Fraction] = []
        self.pivots = 0

    def set_costs(self, costs: List[Fraction]):
        self.costs = costs
        reduced = list(costs) + [Fraction(0)]
        for r, b in enumerate(self.basis):
            if costs[b]:
                factor = costs[b]
                reduced = [value - factor * entry for value, entry in zip(reduced, self.rows[r])]
        self.reduced = reduced

    def pivot(self, r: int, e: int):
        pivot_row = self.rows[r]
        element = pivot_row[e]
        if element != 1:
            pivot_row = [value / element for value in pivot_row]
            self.rows[r] = pivot_row
        nonzero = [(j, value) for j, value in enumerate(pivot_row) if value]
        for other in range(self.m):
            if other != r:
                factor = self.rows[other][e]
                if factor:
                    target = self.rows[other]
                    for j, value in nonzero:
                        target[j] -= factor * value
        factor = self.reduced[e]
        if factor:
            for j, value in nonzero:
                self.reduced[j] -= factor * value
        self.basis[r] = e
        self.pivots += 1

    def optimise(self, allow_artificial: bool):
        """
        Pivot until no reduced cost is positive. Returns the entering column of an unbounded ray, or None.
        """
        limit = self.width if allow_artificial else self.artificial_start
        while True:
            entering = next((j for j in range(limit) if self.reduced[j] > 0), None)
            if entering is None:
                return None
            leaving = None
            best: Optional[Tuple[Fraction, int]] = None
            for r in range(self.m):
                entry = self.rows[r][entering]
                if entry > 0:
                    key = (self.rows[r][-1] / entry, self.basis[r])
                    if best is None or key < best:
                        best = key
                        leaving = r
            if leaving is None:
                return entering
            self.pivot(leaving, entering)

    def values(self) -> List[Fraction]:
        values = [Fraction(0)] * self.width
        for r, b in enumerate(self.basis):
            values[b] = self.rows[r][-1]
        return values

    def duals(self) -> List[Fraction]:
        # y = c_B B^-1, read off the artificial columns, mapped back to the unsigned rows
        return [
            self.signs[i] * (self.costs[self.artificial_start + i] - self.reduced[self.artificial_start + i])
            for i in range(self.m)
        ]

    def drive_out_artificials(self) -> int:
        """
        Pivot zero-level artificials out of the basis. Rows where that is impossible are redundant; they keep their
        artificial, which can never move again.
        """
        redundant = 0
        for r in range(self.m):
            if self.basis[r] >= self.artificial_start:
                column = next((j for j in range(self.artificial_start) if self.rows[r][j]), None)
                if column is None:
                    redundant += 1
                else:
                    self.pivot(r, column)
        return redundant


def _solve_exact(lp: LinearProgram) -> LpSolution:
    tableau = _Tableau(lp)
    n = len(lp.variables)

    phase_one = [Fraction(0)] * tableau.artificial_start + [Fraction(-1)] * tableau.m
    tableau.set_costs(phase_one)
    tableau.optimise(allow_artificial=True)
    if tableau.reduced[-1] != 0:
        farkas = [-y for y in tableau.duals()]
        raise LpInfeasibleError(
            f"no feasible point, artificial mass {format_rational(tableau.reduced[-1])} remains",
            [format_rational(y) for y in farkas],
        )
    redundant = tableau.drive_out_artificials()

    phase_two = [lp.objective.get(j, Fraction(0)) for j in range(n)] + [Fraction(0)] * (tableau.width - n)
    tableau.set_costs(phase_two)
    ray_column = tableau.optimise(allow_artificial=False)
    if ray_column is not None:
        ray = {ray_column: Fraction(1)}
        for r, b in enumerate(tableau.basis):
            if tableau.rows[r][ray_column]:
                ray[b] = -tableau.rows[r][ray_column]
        raise LpUnboundedError(
            "the objective is unbounded",
            {lp.variables[j]: format_rational(v) for j, v in sorted(ray.items()) if j < n},
        )

    primal = tuple(tableau.values()[:n])
    logging.debug(f"_solve_exact: {tableau.pivots} pivots, {redundant} redundant rows.")
    return LpSolution(-tableau.reduced[-1], primal, tuple(tableau.duals()), LpMethod.EXACT, tableau.pivots)


######################################## CERTIFIED SOLVER ########################################


def _sparse_rows(lp: LinearProgram, rows: Sequence[int], negate: Sequence[bool]) -> sparse.csr_matrix:
    data: List[float] = []
    row_index: List[int] = []
    col_index: List[int] = []
    for position, (i, flip) in enumerate(zip(rows, negate)):
        for j, c in lp.constraints[i].coefficients.items():
            data.append(-float(c) if flip else float(c))
            row_index.append(position)
            col_index.append(j)
    return sparse.csr_matrix((data, (row_index, col_index)), shape=(len(rows), len(lp.variables)))


def _solve_linear_system(
    equations: Sequence[Tuple[Mapping[int, Fraction], Fraction]],
) -> Optional[Dict[int, Fraction]]:
    """
    Rational elimination on sparse rows. Unknowns left free are set to zero; None when the rows are inconsistent.
    """
    pivot_rows: Dict[int, Tuple[Dict[int, Fraction], Fraction]] = {}
    order: List[int] = []
    for coefficients, rhs in equations:
        row = {j: c for j, c in coefficients.items() if c}
        # a pivot row holds no earlier pivot, so one pass in creation order reduces fully
        for p in order:
            factor = row.pop(p, None)
            if factor is None:
                continue
            pivot_row, pivot_rhs = pivot_rows[p]
            for j, c in pivot_row.items():
                if j == p:
                    continue
                updated = row.get(j, Fraction(0)) - factor * c
                if updated:
                    row[j] = updated
                else:
                    row.pop(j, None)
            rhs -= factor * pivot_rhs
        if not row:
            if rhs:
                return None
            continue
        pivot = min(row)
        scale = row[pivot]
        pivot_rows[pivot] = ({j: c / scale for j, c in row.items()}, rhs / scale)
        order.append(pivot)

    values: Dict[int, Fraction] = {}
    for p in reversed(order):
        pivot_row, pivot_rhs = pivot_rows[p]
        known = sum((c * values.get(j, Fraction(0)) for j, c in pivot_row.items() if j != p), Fraction(0))
        values[p] = pivot_rhs - known
    return values


def _crossover(
    lp: LinearProgram, primal_values: np.ndarray, multipliers: np.ndarray, tolerance: float
) -> Optional[LpSolution]:
    """
    Rebuild the vertex HiGHS stopped at in exact arithmetic. The primal solves the active rows on the columns HiGHS
    left positive, the dual solves the columns with zero reduced cost on the rows with a nonzero multiplier.
    """
    m, n = lp.shape
    support = {j for j in range(n) if primal_values[j] > tolerance}
    primal_rows = []
    for constraint in lp.constraints:
        residual = sum(float(c) * primal_values[j] for j, c in constraint.coefficients.items()) - float(constraint.rhs)
        if constraint.sense == EQ or abs(residual) <= tolerance:
            primal_rows.append(({j: c for j, c in constraint.coefficients.items() if j in support}, constraint.rhs))
    solved = _solve_linear_system(primal_rows)
    if solved is None:
        return None
    primal = tuple(solved.get(j, Fraction(0)) for j in range(n))

    active = [i for i in range(m) if abs(multipliers[i]) > tolerance]
    columns: List[Dict[int, Fraction]] = [{} for _ in range(n)]
    for i in active:
        for j, c in lp.constraints[i].coefficients.items():
            columns[j][i] = c
    dual_rows = []
    for j in range(n):
        reduced = sum(float(c) * multipliers[i] for i, c in columns[j].items()) - float(lp.objective.get(j, 0))
        if abs(reduced) <= tolerance:
            dual_rows.append((columns[j], lp.objective.get(j, Fraction(0))))
    solved = _solve_linear_system(dual_rows)
    if solved is None:
        return None
    dual = tuple(solved.get(i, Fraction(0)) for i in range(m))

    solution = LpSolution(_row_value(lp.objective, primal), primal, dual, LpMethod.CERTIFIED)
    return solution if verify_certificate(lp, solution) else None


def _solve_certified(lp: LinearProgram) -> LpSolution:
    """
    Locate an optimal vertex with HiGHS, then recover its primal and dual exactly from the active sets and check
    them. Raises CertificateError when no tolerance yields an exact certificate.
    """
    equalities = [i for i, c in enumerate(lp.constraints) if c.sense == EQ]
    inequalities = [i for i, c in enumerate(lp.constraints) if c.sense != EQ]
    flips = [lp.constraints[i].sense == GE for i in inequalities]
    n = len(lp.variables)

    cost = np.zeros(n)
    for j, c in lp.objective.items():
        cost[j] = -float(c)
    arguments: Dict[str, Any] = {"bounds": (0, None), "method": "highs-ds"}
    if equalities:
        arguments["A_eq"] = _sparse_rows(lp, equalities, [False] * len(equalities))
        arguments["b_eq"] = np.array([float(lp.constraints[i].rhs) for i in equalities])
    if inequalities:
        arguments["A_ub"] = _sparse_rows(lp, inequalities, flips)
        bounds = [float(lp.constraints[i].rhs) for i in inequalities]
        arguments["b_ub"] = np.array([-b if flip else b for b, flip in zip(bounds, flips)])
    result = linprog(cost, **arguments)
    if result.status == 2:
        raise LpInfeasibleError(f"HiGHS reports infeasible: {result.message}")
    if result.status == 3:
        raise LpUnboundedError(f"HiGHS reports unbounded: {result.message}")
    if result.status != 0:
        raise CertificateError(f"HiGHS stopped without an optimum: {result.message}")

    # marginals are sensitivities of the minimised -objective, so the duals of the maximisation are their negation
    multipliers = np.zeros(len(lp.constraints))
    if equalities:
        multipliers[equalities] = -np.asarray(result.eqlin.marginals)
    if inequalities:
        signs = np.array([-1.0 if flip else 1.0 for flip in flips])
        multipliers[inequalities] = -np.asarray(result.ineqlin.marginals) * signs
    primal_values = np.clip(result.x, 0, None)

    for tolerance in _CROSSOVER_TOLERANCES:
        solution = _crossover(lp, primal_values, multipliers, tolerance)
        if solution is not None:
            return solution
        logging.debug(f"_solve_certified: no exact certificate at tolerance {tolerance}.")
    raise CertificateError(
        f"the HiGHS vertex with objective {-result.fun:.9g} has no exact active-set certificate"
    )


######################################## SOLVE ########################################


def simplex_solve(
    lp: LinearProgram, method: LpMethodType = LpMethod.AUTO, budget: Optional[BudgetConfigData] = None
) -> LpSolution:
    """
    Solve an LP exactly. `auto` uses the dense rational tableau while rows * columns fit the budget and the
    certified HiGHS route beyond it; either way the result carries a verified dual bound.
    """
    budget = budget or library.BUDGET_CONFIG
    m, n = lp.shape
    cells = m * (n + 2 * m + 1)
    if method == LpMethod.AUTO:
        method = LpMethod.EXACT if cells <= budget.max_exact_tableau_cells else LpMethod.CERTIFIED
    if method == LpMethod.EXACT:
        solution = _solve_exact(lp)
    elif method == LpMethod.CERTIFIED:
        solution = _solve_certified(lp)
    else:
        raise UsageError(f"unknown LP method '{method}'", "method")
    logging.info(f"simplex_solve: optimum {format_rational(solution.optimum)} by {solution.method} on {m}x{n}.")
    return solution


def _strategy_from_primal(
    g: Game, questions: List[Tuple[str, ...]], answers: List[Tuple[str, ...]], primal: Sequence[Fraction]
) -> NsStrategy:
    width = len(answers)
    table = {}
    for xi, x in enumerate(questions):
        row = {answers[ai]: primal[xi * width + ai] for ai in range(width) if primal[xi * width + ai]}
        table[x] = row
    return NsStrategy(g.questions, g.answers, table)


def ns_value(
    g: Game,
    subsets: SubsetModeType = SubsetMode.COMPLEMENTARY,
    method: LpMethodType = LpMethod.AUTO,
    budget: Optional[BudgetConfigData] = None,
) -> Tuple[Fraction, NsStrategy]:
    """
    Exact non-signaling value of g with an optimal box as witness.
    """
    lp, questions, answers = build_ns_lp(g, subsets, budget)
    solution = simplex_solve(lp, method, budget)
    strategy = _strategy_from_primal(g, questions, answers, solution.primal)
    if not is_non_signaling(strategy, subsets):
        raise CertificateError("the optimal box violates a non-signaling equality")
    return solution.optimum, strategy


def is_non_signaling(p: NsStrategy, subsets: SubsetModeType = SubsetMode.ALL) -> bool:
    """
    Exact check that every p(.|x) is a distribution and that each subset's answer marginal depends only on its own
    questions.
    """
    questions = list(itertools.product(*p.questions))
    for x in questions:
        row = p.table.get(x, {})
        if any(weight < 0 for weight in row.values()) or sum(row.values(), Fraction(0)) != 1:
            return False
    for players in player_subsets(len(p.questions), subsets):
        for members in _grouped(questions, players).values():
            reference = p.marginal(questions[members[0]], players)
            if any(p.marginal(questions[other], players) != reference for other in members[1:]):
                return False
    return True
