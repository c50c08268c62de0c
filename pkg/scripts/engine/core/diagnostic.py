from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

from scripts.engine.core.game import event_probability
from scripts.engine.core.sampling import dependency_breaking_atoms
from scripts.engine.core.utility import format_rational, l1_distance, normalise, split_symbol
from scripts.engine.internal import library
from scripts.engine.internal.error import BudgetExceededError, ZeroProbabilityError

if TYPE_CHECKING:
    from typing import Any, Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

    from scripts.engine.core.game import Game, ProductEvent
    from scripts.engine.internal.definition import BudgetConfigData

    Event = Union[Callable[[Tuple], bool], Sequence[Tuple]]

__all__ = ["DiagnosticReport", "kl_divergence", "pinsker_check", "conditioning_l1_check", "l1_embedding_diagnostic"]


@dataclass(frozen=True)
class DiagnosticReport:
    """
    Exact L1 distances per coordinate, their average and, where one applies, the bound they were compared with.
    """

    name: str
    per_coordinate: Tuple[Fraction, ...]
    average: Fraction
    bound: Optional[float]
    passed: bool
    context: Dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "per_coordinate": [format_rational(value) for value in self.per_coordinate],
            "average": format_rational(self.average),
            "bound": self.bound,
            "passed": self.passed,
            "context": self.context,
        }


def _contains(w: Event) -> Callable[[Tuple], bool]:
    if callable(w):
        return w
    members = set(tuple(atom) for atom in w)
    return lambda atom: atom in members


def kl_divergence(p: Mapping[Hashable, Fraction], q: Mapping[Hashable, Fraction]) -> float:
    """
    D(p || q) in bits; infinite when p puts mass where q does not.
    """
    total = 0.0
    for key, weight in p.items():
        if weight == 0:
            continue
        other = q.get(key, Fraction(0))
        if other == 0:
            return math.inf
        total += float(weight) * math.log2(weight / other)
    return total


def pinsker_check(
    product_distribution: Sequence[Mapping[str, Fraction]], w: Event, budget: Optional[BudgetConfigData] = None
) -> DiagnosticReport:
    """
    For a product distribution P_V and an event W, compare the mean over coordinates of ||P_{V_i|W} - P_{V_i}||_1 with
    sqrt((2 ln 2 / n) log2(1 / P(W))). The bound is the chain of super-additivity of relative entropy and Pinsker.
    """
    budget = budget or library.BUDGET_CONFIG
    n = len(product_distribution)
    atoms = 1
    for factor in product_distribution:
        atoms *= len(factor)
    if atoms > budget.max_diagnostic_atoms:
        raise BudgetExceededError(f"{atoms} atoms exceed {budget.max_diagnostic_atoms}", "distribution")

    inside = _contains(w)
    conditioned: List[Dict[str, Fraction]] = [{} for _ in range(n)]
    mass = Fraction(0)
    for combination in itertools.product(*(list(factor.items()) for factor in product_distribution)):
        atom = tuple(value for value, _ in combination)
        if not inside(atom):
            continue
        weight = Fraction(1)
        for _, p in combination:
            weight *= p
        mass += weight
        for i, value in enumerate(atom):
            conditioned[i][value] = conditioned[i].get(value, Fraction(0)) + weight
    if mass == 0:
        raise ZeroProbabilityError("the event has probability zero", "w")

    per_coordinate = []
    relative_entropy = 0.0
    for i in range(n):
        posterior = {value: weight / mass for value, weight in conditioned[i].items()}
        per_coordinate.append(l1_distance(posterior, product_distribution[i]))
        relative_entropy += kl_divergence(posterior, product_distribution[i])
    average = sum(per_coordinate, Fraction(0)) / n

    surprise = 0.0 if mass == 1 else math.log2(1 / mass)
    bound = math.sqrt(2 * math.log(2) / n * surprise)
    passed = average == 0 if mass == 1 else float(average) <= bound + 1e-12
    if not passed:
        logging.warning(f"pinsker_check: average {float(average):.6f} above bound {bound:.6f}.")
    context = {
        "event_probability": format_rational(mass),
        "log2_inverse_probability": surprise,
        "relative_entropy_sum": relative_entropy,
    }
    return DiagnosticReport("pinsker", tuple(per_coordinate), average, bound, passed, context)


def conditioning_l1_check(p: Mapping[Hashable, Fraction], q: Mapping[Hashable, Fraction], w: Event) -> DiagnosticReport:
    """
    Exact check of ||P_{.|W} - Q_{.|W}||_1 <= (2 / Q(W)) ||P - Q||_1.
    """
    inside = _contains(w)
    p_w = {atom: weight for atom, weight in p.items() if inside(atom)}
    q_w = {atom: weight for atom, weight in q.items() if inside(atom)}
    p_mass = sum(p_w.values(), Fraction(0))
    q_mass = sum(q_w.values(), Fraction(0))
    if p_mass == 0 or q_mass == 0:
        raise ZeroProbabilityError("the event has probability zero under one of the distributions", "w")

    distance = l1_distance(normalise(p_w), normalise(q_w))
    limit = 2 * l1_distance(p, q) / q_mass
    context = {"bound_exact": format_rational(limit), "q_event_probability": format_rational(q_mass)}
    return DiagnosticReport("conditioning", (distance,), distance, float(limit), distance <= limit, context)


############################ EMBEDDING ############################


def _average(values: Sequence[Fraction]) -> Fraction:
    return sum(values, Fraction(0)) / len(values)


def _expected_l1(
    atoms: Sequence[Tuple[Tuple, Tuple, Fraction]],
    i: int,
    keep: Callable[[Tuple[Tuple[str, ...], ...]], bool],
    weight_by: Mapping[Tuple, Fraction],
    reference: Mapping[Tuple[str, ...], Fraction],
) -> Fraction:
    """
    E over r_-i ~ weight_by of ||P_{X_i | r_-i, keep} - reference||_1.
    """
    grouped: Dict[Tuple, Dict[Tuple[str, ...], Fraction]] = {}
    for points, r, probability in atoms:
        if keep(points):
            row = grouped.setdefault(r[:i] + r[i + 1 :], {})
            row[points[i]] = row.get(points[i], Fraction(0)) + probability
    total = Fraction(0)
    for rest, weight in weight_by.items():
        if weight and rest in grouped:
            total += weight * l1_distance(normalise(grouped[rest]), reference)
    return total


def l1_embedding_diagnostic(
    g: Game, n: int, e: ProductEvent, budget: Optional[BudgetConfigData] = None
) -> DiagnosticReport:
    """
    Exact distances between the question law of one coordinate and its law after conditioning on a product event.
    `per_coordinate` holds ||P_{X_i|E} - P_{X_i}||_1. The context adds the same average after also conditioning on
    the dependency breaking variable, both on E and on each player's own factor E^j.
    """
    budget = budget or library.BUDGET_CONFIG
    probability = event_probability(g, n, e)
    if probability == 0:
        raise ZeroProbabilityError("the product event has probability zero", "event")
    k = g.players
    atoms = list(dependency_breaking_atoms(g, n, None, budget))
    reference = dict(g.distribution)
    owns = [_own(e, j, n) for j in range(k)]

    def _in_event(points: Tuple[Tuple[str, ...], ...]) -> bool:
        return all(tuple(point[j] for point in points) in owns[j] for j in range(k))

    per_coordinate = []
    joint_form = []
    player_forms: List[List[Fraction]] = [[] for _ in range(k)]
    for i in range(n):
        conditioned: Dict[Tuple[str, ...], Fraction] = {}
        r_given_e: Dict[Tuple, Fraction] = {}
        for points, r, p in atoms:
            if _in_event(points):
                conditioned[points[i]] = conditioned.get(points[i], Fraction(0)) + p
                rest = r[:i] + r[i + 1 :]
                r_given_e[rest] = r_given_e.get(rest, Fraction(0)) + p
        per_coordinate.append(l1_distance(normalise(conditioned), reference))
        r_given_e = normalise(r_given_e)
        joint_form.append(_expected_l1(atoms, i, _in_event, r_given_e, reference))
        for j in range(k):
            player_forms[j].append(
                _expected_l1(
                    atoms, i, lambda points, j=j: tuple(point[j] for point in points) in owns[j], r_given_e, reference
                )
            )

    values = per_coordinate + joint_form + [value for form in player_forms for value in form]
    context = {
        "event_probability": format_rational(probability),
        "inverse_probability": format_rational(1 / probability),
        "log2_inverse_probability": math.log2(1 / probability) if probability != 1 else 0.0,
        "joint_per_coordinate": [format_rational(value) for value in joint_form],
        "joint_average": format_rational(_average(joint_form)),
        "player_averages": [format_rational(_average(form)) for form in player_forms],
    }
    passed = all(0 <= value <= 2 for value in values)
    return DiagnosticReport("embedding", tuple(per_coordinate), _average(per_coordinate), None, passed, context)


def _own(e: ProductEvent, j: int, n: int) -> set:
    """
    Player j's factor of the event as a set of per-coordinate question tuples.
    """
    return {split_symbol(symbol, n) for symbol in e.sets[j]}
