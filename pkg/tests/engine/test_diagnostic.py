import itertools
import math
from fractions import Fraction

import pytest  # type: ignore

from scripts.engine.core import diagnostic, game, zoo
from scripts.engine.core.utility import create_rng
from scripts.engine.internal.definition import BudgetConfigData
from scripts.engine.internal.error import BudgetExceededError, ZeroProbabilityError

FAIR_BIT = {"0": Fraction(1, 2), "1": Fraction(1, 2)}


############################ KL ############################


test_kl_divergence_parameters = [
    ({"0": Fraction(1)}, FAIR_BIT, 1.0),
    (FAIR_BIT, FAIR_BIT, 0.0),
    (FAIR_BIT, {"0": Fraction(1)}, math.inf),
]


@pytest.mark.parametrize(["p", "q", "expected"], test_kl_divergence_parameters)
def test_kl_divergence(p, q, expected: float):
    assert diagnostic.kl_divergence(p, q) == pytest.approx(expected)


############################ PINSKER ############################


test_pinsker_check_parameters = [
    (1, {("0",)}, Fraction(1), 1.1774),  # one fair bit pinned
    (4, lambda atom: atom[0] == "0", Fraction(1, 4), 0.5887),  # first of four bits pinned
]


@pytest.mark.parametrize(["n", "w", "average", "bound"], test_pinsker_check_parameters)
def test_pinsker_check(benchmark, n: int, w, average: Fraction, bound: float):
    report = benchmark(diagnostic.pinsker_check, [FAIR_BIT] * n, w)
    assert report.average == average
    assert report.bound == pytest.approx(bound, abs=1e-4)
    assert report.passed
    assert report.context["event_probability"] == "1/2"


def test_pinsker_check_certain_event():
    report = diagnostic.pinsker_check([FAIR_BIT] * 2, lambda atom: True)
    assert report.bound == 0
    assert report.average == 0
    assert report.passed


def test_pinsker_check_random_pairs():
    for trial in range(1000):
        rng = create_rng(2024, trial)
        n = int(rng.integers(1, 6))
        size = int(rng.integers(2, 4))
        factors = []
        for _ in range(n):
            weights = [int(w) for w in rng.integers(1, 8, size=size)]
            factors.append({str(v): Fraction(w, sum(weights)) for v, w in enumerate(weights)})
        atoms = list(itertools.product([str(v) for v in range(size)], repeat=n))
        chosen = [atom for atom, keep in zip(atoms, rng.random(len(atoms)) < 0.4) if keep] or atoms[:1]
        report = diagnostic.pinsker_check(factors, chosen)
        assert report.passed, (trial, report.to_record())
        assert report.context["relative_entropy_sum"] <= report.context["log2_inverse_probability"] + 1e-9


def test_pinsker_check_refuses():
    with pytest.raises(ZeroProbabilityError):
        diagnostic.pinsker_check([FAIR_BIT], [])
    with pytest.raises(BudgetExceededError):
        diagnostic.pinsker_check([FAIR_BIT] * 4, [("0",) * 4], BudgetConfigData(max_diagnostic_atoms=8))


############################ CONDITIONING ############################


def test_conditioning_l1_check():
    p = {("a",): Fraction(1, 2), ("b",): Fraction(1, 4), ("c",): Fraction(1, 4)}
    q = {("a",): Fraction(1, 4), ("b",): Fraction(1, 4), ("c",): Fraction(1, 2)}
    report = diagnostic.conditioning_l1_check(p, q, [("a",), ("b",)])
    # P given W is (2/3, 1/3), Q given W is (1/2, 1/2)
    assert report.average == Fraction(1, 3)
    assert report.context["bound_exact"] == "2/1"
    assert report.passed


def test_conditioning_l1_check_zero_event():
    p = {("a",): Fraction(1)}
    q = {("b",): Fraction(1)}
    with pytest.raises(ZeroProbabilityError):
        diagnostic.conditioning_l1_check(p, q, [("a",)])


############################ EMBEDDING ############################


def test_l1_embedding_diagnostic():
    g = zoo.anti_correlation()
    pinned = [q for q in game.tensor_power(g, 2).questions[0] if q.startswith("1,")]
    event = game.create_product_event(g, 2, [pinned, None, None])
    report = diagnostic.l1_embedding_diagnostic(g, 2, event)

    assert report.per_coordinate == (Fraction(2, 3), Fraction(0))
    assert report.average == Fraction(1, 3)
    assert report.passed
    record = report.to_record()
    assert record["context"]["event_probability"] == "2/3"
    assert record["context"]["joint_per_coordinate"] == ["2/3", "0/1"]
    assert record["context"]["player_averages"] == ["1/3", "0/1", "0/1"]


def test_l1_embedding_diagnostic_full_event():
    g = zoo.anti_correlation()
    event = game.create_product_event(g, 2, [None, None, None])
    report = diagnostic.l1_embedding_diagnostic(g, 2, event)
    assert report.per_coordinate == (Fraction(0), Fraction(0))
    assert report.context["log2_inverse_probability"] == 0.0
