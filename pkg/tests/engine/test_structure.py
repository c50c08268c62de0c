import itertools
from collections import Counter
from fractions import Fraction
from typing import Iterable, Tuple

import pytest  # type: ignore
from hypothesis import given, settings  # type: ignore
from hypothesis import strategies as st  # type: ignore

from scripts.engine.core import game, structure, zoo
from scripts.engine.internal.constant import BINARY, Connectivity, GameClassTag, HW1Case
from scripts.engine.internal.error import UnsupportedGameError

CUBE = list(itertools.product((0, 1), repeat=3))


def _support_game(points: Iterable[Tuple[int, ...]]) -> game.Game:
    points = sorted(points)
    distribution = {tuple(str(bit) for bit in p): Fraction(1, len(points)) for p in points}
    return game.create_game([BINARY] * 3, [BINARY] * 3, distribution, {})


def _all_supports():
    for size in range(1, 9):
        for points in itertools.combinations(CUBE, size):
            yield frozenset(points)


############################ GRAPHS ############################


test_classify_connectivity_parameters = [
    (zoo.anti_correlation, Connectivity.NOT_PLAYERWISE),
    (zoo.ghz_game, Connectivity.NOT_PLAYERWISE),
    (zoo.four_point_and_game, Connectivity.NOT_PLAYERWISE),
    (zoo.five_point_example, Connectivity.PLAYERWISE_ONLY),
    (lambda: _support_game([(0, 0, 0), (0, 0, 1), (0, 1, 1)]), Connectivity.CONNECTED),
]


@pytest.mark.parametrize(["constructor", "expected"], test_classify_connectivity_parameters)
def test_classify_connectivity(benchmark, constructor, expected):
    assert benchmark(structure.classify_connectivity, constructor()) == expected


def test_connection_graph_components():
    graph = structure.connection_graph(zoo.five_point_example())
    assert not graph.is_connected
    assert graph.components[-1] == (("1", "1", "1"),)
    assert len(graph.components[0]) == 4
    assert (("0", "0", "0"), ("0", "0", "1")) in graph.edges


def test_playerwise_graphs_vertices_are_asked_questions():
    g = _support_game([(0, 0, 0), (0, 1, 0)])
    graphs = structure.playerwise_graphs(g)
    assert graphs[0].vertices == ("0",)
    assert graphs[1].edges == (("0", "1"),)
    assert all(graph.is_connected for graph in graphs)


############################ SYMMETRY ############################


def test_all_symmetries():
    symmetries = structure.all_symmetries()
    assert len(symmetries) == 48
    assert symmetries[0].permutation == (0, 1, 2) and symmetries[0].flips == (0, 0, 0)
    images = {structure.apply_symmetry(structure.FIVE_POINT_SUPPORT, s) for s in symmetries}
    assert len(images) == 8


test_canonicalize_support_parameters = [
    structure.HW1_SUPPORT,
    structure.GHZ_SUPPORT,
    structure.FOUR_POINT_AND_SUPPORT,
    structure.FIVE_POINT_SUPPORT,
    frozenset({(0, 1, 1)}),
]


@pytest.mark.parametrize("points", test_canonicalize_support_parameters)
def test_canonicalize_support(points):
    canonical, symmetry = structure.canonicalize_support(points)
    assert structure.apply_symmetry(points, symmetry) == canonical
    for other in structure.all_symmetries():
        assert structure.canonicalize_support(structure.apply_symmetry(points, other))[0] == canonical


test_reducing_pair_parameters = [
    ({(0, 0, 0), (1, 1, 0)}, (0, 1)),
    ({(0, 0, 0), (1, 0, 1)}, (0, 2)),
    ({(0, 0, 0), (1, 1, 1)}, (0, 1)),
    (structure.HW1_SUPPORT, None),
    (structure.FIVE_POINT_SUPPORT, None),
]


@pytest.mark.parametrize(["points", "expected"], test_reducing_pair_parameters)
def test_reducing_pair(points, expected):
    assert structure.reducing_pair(points) == expected


############################ CLASSIFICATION ############################


test_classify_binary3_parameters = [
    (zoo.anti_correlation, GameClassTag.HAMMING_WEIGHT_ONE),
    (zoo.ghz_game, GameClassTag.GHZ_SUPPORT),
    (zoo.four_point_and_game, GameClassTag.FOUR_POINT_AND),
    (zoo.five_point_example, GameClassTag.FIVE_POINT),
    (lambda: _support_game([(0, 0, 0), (1, 1, 0)]), GameClassTag.TWO_PLAYER_REDUCIBLE),
    (lambda: _support_game(CUBE), GameClassTag.CONNECTED),
]


@pytest.mark.parametrize(["constructor", "expected"], test_classify_binary3_parameters)
def test_classify_binary3(constructor, expected):
    result = structure.classify_binary3(constructor())
    assert result.tag == expected
    assert set(result.to_record()) == {"tag", "witness"}


def test_classify_binary3_connected_witness():
    points = [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)]
    record = structure.classify_binary3(_support_game(points)).to_record()
    assert record == {"tag": GameClassTag.CONNECTED, "witness": {"component": [list(p) for p in points]}}


def test_classify_binary3_refuses_non_binary():
    with pytest.raises(UnsupportedGameError):
        structure.classify_binary3(game.tensor_power(zoo.anti_correlation(), 2))


def test_classify_every_support():
    tags = Counter()
    playerwise_only = set()
    for points in _all_supports():
        g = _support_game(points)
        result = structure.classify_binary3(g)
        tags[result.tag] += 1
        assert result.to_record()["witness"] is not None
        if structure.classify_connectivity(g) == Connectivity.PLAYERWISE_ONLY:
            playerwise_only.add(points)

    assert sum(tags.values()) == 255
    assert tags[GameClassTag.HAMMING_WEIGHT_ONE] == 8
    assert tags[GameClassTag.GHZ_SUPPORT] == 2
    assert tags[GameClassTag.FOUR_POINT_AND] == 24
    assert tags[GameClassTag.FIVE_POINT] == 8
    five_point_orbit = {structure.apply_symmetry(structure.FIVE_POINT_SUPPORT, s) for s in structure.all_symmetries()}
    assert playerwise_only == five_point_orbit


def test_classification_invariant_under_symmetry():
    for points in [structure.FOUR_POINT_AND_SUPPORT, structure.FIVE_POINT_SUPPORT, frozenset(CUBE[:3])]:
        base = _support_game(points)
        tag = structure.classify_binary3(base).tag
        connectivity = structure.classify_connectivity(base)
        for symmetry in structure.all_symmetries():
            image = _support_game(structure.apply_symmetry(points, symmetry))
            assert structure.classify_binary3(image).tag == tag
            assert structure.classify_connectivity(image) == connectivity


@settings(max_examples=100, deadline=None)
@given(st.sets(st.sampled_from(CUBE), min_size=1), st.integers(0, 47))
def test_classification_invariant_under_any_symmetry(points, index):
    symmetry = structure.all_symmetries()[index]
    image = structure.apply_symmetry(points, symmetry)
    assert structure.classify_binary3(_support_game(image)).tag == structure.classify_binary3(_support_game(points)).tag
    assert structure.canonicalize_support(image)[0] == structure.canonicalize_support(points)[0]


############################ HW1 ############################


def test_hw1_anti_correlation_case():
    result = structure.hw1_binary_case(zoo.flip_presentation(zoo.anti_correlation()))
    assert result.case == HW1Case.ANTI_CORRELATION
    assert result.flips == (0, 0, 0)


def test_hw1_zero_line_case():
    # on (1,0,0) players 2 and 3 must both answer 1, on (0,1,0) players 1 and 3 must both answer 0
    distribution = {x: Fraction(1, 3) for x in [("0", "0", "1"), ("0", "1", "0"), ("1", "0", "0")]}
    win = {}
    for a in itertools.product(BINARY, repeat=3):
        win[(("0", "0", "1"), a)] = Fraction(1)
        if a[1] == "1" and a[2] == "1":
            win[(("1", "0", "0"), a)] = Fraction(1)
        if a[0] == "0" and a[2] == "0":
            win[(("0", "1", "0"), a)] = Fraction(1)
    g = game.create_game([BINARY] * 3, [BINARY] * 3, distribution, win)
    assert game.game_value(g)[0] == Fraction(2, 3)

    result = structure.hw1_binary_case(g)
    assert result.case == HW1Case.ZERO_LINE
    assert (result.table_player, result.line_player, result.line_answer) == (0, 1, 0)
    assert result.to_record()["case"] == HW1Case.ZERO_LINE


def test_hw1_flip_player_three_case():
    # V1 = [b = c], V2 = [a = c], V3 = [a != b]; flipping player 3's answer turns all three into inequality
    distribution = {x: Fraction(1, 3) for x in [("0", "0", "1"), ("0", "1", "0"), ("1", "0", "0")]}
    win = {}
    for a in itertools.product(BINARY, repeat=3):
        if a[1] == a[2]:
            win[(("1", "0", "0"), a)] = Fraction(1)
        if a[0] == a[2]:
            win[(("0", "1", "0"), a)] = Fraction(1)
        if a[0] != a[1]:
            win[(("0", "0", "1"), a)] = Fraction(1)
    g = game.create_game([BINARY] * 3, [BINARY] * 3, distribution, win)
    assert game.game_value(g)[0] == Fraction(2, 3)

    result = structure.hw1_binary_case(g)
    assert result.case == HW1Case.ANTI_CORRELATION
    assert result.flips == (0, 0, 1)


test_hw1_binary_case_refuses_parameters = [
    lambda: zoo.hw1_canonical(1),  # player 3 has a single answer
    zoo.ghz_game,  # wrong support
]


@pytest.mark.parametrize("constructor", test_hw1_binary_case_refuses_parameters)
def test_hw1_binary_case_refuses(constructor):
    with pytest.raises(UnsupportedGameError):
        structure.hw1_binary_case(constructor())


def test_hw1_binary_case_refuses_value_one():
    distribution = {x: Fraction(1, 3) for x in [("0", "0", "1"), ("0", "1", "0"), ("1", "0", "0")]}
    win = {(x, a): Fraction(1) for x in distribution for a in itertools.product(BINARY, repeat=3)}
    with pytest.raises(UnsupportedGameError):
        structure.hw1_binary_case(game.create_game([BINARY] * 3, [BINARY] * 3, distribution, win))
