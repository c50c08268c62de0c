from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from scripts.engine.core.game import game_value, normalize_determined
from scripts.engine.internal.constant import BINARY, Connectivity, GameClassTag, HW1Case
from scripts.engine.internal.error import InvalidGameError, UnreachableBranchError, UnsupportedGameError

if TYPE_CHECKING:
    from typing import Any, Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

    from scripts.engine.core.game import Game
    from scripts.engine.internal.constant import ConnectivityType, GameClassTagType, HW1CaseType

    Point = Tuple[int, int, int]

__all__ = [
    "SupportGraph",
    "PlayerGraph",
    "CubeSymmetry",
    "GameClass",
    "Hw1Classification",
    "connection_graph",
    "playerwise_graphs",
    "classify_connectivity",
    "all_symmetries",
    "apply_symmetry",
    "canonicalize_support",
    "reducing_pair",
    "binary_support",
    "classify_binary3",
    "hw1_binary_case",
    "HW1_SUPPORT",
    "GHZ_SUPPORT",
    "FOUR_POINT_AND_SUPPORT",
    "FIVE_POINT_SUPPORT",
]


#################### TYPES ##############################


@dataclass(frozen=True)
class SupportGraph:
    """
    Support points joined when they differ in exactly one player's question. Components are sorted and ordered by
    their smallest vertex.
    """

    vertices: Tuple[Tuple[str, ...], ...]
    edges: Tuple[Tuple[Tuple[str, ...], Tuple[str, ...]], ...]
    components: Tuple[Tuple[Tuple[str, ...], ...], ...]

    @property
    def is_connected(self) -> bool:
        return len(self.components) == 1


@dataclass(frozen=True)
class PlayerGraph:
    """
    Questions of one player joined when they share a complementary question tuple on the support. The vertices are
    the questions that occur with positive probability.
    """

    player: int
    vertices: Tuple[str, ...]
    edges: Tuple[Tuple[str, str], ...]
    components: Tuple[Tuple[str, ...], ...]

    @property
    def is_connected(self) -> bool:
        return len(self.components) == 1


@dataclass(frozen=True)
class CubeSymmetry:
    """
    Point p maps to q with q[j] = p[permutation[j]] ^ flips[j].
    """

    permutation: Tuple[int, int, int]
    flips: Tuple[int, int, int]

    def to_record(self) -> Dict[str, Any]:
        return {"permutation": list(self.permutation), "flips": list(self.flips)}


@dataclass(frozen=True)
class GameClass:
    tag: GameClassTagType
    symmetry: Optional[CubeSymmetry] = None
    pair: Optional[Tuple[int, int]] = None
    component: Optional[Tuple[Point, ...]] = None  # connected supports: every point, in one component

    def to_record(self) -> Dict[str, Any]:
        witness: Optional[Dict[str, Any]] = None
        if self.symmetry is not None:
            witness = self.symmetry.to_record()
        elif self.pair is not None:
            witness = {"pair": list(self.pair)}
        elif self.component is not None:
            witness = {"component": [list(p) for p in self.component]}
        return {"tag": self.tag, "witness": witness}


@dataclass(frozen=True)
class Hw1Classification:
    """
    Outcome of the binary HW1 case split. Case1 names the table (by the player whose question picks it), the player
    whose fixed answer gives an all zero line and that answer; permutation and flips move the zero line to row a = 1
    of the table of the last player. Case2 gives the answer flips that turn every table into inequality.
    """

    case: HW1CaseType
    permutation: Tuple[int, int, int]
    flips: Tuple[int, int, int]
    table_player: Optional[int] = None
    line_player: Optional[int] = None
    line_answer: Optional[int] = None

    def to_record(self) -> Dict[str, Any]:
        return {
            "case": self.case,
            "permutation": list(self.permutation),
            "flips": list(self.flips),
            "table_player": self.table_player,
            "line_player": self.line_player,
            "line_answer": self.line_answer,
        }


#################### GRAPHS ##############################


def _components(vertices: Sequence[Hashable], edges: Iterable[Tuple[Hashable, Hashable]]) -> Tuple[Tuple, ...]:
    """
    Connected components, each sorted, ordered by smallest vertex.
    """
    if not vertices:
        return ()
    index = {vertex: i for i, vertex in enumerate(vertices)}
    rows = []
    columns = []
    for u, v in edges:
        rows.append(index[u])
        columns.append(index[v])
    size = len(vertices)
    adjacency = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, columns)), shape=(size, size)).tocsr()
    _, labels = connected_components(adjacency, directed=False)

    groups: Dict[int, List[Hashable]] = {}
    for vertex, label in zip(vertices, labels):
        groups.setdefault(int(label), []).append(vertex)
    return tuple(sorted(tuple(sorted(group)) for group in groups.values()))


def _complement(x: Tuple[str, ...], j: int) -> Tuple[str, ...]:
    return x[:j] + x[j + 1 :]


def connection_graph(g: Game) -> SupportGraph:
    vertices = g.support
    edges = set()
    for j in range(g.players):
        groups: Dict[Tuple[str, ...], List[Tuple[str, ...]]] = {}
        for x in vertices:
            groups.setdefault(_complement(x, j), []).append(x)
        for members in groups.values():
            for u, v in itertools.combinations(sorted(members), 2):
                edges.add((u, v))
    ordered_edges = tuple(sorted(edges))
    return SupportGraph(vertices, ordered_edges, _components(vertices, ordered_edges))


def playerwise_graphs(g: Game) -> Tuple[PlayerGraph, ...]:
    graphs = []
    for j in range(g.players):
        vertices = tuple(sorted({x[j] for x in g.distribution}))
        groups: Dict[Tuple[str, ...], set] = {}
        for x in g.distribution:
            groups.setdefault(_complement(x, j), set()).add(x[j])
        edges = set()
        for members in groups.values():
            for u, v in itertools.combinations(sorted(members), 2):
                edges.add((u, v))
        ordered_edges = tuple(sorted(edges))
        graphs.append(PlayerGraph(j, vertices, ordered_edges, _components(vertices, ordered_edges)))
    return tuple(graphs)


def classify_connectivity(g: Game) -> ConnectivityType:
    if connection_graph(g).is_connected:
        return Connectivity.CONNECTED
    if all(graph.is_connected for graph in playerwise_graphs(g)):
        return Connectivity.PLAYERWISE_ONLY
    return Connectivity.NOT_PLAYERWISE


#################### SYMMETRY ##############################


def all_symmetries() -> List[CubeSymmetry]:
    """
    The 48 symmetries of the cube, identity first: player permutations in lexicographic order, each with the flip
    patterns 0..7 (bit j flips player j).
    """
    symmetries = []
    for permutation in itertools.permutations(range(3)):
        for mask in range(8):
            flips = tuple((mask >> j) & 1 for j in range(3))
            symmetries.append(CubeSymmetry(permutation, flips))  # type: ignore
    return symmetries


def apply_symmetry(points: Iterable[Point], symmetry: CubeSymmetry) -> FrozenSet[Point]:
    return frozenset(
        tuple(p[symmetry.permutation[j]] ^ symmetry.flips[j] for j in range(3)) for p in points  # type: ignore
    )


def _sort_key(points: Iterable[Point]) -> Tuple[int, ...]:
    return tuple(sorted(4 * x + 2 * y + z for x, y, z in points))


def canonicalize_support(points: Iterable[Point]) -> Tuple[FrozenSet[Point], CubeSymmetry]:
    """
    Smallest image of a set of cube points under the 48 symmetries, comparing sets as sorted sequences of 3-bit
    integers, and the first symmetry reaching it.
    """
    points = frozenset(points)
    if not points:
        raise InvalidGameError("cannot canonicalise an empty support", "support")

    best_key: Optional[Tuple[int, ...]] = None
    best: Tuple[FrozenSet[Point], CubeSymmetry] = (points, all_symmetries()[0])
    for symmetry in all_symmetries():
        image = apply_symmetry(points, symmetry)
        key = _sort_key(image)
        if best_key is None or key < best_key:
            best_key = key
            best = (image, symmetry)
    return best


HW1_SUPPORT = frozenset({(1, 0, 0), (0, 1, 0), (0, 0, 1)})
GHZ_SUPPORT = frozenset({(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)})
FOUR_POINT_AND_SUPPORT = frozenset({(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 1)})
FIVE_POINT_SUPPORT = frozenset({(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)})

_CANONICAL_TAGS = {
    canonicalize_support(HW1_SUPPORT)[0]: GameClassTag.HAMMING_WEIGHT_ONE,
    canonicalize_support(GHZ_SUPPORT)[0]: GameClassTag.GHZ_SUPPORT,
    canonicalize_support(FOUR_POINT_AND_SUPPORT)[0]: GameClassTag.FOUR_POINT_AND,
    canonicalize_support(FIVE_POINT_SUPPORT)[0]: GameClassTag.FIVE_POINT,
}


#################### CLASSIFICATION ##############################


def binary_support(g: Game) -> FrozenSet[Point]:
    """
    The support of a 3-player game with binary questions as integer points.
    """
    if g.players != 3:
        raise UnsupportedGameError(f"needs 3 players, got {g.players}", "players")
    for j, alphabet in enumerate(g.questions):
        if not set(alphabet) <= set(BINARY):
            raise UnsupportedGameError("questions must be binary ('0'/'1')", f"questions[{j}]")
    return frozenset(tuple(int(symbol) for symbol in x) for x in g.distribution)  # type: ignore


def reducing_pair(points: Iterable[Point]) -> Optional[Tuple[int, int]]:
    """
    First player pair whose questions determine each other on the support.
    """
    points = list(points)
    for first, second in itertools.combinations(range(3), 2):
        forward: Dict[int, int] = {}
        backward: Dict[int, int] = {}
        bijective = True
        for p in points:
            if forward.setdefault(p[first], p[second]) != p[second] or backward.setdefault(p[second], p[first]) != p[first]:
                bijective = False
                break
        if bijective:
            return first, second
    return None


def _classify_points(points: FrozenSet[Point], connected: bool) -> GameClass:
    pair = reducing_pair(points)
    if pair is not None:
        return GameClass(GameClassTag.TWO_PLAYER_REDUCIBLE, pair=pair)
    if connected:
        return GameClass(GameClassTag.CONNECTED, component=tuple(sorted(points)))

    canonical, symmetry = canonicalize_support(points)
    tag = _CANONICAL_TAGS.get(canonical)
    if tag is None:
        logging.error(f"classify_binary3: support {sorted(points)} fell through every case.")
        raise UnreachableBranchError(f"support {sorted(points)} matches no case of the classification", "support")
    return GameClass(tag, symmetry=symmetry)


def classify_binary3(g: Game) -> GameClass:
    """
    Classify a 3-player binary-question game by its support: two-player reducible, connected, or one of the four
    disconnected shapes (HW1, GHZ, four-point AND, five-point).
    """
    points = binary_support(g)
    result = _classify_points(points, connection_graph(g).is_connected)
    logging.info(f"classify_binary3: {sorted(points)} -> {result.tag}.")
    return result


#################### HW1 ##############################


def _special_players(points: FrozenSet[Point]) -> Dict[int, Point]:
    """
    For an HW1-shaped support, the point at which each player's question is the odd one out.
    """
    special: Dict[int, Point] = {}
    for p in points:
        for j in range(3):
            if sum(1 for other in points if other[j] == p[j]) == 1:
                special[j] = p
    return special


def hw1_binary_case(g: Game) -> Hw1Classification:
    """
    Split a binary-answer game on an HW1-shaped support into the all-zero-line case and the anti-correlation case.
    """
    points = binary_support(g)
    canonical, _ = canonicalize_support(points)
    if _CANONICAL_TAGS.get(canonical) != GameClassTag.HAMMING_WEIGHT_ONE:
        raise UnsupportedGameError("support is not of Hamming weight one shape", "support")
    for j, alphabet in enumerate(g.answers):
        if len(alphabet) != 2:
            raise UnsupportedGameError("answers must be binary", f"answers[{j}]")
    if not g.is_deterministic:
        raise UnsupportedGameError("predicate must be 0/1 valued", "win")
    value, _ = game_value(g)
    if value == 1:
        raise UnsupportedGameError("the game has value 1", "win")

    normalised = normalize_determined(g)
    special = _special_players(points)

    # tables[j][u][v]: win at player j's point with the other two players answering u, v (indices into alphabets)
    tables: Dict[int, List[List[int]]] = {}
    for j in range(3):
        x = tuple(str(bit) for bit in special[j])
        others = [i for i in range(3) if i != j]
        table = [[0, 0], [0, 0]]
        for a, weight in normalised.wins_at(x).items():
            u = normalised.answers[others[0]].index(a[others[0]])
            v = normalised.answers[others[1]].index(a[others[1]])
            table[u][v] = max(table[u][v], int(weight))
        tables[j] = table

    for j in range(3):
        others = [i for i in range(3) if i != j]
        table = tables[j]
        for position, line_player in enumerate(others):
            for answer in range(2):
                line = table[answer] if position == 0 else [table[0][answer], table[1][answer]]
                if not any(line):
                    remaining = [i for i in others if i != line_player][0]
                    flips = [0, 0, 0]
                    flips[line_player] = 1 if answer == 0 else 0
                    result = Hw1Classification(
                        HW1Case.ZERO_LINE,
                        (line_player, remaining, j),
                        tuple(flips),  # type: ignore
                        table_player=j,
                        line_player=line_player,
                        line_answer=answer,
                    )
                    logging.info(f"hw1_binary_case: zero line in table {j}, player {line_player} answer {answer}.")
                    return result

    for mask in sorted(range(8), key=lambda m: (bin(m).count("1"), m)):
        flips = tuple((mask >> i) & 1 for i in range(3))
        if all(_is_inequality(tables[j], [flips[i] for i in range(3) if i != j]) for j in range(3)):
            logging.info(f"hw1_binary_case: anti-correlation after flips {flips}.")
            return Hw1Classification(HW1Case.ANTI_CORRELATION, (0, 1, 2), flips)  # type: ignore

    logging.error(f"hw1_binary_case: no zero line and no relabelling to inequality for tables {tables}.")
    raise UnreachableBranchError("tables fit neither case", "win")


def _is_inequality(table: List[List[int]], flips: Sequence[int]) -> bool:
    return all(table[u ^ flips[0]][v ^ flips[1]] == int(u != v) for u in range(2) for v in range(2))
