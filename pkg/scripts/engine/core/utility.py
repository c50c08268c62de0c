from __future__ import annotations

import hashlib
import itertools
import logging
import math
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from scripts.engine.internal.constant import SYMBOL_SEPARATOR
from scripts.engine.internal.error import InvalidGameError

if TYPE_CHECKING:
    from typing import Any, Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple, Union

__all__ = [
    "parse_rational",
    "format_rational",
    "join_symbols",
    "split_symbol",
    "product_symbols",
    "create_rng",
    "l1_distance",
    "normalise",
    "marginalise",
    "hoeffding_radius",
    "digest",
    "get_class_members",
]


################################### RATIONALS ########################################


def parse_rational(value: Union[str, int, Fraction], path: str = "") -> Fraction:
    """
    Parse "p/q" or an integer into a Fraction. Floats are refused so no rounding sneaks into a game file.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidGameError(f"expected a rational string 'p/q', got {value!r}", path)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    try:
        numerator, _, denominator = str(value).strip().partition("/")
        if not denominator:
            return Fraction(int(numerator))
        return Fraction(int(numerator), int(denominator))
    except (ValueError, ZeroDivisionError):
        raise InvalidGameError(f"'{value}' is not a rational of the form p/q", path)


def format_rational(value: Fraction) -> str:
    """
    Lowest terms, always with a denominator, e.g. "2/3", "1/1".
    """
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


################################### SYMBOLS ########################################


def join_symbols(parts: Iterable[str]) -> str:
    """
    Join coordinate symbols into the symbol of a repeated game.
    """
    return SYMBOL_SEPARATOR.join(parts)


def split_symbol(symbol: str, n: int) -> Tuple[str, ...]:
    """
    Split the symbol of an n-fold repeated game back into its n coordinate symbols. Repeating a repeated game nests
    evenly, so the parts are regrouped into n equal runs.
    """
    parts = symbol.split(SYMBOL_SEPARATOR)
    if len(parts) % n != 0:
        raise InvalidGameError(f"symbol '{symbol}' does not split into {n} coordinates")
    size = len(parts) // n
    return tuple(SYMBOL_SEPARATOR.join(parts[i * size : (i + 1) * size]) for i in range(n))


def product_symbols(alphabet: Sequence[str], n: int) -> List[str]:
    """
    All n-fold symbols over an alphabet, sorted.
    """
    return sorted(join_symbols(parts) for parts in itertools.product(alphabet, repeat=n))


################################### CHANCE ########################################


def create_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Create the generator for one stream of one seed. Philox is counter based, so a (seed, stream) pair always gives
    the same draws no matter how work is split across workers.
    """
    sequence = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(sequence))


def hoeffding_radius(trials: int, confidence: float) -> float:
    """
    Two sided Hoeffding radius for the mean of `trials` variables in [0, 1].
    """
    return math.sqrt(math.log(2 / (1 - confidence)) / (2 * trials))


################################### DISTRIBUTIONS ########################################


def l1_distance(p: Mapping[Hashable, Fraction], q: Mapping[Hashable, Fraction]) -> Fraction:
    """
    Sum of absolute differences over the union of both supports.
    """
    keys = set(p) | set(q)
    return sum((abs(p.get(key, Fraction(0)) - q.get(key, Fraction(0))) for key in keys), Fraction(0))


def normalise(weights: Mapping[Hashable, Fraction]) -> Dict[Hashable, Fraction]:
    total = sum(weights.values(), Fraction(0))
    if total == 0:
        logging.warning(f"normalise: asked to normalise zero mass.")
        return {}
    return {key: weight / total for key, weight in weights.items() if weight != 0}


def marginalise(joint: Mapping[Tuple, Fraction], indices: Sequence[int]) -> Dict[Tuple, Fraction]:
    """
    Marginal of a distribution over tuples onto the given positions.
    """
    marginal: Dict[Tuple, Fraction] = {}
    for atom, weight in joint.items():
        key = tuple(atom[i] for i in indices)
        marginal[key] = marginal.get(key, Fraction(0)) + weight
    return marginal


################################### QUERY TOOLS ########################################


def digest(value: Any) -> str:
    """
    Short stable digest of a value's repr, used to name strategies in tables.
    """
    return hashlib.sha256(repr(value).encode("utf-8")).hexdigest()[:16]


def get_class_members(cls) -> List[str]:
    """
    Get a class' members, excluding special methods e.g. anything prefixed with '__'. Useful for the string enums.
    """
    members = []

    for member in cls.__dict__.keys():
        if member[:2] != "__":
            members.append(member)

    return members
