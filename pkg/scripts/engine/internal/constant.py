from __future__ import annotations

import os
from pathlib import Path
from types import SimpleNamespace
from typing import NewType

######################## TOP LEVEL CONSTANTS ######################################

VERSION = "0.4.0"  # DONT FORGET TO UPDATE SPHINX VERSION
FORMAT_VERSION = "1"  # game/strategy json format

SYMBOL_SEPARATOR = ","  # joins coordinate symbols of a repeated game
BINARY = ("0", "1")

######################## PATHS ######################################

ROOT_PATH = Path(__file__).parent.parent.parent.parent  # constant.py is three directories deep

# to move up from docs and handle being in Ubuntu in CI
if "GENERATING_SPHINX_DOCS" in os.environ:
    ROOT_PATH = ROOT_PATH / os.pardir

DATA_PATH = ROOT_PATH / "data/"
CONFIG_PATH = DATA_PATH / "config/"
METRICS_PATH = ROOT_PATH / "tests/.metrics/"

######################## NEW TYPES ######################################
# NewType guarantees you don't accidentally pass in a normal str instead of a value explicitly defined as a member of
# that NewType, and that you don't treat that member as a normal str.

ConnectivityType = NewType("ConnectivityType", str)
GameClassTagType = NewType("GameClassTagType", str)
HW1CaseType = NewType("HW1CaseType", str)
ValueMethodType = NewType("ValueMethodType", str)
LpMethodType = NewType("LpMethodType", str)
SubsetModeType = NewType("SubsetModeType", str)
SampleModeType = NewType("SampleModeType", str)
ErrorKindType = NewType("ErrorKindType", str)
OutputFormatType = NewType("OutputFormatType", str)

######################## STRING ENUMS ######################################


class Connectivity(SimpleNamespace):
    CONNECTED = ConnectivityType("Connected")
    PLAYERWISE_ONLY = ConnectivityType("PlayerwiseConnectedOnly")
    NOT_PLAYERWISE = ConnectivityType("NotPlayerwiseConnected")


class GameClassTag(SimpleNamespace):
    CONNECTED = GameClassTagType("Connected")
    TWO_PLAYER_REDUCIBLE = GameClassTagType("TwoPlayerReducible")
    HAMMING_WEIGHT_ONE = GameClassTagType("HammingWeightOne")
    GHZ_SUPPORT = GameClassTagType("GHZSupport")
    FOUR_POINT_AND = GameClassTagType("FourPointAND")
    FIVE_POINT = GameClassTagType("FivePointPlayerwise")


class HW1Case(SimpleNamespace):
    ZERO_LINE = HW1CaseType("Case1")
    ANTI_CORRELATION = HW1CaseType("Case2")


class ValueMethod(SimpleNamespace):
    EXHAUSTIVE = ValueMethodType("exhaustive")
    HEURISTIC = ValueMethodType("heuristic")
    BASELINE = ValueMethodType("baseline")


class LpMethod(SimpleNamespace):
    AUTO = LpMethodType("auto")
    EXACT = LpMethodType("exact")
    CERTIFIED = LpMethodType("certified")


class SubsetMode(SimpleNamespace):
    COMPLEMENTARY = SubsetModeType("complementary")  # subsets of size k - 1
    ALL = SubsetModeType("all")  # every nonempty proper subset


class SampleMode(SimpleNamespace):
    EXACT = SampleModeType("exact")
    SAMPLE = SampleModeType("sample")


class OutputFormat(SimpleNamespace):
    JSON = OutputFormatType("json")
    CSV = OutputFormatType("csv")


class ErrorKind(SimpleNamespace):
    INVALID_GAME = ErrorKindType("invalid_game")
    ALPHABET_MISMATCH = ErrorKindType("alphabet_mismatch")
    BUDGET_EXCEEDED = ErrorKindType("budget_exceeded")
    ZERO_PROBABILITY = ErrorKindType("zero_probability")
    INDEX_OUT_OF_RANGE = ErrorKindType("index_out_of_range")
    UNSUPPORTED_GAME = ErrorKindType("unsupported_game")
    UNREACHABLE_BRANCH = ErrorKindType("unreachable_branch")
    LP_INFEASIBLE = ErrorKindType("lp_infeasible")
    LP_UNBOUNDED = ErrorKindType("lp_unbounded")
    CERTIFICATE_FAILED = ErrorKindType("certificate_failed")
    USAGE = ErrorKindType("usage")
