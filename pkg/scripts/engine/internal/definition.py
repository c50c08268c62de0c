from __future__ import annotations

from dataclasses import dataclass

from scripts.engine.internal.extend_json import register_dataclass_with_json

__all__ = ["BudgetConfigData", "SearchConfigData", "ExperimentConfigData"]

#################################################################
# This module is for specifying all defined config sets.
#################################################################


##################### CONFIG #################################


@register_dataclass_with_json
@dataclass
class BudgetConfigData:
    """
    Limits that stop an exact computation before it outgrows a laptop. Breaching one raises BudgetExceededError.
    Also used to hold and map data from json.
    """

    max_strategy_count: int = 2 ** 30  # product strategies considered by game_value
    max_alphabet_size: int = 4096  # symbols per player after repetition
    max_win_entries: int = 2_000_000  # (question, answer) pairs held by a game
    max_lp_variables: int = 200_000
    max_exact_tableau_cells: int = 400_000  # rows * columns solved by the dense rational tableau
    max_exact_space_p_n: int = 6
    max_exact_space_c_n: int = 4
    max_diagnostic_atoms: int = 1_000_000


@register_dataclass_with_json
@dataclass
class SearchConfigData:
    """
    Settings for heuristic_value_search.
    Also used to hold and map data from json.
    """

    restarts: int = 200
    max_sweeps: int = 50  # improving sweeps per climb before giving up on the climb
    kicks: int = 20  # perturbations applied at a local optimum before the next restart
    kick_size: int = 3  # entries mutated per perturbation
    seed: int = 20210615


@register_dataclass_with_json
@dataclass
class ExperimentConfigData:
    """
    Settings for the sampling experiments.
    Also used to hold and map data from json.
    """

    block_size: int = 4096  # trials drawn from one counter based stream
    confidence: float = 0.99
    workers: int = 1
