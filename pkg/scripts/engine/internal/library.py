from __future__ import annotations

import json
import logging
import os
import time

from scripts.engine.internal.constant import CONFIG_PATH
from scripts.engine.internal.definition import BudgetConfigData, ExperimentConfigData, SearchConfigData
from scripts.engine.internal.extend_json import deserialise_dataclasses

__all__ = ["BUDGET_CONFIG", "SEARCH_CONFIG", "EXPERIMENT_CONFIG", "refresh_library"]

#################################################################
# This module is for loading external data that is offered to the
# rest of the engine as a reference.
#################################################################


####################### DATA ##############################

# load with defaults, overidden by refresh
BUDGET_CONFIG: BudgetConfigData = BudgetConfigData()
SEARCH_CONFIG: SearchConfigData = SearchConfigData()
EXPERIMENT_CONFIG: ExperimentConfigData = ExperimentConfigData()


####################### REFRESH ##############################


def refresh_library():
    """
    Load all json config into the library. Missing files leave the defaults in place.
    """
    if "GENERATING_SPHINX_DOCS" in os.environ:  # when building in CI these fail
        return

    start_time = time.time()

    global BUDGET_CONFIG, SEARCH_CONFIG, EXPERIMENT_CONFIG
    BUDGET_CONFIG = _load_config("budget.json", BudgetConfigData, BUDGET_CONFIG)
    SEARCH_CONFIG = _load_config("search.json", SearchConfigData, SEARCH_CONFIG)
    EXPERIMENT_CONFIG = _load_config("experiment.json", ExperimentConfigData, EXPERIMENT_CONFIG)

    logging.info(f"Library data refreshed...")

    end_time = time.time()
    logging.debug(f"-> loaded data in {format(end_time - start_time, '.5f')}")


####################### LOAD ##############################


def _load_config(file_name: str, expected_type, default):
    path = CONFIG_PATH / file_name
    if not path.exists():
        logging.warning(f"Library._load_config: {file_name} not found. Using defaults.")
        return default

    with open(str(path)) as file:
        data = json.load(file, object_hook=deserialise_dataclasses)

    if not isinstance(data, expected_type):
        logging.warning(f"Library._load_config: {file_name} did not hold a {expected_type.__name__}. Using defaults.")
        return default

    return data


refresh_library()
