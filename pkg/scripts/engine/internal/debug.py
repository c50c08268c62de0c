from __future__ import annotations

import cProfile
import datetime
import io
import logging
import os
import pstats
import sys
import time
from typing import TYPE_CHECKING

from scripts.engine.internal.constant import METRICS_PATH, VERSION

if TYPE_CHECKING:
    from typing import Optional, Union

__all__ = [
    "initialise_logging",
    "kill_logging",
    "is_logging",
    "enable_profiling",
    "disable_profiling",
    "kill_profiler",
    "is_profiling",
]


class Debugger:
    def __init__(self):
        # objects
        self.profiler: Optional[cProfile.Profile] = None

        # flags
        self.is_profiling: bool = False
        self.is_logging: bool = False


if "GENERATING_SPHINX_DOCS" not in os.environ:  # when building in CI these fail
    _debugger = Debugger()
else:
    _debugger = ""  # type: ignore


########################## LOGGING  #####################################


def initialise_logging(level: Union[int, str] = logging.WARNING, log_file: Optional[str] = None):
    """
    Initialise logging. Logs go to stderr unless a file is given; stdout is kept for command payloads.
    """
    # Logging levels:
    #     CRITICAL - A serious error, indicating that may be unable to continue running.
    #     ERROR - A more serious problem, has not been able to perform some function.
    #     WARNING - An indication that something unexpected happened, but otherwise still working as expected.
    #     INFO - Confirmation that things are working as expected.
    #     DEBUG - Detailed information, typically of interest only when diagnosing problems

    _debugger.is_logging = True

    if isinstance(level, str):
        level = logging.getLevelName(level.upper())

    for handler in logging.root.handlers[:]:
        logging.root.removeHandler(handler)

    # 8 adds space for 8 characters (# CRITICAL)
    log_format = "%(asctime)s| %(levelname)-8s| %(message)s"
    if log_file:
        logging.basicConfig(filename=log_file, filemode="w", level=level, format=log_format)
    else:
        logging.basicConfig(stream=sys.stderr, level=level, format=log_format)

    # format into uk time
    logging.Formatter.converter = time.gmtime


def kill_logging():
    """
    Kill logging resources
    """
    logging.shutdown()
    _debugger.is_logging = False


def is_logging() -> bool:
    """
    Returns true if logging is active
    """
    return _debugger.is_logging


########################## PROFILING  #####################################


def enable_profiling():
    """
    Enable profiling. Create profiler if one doesnt exist
    """
    if not _debugger.profiler:
        _debugger.profiler = cProfile.Profile()

    _debugger.profiler.enable()
    _debugger.is_profiling = True


def disable_profiling(dump_data: bool = False):
    """
    Turn off current profiling. Dump data to file if required.
    """
    if _debugger.profiler:
        _debugger.profiler.disable()
        if dump_data:
            _dump_profiling_data()
        _debugger.is_profiling = False


def kill_profiler():
    """
    Kill profiling resource
    """
    if _debugger.profiler:
        disable_profiling(True)
        _debugger.profiler = None


def is_profiling() -> bool:
    """
    Returns true if profiling is active
    """
    return _debugger.is_profiling


def _dump_profiling_data():
    """
    Dump data to a readable file under tests/.metrics/profiling.
    """
    path = METRICS_PATH / "profiling"
    os.makedirs(str(path), exist_ok=True)

    _debugger.profiler.create_stats()
    dump_path = str(path / "profile.dump")
    ps = pstats.Stats(_debugger.profiler, stream=io.StringIO()).sort_stats("tottime")
    ps.dump_stats(dump_path)

    # convert profiling to human readable format
    date_and_time = datetime.datetime.utcnow()
    readable_path = path / (date_and_time.strftime("%Y%m%d@%H%M") + "_" + VERSION + ".profile")
    with open(str(readable_path), "w") as out_stream:
        ps = pstats.Stats(dump_path, stream=out_stream)
        ps.strip_dirs().sort_stats("tottime").print_stats()

    logging.info(f"Profiling data dumped to {readable_path}.")
