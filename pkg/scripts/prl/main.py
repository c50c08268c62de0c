from __future__ import annotations

import logging
import sys
import traceback
from typing import TYPE_CHECKING

from scripts.engine.internal import debug
from scripts.engine.internal.error import UsageError
from scripts.prl.command import build_parser, run

if TYPE_CHECKING:
    from typing import List, Optional


def main(argv: Optional[List[str]] = None):
    """
    The entry for the command line: set up logging and profiling, run one command, write its payload to stdout.
    """
    argv = sys.argv[1:] if argv is None else argv

    # logging and profiling flags are read before the command so they cover all of it; usage errors are left for run
    try:
        flags, _ = build_parser().parse_known_args(argv)
    except UsageError:
        flags = None
    debug.initialise_logging(flags.log_level if flags else "WARNING", flags.log_file if flags else None)
    if flags and flags.profile:
        debug.enable_profiling()

    try:
        result = run(argv)
    except Exception:
        logging.critical(f"Something went wrong and killed the command!")
        exc_type, exc_value, exc_traceback = sys.exc_info()
        tb_list = traceback.format_exception(exc_type, exc_value, exc_traceback)
        for line in tb_list:
            clean_line = line.replace("\n", "")
            logging.critical(f"{clean_line}")
        _close_down()
        raise

    sys.stdout.write(result.payload)
    sys.stdout.flush()
    _close_down()

    raise SystemExit(result.exit_code)


def _close_down():
    if debug.is_profiling():
        debug.kill_profiler()
    if debug.is_logging():
        debug.kill_logging()


if __name__ == "__main__":  # prevents being run from other modules
    main()
