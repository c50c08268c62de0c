from __future__ import annotations

import argparse
import csv
import io
import itertools
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from scripts.engine.core import diagnostic, game, nonsignaling, sampling, search, structure, zoo
from scripts.engine.core.utility import create_rng, format_rational, get_class_members, split_symbol
from scripts.engine.internal import library
from scripts.engine.internal.constant import (
    FORMAT_VERSION,
    GameClassTag,
    LpMethod,
    OutputFormat,
    SampleMode,
    SubsetMode,
    VERSION,
)
from scripts.engine.internal.error import LabError, UnsupportedGameError, UsageError
from scripts.engine.internal.extend_json import dumps_canonical

if TYPE_CHECKING:
    from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

__all__ = ["CommandResult", "build_parser", "run"]


@dataclass(frozen=True)
class CommandResult:
    """
    Exit code 0 on success, 1 on a domain error, 2 on a usage error. `payload` is what goes to stdout.
    """

    exit_code: int
    payload: str


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{message}\n{self.format_usage()}", "argv")


############################ PARSER ############################


def _shared_flags(defaults: bool) -> argparse.ArgumentParser:
    """
    Flags accepted before or after the command name. Only the top level sets defaults, so a subcommand leaves an
    earlier value alone unless the flag is repeated after it.
    """
    shared = _Parser(add_help=False)
    shared.add_argument(
        "--seed", type=int, default=None if defaults else argparse.SUPPRESS, help="seed for every random choice"
    )
    shared.add_argument(
        "--format",
        choices=get_choices(OutputFormat),
        default=OutputFormat.JSON if defaults else argparse.SUPPRESS,
    )
    return shared


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="prl", description="Parallel repetition lab for multiplayer games.", parents=[_shared_flags(True)]
    )
    parser.add_argument("--threads", type=int, default=None, help="worker cap; results do not depend on it")
    parser.add_argument("--log-level", default="WARNING")
    parser.add_argument("--log-file", default=None)
    parser.add_argument("--profile", action="store_true")
    parser.add_argument("--version", action="store_true", help="print toolkit and format versions")
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)
    shared = [_shared_flags(False)]

    validate = commands.add_parser("validate", parents=shared, help="check a game file")
    validate.add_argument("file", nargs="?")

    value = commands.add_parser("value", parents=shared, help="exact value of a game or of its repetition")
    value.add_argument("file", nargs="?")
    value.add_argument("--n", type=int, default=1)

    ns = commands.add_parser("ns-value", parents=shared, help="exact non-signaling value")
    ns.add_argument("file", nargs="?")
    ns.add_argument("--check-invariance", action="store_true")
    ns.add_argument("--n", type=int, default=2)
    ns.add_argument("--subsets", choices=get_choices(SubsetMode), default=SubsetMode.COMPLEMENTARY)
    ns.add_argument("--lp-method", choices=get_choices(LpMethod), default=LpMethod.AUTO)

    classify = commands.add_parser("classify", parents=shared, help="connectivity and support class")
    classify.add_argument("file", nargs="?")

    repeat = commands.add_parser("repeat", parents=shared, help="emit the n-fold repetition")
    repeat.add_argument("file", nargs="?")
    repeat.add_argument("--n", type=int, required=True)

    decay = commands.add_parser("decay", parents=shared, help="value of g^n for n = 1..n-max")
    decay.add_argument("--game", required=True)
    decay.add_argument("--n-max", type=int, required=True)

    named = commands.add_parser("zoo", parents=shared, help="emit a named game")
    named.add_argument("name", choices=sorted(zoo.ZOO))
    named.add_argument("--k", type=int, default=1)

    cnf = commands.add_parser("cnf", parents=shared, help="connectivity of random 3-CNF games")
    cnf.add_argument("--d", type=int, required=True)
    cnf.add_argument("--m", type=int, required=True)
    cnf.add_argument("--seeds", type=int, required=True)

    diag = commands.add_parser("diag", parents=shared, help="exact diagnostics")
    diag.add_argument("kind", choices=["pinsker", "embedding", "spaces"])
    diag.add_argument("--n", type=int, default=2)
    diag.add_argument("--game", default=None)

    return parser


def get_choices(namespace: Any) -> List[str]:
    return [getattr(namespace, member) for member in get_class_members(namespace)]


############################ RUN ############################


def run(argv: Sequence[str], stdin: Optional[TextIO] = None) -> CommandResult:
    """
    Parse argv and run one command. Never raises for lab errors: they become error payloads and exit codes.
    """
    stdin = stdin or sys.stdin
    try:
        args = build_parser().parse_args(list(argv))
        if args.version:
            return CommandResult(0, dumps_canonical({"version": VERSION, "format_version": FORMAT_VERSION}))
        if args.command is None:
            raise UsageError("a command is required", "argv")
        handler = _HANDLERS[args.command]
        return CommandResult(0, handler(args, stdin))
    except UsageError as error:
        logging.warning(f"run: usage error, {error.message}")
        return CommandResult(2, dumps_canonical(error.to_record()))
    except LabError as error:
        logging.warning(f"run: {error.kind} at '{error.path}', {error.message}")
        return CommandResult(1, dumps_canonical(error.to_record()))


def _read(path: Optional[str], stdin: TextIO) -> game.Game:
    if path is None or path == "-":
        return game.load_game(stdin.read())
    try:
        with open(path, "r") as file:
            text = file.read()
    except OSError as error:
        raise UsageError(f"cannot read '{path}': {error.strerror}", "file")
    return game.load_game(text)


def _json_only(args: argparse.Namespace):
    if args.format != OutputFormat.JSON:
        raise UsageError(f"'{args.command}' only writes json", "format")


def _workers(args: argparse.Namespace) -> int:
    return args.threads or library.EXPERIMENT_CONFIG.workers


############################ COMMANDS ############################


def process_validate(args: argparse.Namespace, stdin: TextIO) -> str:
    _json_only(args)
    g = _read(args.file, stdin)
    return dumps_canonical({"valid": True, "players": g.players, "support_size": len(g.distribution)})


def process_value(args: argparse.Namespace, stdin: TextIO) -> str:
    _json_only(args)
    g = _read(args.file, stdin)
    target = g if args.n == 1 else game.tensor_power(g, args.n)
    value, strategy = game.game_value(target, workers=_workers(args))
    return dumps_canonical(
        {"n": args.n, "value": format_rational(value), "strategy": game.strategy_to_record(strategy)}
    )


def process_ns_value(args: argparse.Namespace, stdin: TextIO) -> str:
    _json_only(args)
    g = _read(args.file, stdin)
    optimum, witness = nonsignaling.ns_value(g, args.subsets, args.lp_method)
    if not args.check_invariance:
        return dumps_canonical({"optimum": format_rational(optimum), "witness": witness.to_record()})
    repeated, _ = nonsignaling.ns_value(game.tensor_power(g, args.n), args.subsets, args.lp_method)
    return dumps_canonical(
        {
            "optimum": format_rational(optimum),
            "n": args.n,
            "repeated_optimum": format_rational(repeated),
            "equal": optimum == repeated,
        }
    )


def process_classify(args: argparse.Namespace, stdin: TextIO) -> str:
    _json_only(args)
    g = _read(args.file, stdin)
    record: Dict[str, Any] = {"connectivity": structure.classify_connectivity(g)}
    try:
        classification = structure.classify_binary3(g)
    except UnsupportedGameError as error:
        logging.info(f"process_classify: no support class, {error.message}")
        return dumps_canonical(record)
    record.update(classification.to_record())
    if classification.tag == GameClassTag.HAMMING_WEIGHT_ONE:
        try:
            record["hw1"] = structure.hw1_binary_case(g).to_record()
        except UnsupportedGameError as error:
            logging.info(f"process_classify: no HW1 case split, {error.message}")
    return dumps_canonical(record)


def process_repeat(args: argparse.Namespace, stdin: TextIO) -> str:
    _json_only(args)
    return game.dump_game(game.tensor_power(_read(args.file, stdin), args.n))


def process_decay(args: argparse.Namespace, stdin: TextIO) -> str:
    g = _read(args.game, stdin)
    curve = search.decay_curve(g, args.n_max, seed=args.seed, workers=_workers(args))
    return curve.emit(args.format)


def process_zoo(args: argparse.Namespace, stdin: TextIO) -> str:
    _json_only(args)
    constructor = zoo.ZOO[args.name]
    g = constructor(args.k) if args.name == "hw1-canonical" else constructor()
    return game.dump_game(g)


def process_cnf(args: argparse.Namespace, stdin: TextIO) -> str:
    seed = args.seed if args.seed is not None else library.SEARCH_CONFIG.seed
    rows = zoo.cnf_connectivity_experiment(args.d, args.m, args.seeds, seed, workers=_workers(args))
    records = [row.to_record() for row in rows]
    if args.format == OutputFormat.JSON:
        return dumps_canonical({"d": args.d, "m": args.m, "rows": records})
    buffer = io.StringIO()
    fieldnames = ["seed", "connected", "playerwise_connected", "value"]
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow({key: "" if value is None else value for key, value in record.items()})
    return buffer.getvalue()


def process_diag(args: argparse.Namespace, stdin: TextIO) -> str:
    _json_only(args)
    seed = args.seed if args.seed is not None else library.SEARCH_CONFIG.seed
    g = _read(args.game, stdin) if args.game else zoo.anti_correlation()
    handlers: Dict[str, Callable[[game.Game, int, int], Dict[str, Any]]] = {
        "pinsker": _diag_pinsker,
        "embedding": _diag_embedding,
        "spaces": _diag_spaces,
    }
    return dumps_canonical(handlers[args.kind](g, args.n, seed))


def _diag_pinsker(g: game.Game, n: int, seed: int) -> Dict[str, Any]:
    """
    A random product distribution over {0,1,2}^n and a random nonempty event.
    """
    rng = create_rng(seed)
    factors = []
    for _ in range(n):
        weights = [int(w) for w in rng.integers(1, 10, size=3)]
        factors.append({str(v): Fraction(w, sum(weights)) for v, w in enumerate(weights)})
    atoms = [tuple(str(v) for v in index) for index in itertools.product(range(3), repeat=n)]
    chosen = [atom for atom, keep in zip(atoms, rng.random(len(atoms)) < 0.5) if keep] or atoms[:1]
    return diagnostic.pinsker_check(factors, chosen).to_record()


def _diag_embedding(g: game.Game, n: int, seed: int) -> Dict[str, Any]:
    """
    E pins player 1's question at coordinate 1 to its most likely value.
    """
    marginal = game.question_marginal(g, 0)
    pinned = max(sorted(marginal), key=lambda q: marginal[q])
    symbols = [s for s in game.tensor_power(g, n).questions[0] if split_symbol(s, n)[0] == pinned]
    event = game.create_product_event(g, n, [symbols] + [None] * (g.players - 1))
    return diagnostic.l1_embedding_diagnostic(g, n, event).to_record()


def _diag_spaces(g: game.Game, n: int, seed: int) -> Dict[str, Any]:
    p_space = sampling.space_P(n, seed, SampleMode.EXACT, g)
    c_space = sampling.space_C(n, seed, SampleMode.EXACT, g)
    pair = p_space.coordinate(0).marginal(["X", "Xt"])
    q_power = game.tensor_power(g, n).distribution
    c_tilde = {
        tuple(",".join(part) for part in atom): weight
        for atom, weight in c_space.marginal(["Xt", "Yt", "Zt"]).atoms.items()
    }
    return {
        "n": n,
        "pair_marginal": {",".join(x for (x,) in atom): format_rational(w) for atom, w in sorted(pair.atoms.items())},
        "c_pair_equals_p_pair": c_space.marginal(["X", "Xt"]).atoms == p_space.marginal(["X", "Xt"]).atoms,
        "c_tilde_equals_q_power": c_tilde == dict(q_power),
    }


_HANDLERS: Dict[str, Callable[[argparse.Namespace, TextIO], str]] = {
    "validate": process_validate,
    "value": process_value,
    "ns-value": process_ns_value,
    "classify": process_classify,
    "repeat": process_repeat,
    "decay": process_decay,
    "zoo": process_zoo,
    "cnf": process_cnf,
    "diag": process_diag,
}
