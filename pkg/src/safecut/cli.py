"""Command-line interface.

Subcommands mirror the pipeline stages: `bounds` builds an activation
envelope, `train-characterizer` fits the property head, `verify` runs the
MILP search, `monitor` checks a stream of samples against the envelope, and
`stats` reports the confusion/guarantee numbers.

Exit codes: verify maps Safe=0, Unsafe=1, Unknown=3; 2 is reserved for
input/usage errors everywhere (argparse's own convention); other commands
return 0 on success.  All JSON artifacts are written canonically (sorted
keys, two-space indent, trailing newline) so identical inputs and seed give
bitwise-identical files; `verify --timing` opts into a wall_time field at
the cost of that idempotence.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import bounds as bounds_mod
from . import monitor as monitor_mod
from . import stats as stats_mod
from .characterizer import TrainConfig, save_characterizer, train_characterizer
from .characterizer import load_characterizer
from .errors import ParseError, SafecutError
from .lp import format_lp
from .milp import encode, load_query, risk_from_obj
from .network import Dataset, load_dataset, load_network
from .verifier import Budget, SAFE, UNKNOWN, UNSAFE, verify

_EXIT_OK = 0
_EXIT_UNSAFE = 1
_EXIT_INPUT = 2
_EXIT_UNKNOWN = 3

_VERDICT_EXIT = {SAFE: _EXIT_OK, UNSAFE: _EXIT_UNSAFE, UNKNOWN: _EXIT_UNKNOWN}

_CONDITIONAL_NOTICE = (
    "note: this proof is conditional on the dataset envelope (assume-guarantee); "
    "it holds only while a runtime monitor (`safecut monitor`) confirms cut-layer "
    "activations stay inside the bounds file"
)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_canonical(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _parse_box(text: str, dim: int) -> bounds_mod.InputBox:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParseError(f"--box expects 'LO,HI', got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise ParseError(f"--box expects two reals, got {text!r}") from None
    return bounds_mod.InputBox(np.full(dim, lo), np.full(dim, hi))


def cmd_bounds(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    if args.static:
        box = _parse_box(args.box, net.input_dim)
        b = bounds_mod.static_bounds(net, box, args.layer)
    else:
        data = load_dataset(args.data, expected_dim=net.input_dim)
        b = bounds_mod.dataset_bounds(net, data, args.layer, with_diffs=args.diffs)
    if args.widen > 0:
        b = bounds_mod.widen(b, args.widen)
    bounds_mod.save_bounds(b, args.out)
    return _EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    data = load_dataset(args.data, expected_dim=net.input_dim)
    cfg = TrainConfig(
        hidden_units=args.hidden,
        learning_rate=args.lr,
        max_epochs=args.epochs,
        seed=args.seed,
    )
    h = train_characterizer(net, data, args.layer, cfg, property_id=args.property_id)
    save_characterizer(h, args.out)
    if h.achieved_accuracy < 1.0:
        print(
            f"warning: training accuracy {h.achieved_accuracy:.4f} < 100%; "
            "the perfect-characterizer assumption does not hold on this data",
            file=sys.stderr,
        )
    return _EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    query = load_query(args.query)
    if args.debug_lp_dump:
        prob = encode(net, query)
        with open(args.debug_lp_dump, "w", encoding="utf-8") as fh:
            fh.write(format_lp(prob.lp))
            fh.write(
                "binaries " + " ".join(prob.lp.name_of(j) for j in prob.binaries) + "\n"
            )
    budget = Budget(max_nodes=args.max_nodes, max_seconds=args.max_seconds)
    verdict = verify(net, query, budget=budget, workers=args.workers)

    stats = dict(verdict.stats)
    if not args.timing:
        stats.pop("wall_time", None)  # keep report files bitwise-reproducible
    report = {
        "status": verdict.status,
        "conditional": verdict.conditional,
        "witness": verdict.witness,
        "witness_output": verdict.witness_output,
        "stats": stats,
        "warnings": list(verdict.warnings),
    }
    _write_canonical(report, args.out)
    if verdict.status == SAFE and verdict.conditional:
        print(_CONDITIONAL_NOTICE, file=sys.stderr)
    return _VERDICT_EXIT[verdict.status]


def cmd_monitor(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    b = bounds_mod.load_bounds(args.bounds)

    def rows():
        # raw string cells: monitor_stream's per-row error handling turns
        # non-numeric or wrong-length rows into StreamError lines
        for line in sys.stdin:
            line = line.strip()
            if line:
                yield [p.strip() for p in line.split(",")]

    stream = monitor_mod.monitor_stream(
        net, b, rows(), tolerance=args.tolerance, precomputed=args.activations
    )
    for report in stream:
        print(json.dumps(_jsonable(monitor_mod.report_to_obj(report)), sort_keys=True))
        sys.stdout.flush()
    return _EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    net = load_network(args.network)
    h = load_characterizer(args.characterizer)
    data = load_dataset(args.data, expected_dim=net.input_dim)
    est = stats_mod.estimate_confusion(net, h, args.layer, data)
    premise = False
    if args.risk:
        with open(args.risk, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        risk = risk_from_obj(obj["risk"] if isinstance(obj, dict) else obj)
        premise = stats_mod.check_premise(net, h, args.layer, data, risk)
    g = stats_mod.guarantee(est, args.delta, premise=premise)
    print(
        json.dumps(_jsonable(stats_mod.stats_report_obj(est, g)), sort_keys=True, indent=2)
    )
    return _EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safecut",
        description="Safety verification toolkit for feed-forward perception networks",
    )
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (training)")
    parser.add_argument(
        "--workers", type=int, default=1,
        help="branch-and-bound workers; >1 sacrifices witness determinism",
    )
    parser.add_argument(
        "--debug-lp-dump", metavar="PATH", default=None,
        help="verify only: dump the root LP as plain text to PATH",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="build a cut-layer activation envelope")
    p.add_argument("network", help="network JSON")
    p.add_argument("out", help="output bounds JSON")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="labeled/unlabeled dataset CSV")
    src.add_argument(
        "--static", action="store_true",
        help="interval propagation from an input box instead of data",
    )
    p.add_argument("--box", help="input box 'LO,HI' applied to every input (with --static)")
    p.add_argument("--layer", type=int, required=True, help="cut position l in [1, L-1]")
    p.add_argument(
        "--diffs", action="store_true",
        help="also record adjacent-difference bounds (dataset mode)",
    )
    p.add_argument("--widen", type=float, default=0.0, metavar="M",
                   help="pad bounds by M*max(1,|v|) per endpoint")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("train-characterizer", help="fit the property head at the cut")
    p.add_argument("network", help="network JSON")
    p.add_argument("data", help="labeled dataset CSV")
    p.add_argument("out", help="output characterizer JSON")
    p.add_argument("--layer", type=int, required=True)
    p.add_argument("--hidden", type=int, default=0,
                   help="hidden ReLU units (0 = logistic regression)")
    p.add_argument("--lr", type=float, default=0.5, help="learning rate")
    p.add_argument("--epochs", type=int, default=2000, help="max epochs")
    p.add_argument("--property-id", default="phi", help="name of the input property")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("verify", help="decide a safety query by MILP search")
    p.add_argument("network", help="network JSON")
    p.add_argument("query", help="query JSON (cut_layer, bounds, characterizer, risk)")
    p.add_argument("out", help="output verdict JSON")
    p.add_argument("--max-nodes", type=int, default=200_000)
    p.add_argument("--max-seconds", type=float, default=float("inf"))
    p.add_argument("--timing", action="store_true",
                   help="include wall_time in the report (breaks bitwise idempotence)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("monitor", help="stream containment checks (CSV in, LDJSON out)")
    p.add_argument("network", help="network JSON")
    p.add_argument("bounds", help="bounds JSON")
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument(
        "--activations", action="store_true",
        help="stdin rows are cut-layer activations, not network inputs",
    )
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("stats", help="confusion cells and statistical guarantee")
    p.add_argument("network", help="network JSON")
    p.add_argument("characterizer", help="characterizer JSON")
    p.add_argument("data", help="labeled evaluation CSV")
    p.add_argument("--layer", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.05,
                   help="1-delta confidence for the conservative bound")
    p.add_argument("--risk", metavar="PATH", default=None,
                   help="risk JSON (list of clauses, or query file) for the premise check")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bounds":
        if args.static and not args.box:
            parser.error("--static requires --box LO,HI")
        if not args.static and args.box:
            parser.error("--box is only meaningful with --static")
    try:
        return args.func(args)
    except (SafecutError, ValueError) as exc:
        print(f"safecut: error: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except OSError as exc:
        print(f"safecut: error: {exc}", file=sys.stderr)
        return _EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
