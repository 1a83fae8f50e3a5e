import argparse

from coteach.commands.common import add_common_arguments, emit, resolve, workers
from coteach.schemas.enums import RewardKind
from coteach.services.harness import sweep


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="Compare a grid of reward kinds, rotations and costs")
    add_common_arguments(parser)
    parser.add_argument("--algorithms", nargs="+", default=None)
    parser.add_argument("--kinds", nargs="+", default=None, choices=[k.value for k in RewardKind])
    parser.add_argument("--rotations", nargs="+", type=int, default=None)
    parser.add_argument("--costs", nargs="+", type=float, default=None)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config, seeds = resolve(args)
    report = sweep(
        config, seeds, config.out_dir, workers(args),
        algorithms=args.algorithms,
        kinds=[RewardKind(k) for k in args.kinds] if args.kinds else None,
        rotations=args.rotations,
        costs=args.costs,
    )
    emit(report.model_dump(mode="json"))
    return 0
