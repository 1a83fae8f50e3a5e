import argparse

from coteach.commands.common import add_common_arguments, emit, resolve
from coteach.services.harness import evaluate


def register(subparsers) -> None:
    parser = subparsers.add_parser("evaluate", help="Greedy advice-free return of saved task policies")
    add_common_arguments(parser)
    parser.add_argument("--policies", nargs=2, required=True, metavar=("AGENT_I", "AGENT_J"))
    parser.add_argument("--rollouts", type=int, default=None)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config, _ = resolve(args)
    rollouts = args.rollouts if args.rollouts is not None else config.evaluation_rollouts
    v_bar = evaluate(args.policies, config.domain, rollouts)
    emit({"domain": config.domain.name.value, "rollouts": rollouts, "v_bar": v_bar})
    return 0
