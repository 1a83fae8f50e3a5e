import argparse

from coteach.commands.common import add_common_arguments, emit, resolve
from coteach.services.envs import make_env
from coteach.services.harness import pretrain_experts
from coteach.services.rewards import greedy_return


def register(subparsers) -> None:
    parser = subparsers.add_parser("pretrain", help="Pre-train expert task policies for the heuristic teachers")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config, seeds = resolve(args)
    env = make_env(config.domain.model_copy(update={"rotation_degrees": 0}))
    summary = []
    for seed in seeds:
        experts = pretrain_experts(config, seed, config.out_dir)
        summary.append({"seed": seed, "greedy_return": greedy_return(env, experts)})
    emit(summary)
    return 0
