import argparse

from coteach.commands.common import add_common_arguments, emit, resolve, workers
from coteach.schemas.experiment import ExperimentConfig
from coteach.services.harness import compare


def register(subparsers) -> None:
    parser = subparsers.add_parser("compare", help="Run several algorithms over seeds and test differences")
    add_common_arguments(parser)
    parser.add_argument("--algorithms", nargs="+", default=None,
                        help="Algorithms applied to the base config (learned or a heuristic kind)")
    parser.add_argument("--configs", nargs="+", default=None,
                        help="One experiment file per compared configuration")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    base, seeds = resolve(args)
    configs = []
    for path in args.configs or []:
        config, _ = resolve(args, config_path=path)
        configs.append(config)
    for algorithm in args.algorithms or []:
        data = base.model_dump(mode="json")
        data.update(algorithm=algorithm, label=None)
        configs.append(ExperimentConfig.model_validate(data))
    report = compare(configs, seeds, base.out_dir, workers(args))
    emit(report.model_dump(mode="json"))
    return 0
