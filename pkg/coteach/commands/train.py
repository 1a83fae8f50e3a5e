import argparse

from coteach.commands.common import add_common_arguments, emit, resolve
from coteach.services.harness import record_runs, result_rows, train, write_run_artifacts


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train one algorithm on one domain for each seed")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config, seeds = resolve(args)
    results = [train(config, seed) for seed in seeds]
    write_run_artifacts(results, config.out_dir)
    record_runs(results, {config.display_label: config})
    emit(result_rows(results).to_dict(orient="records"))
    return 0
