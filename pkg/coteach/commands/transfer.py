import argparse

from coteach.commands.common import add_common_arguments, emit, resolve
from coteach.services.harness import record_runs, result_rows, transfer, write_run_artifacts


def register(subparsers) -> None:
    parser = subparsers.add_parser("transfer", help="Train on a flipped domain with source policies as teachers")
    add_common_arguments(parser)
    parser.add_argument("--source", nargs=2, required=True, metavar=("AGENT_I", "AGENT_J"))
    parser.add_argument("--flip", choices=["none", "horizontal", "vertical"], default="horizontal")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config, seeds = resolve(args)
    results = [transfer(config, args.source, args.flip, seed, out_dir=config.out_dir) for seed in seeds]
    write_run_artifacts(results, config.out_dir)
    record_runs(results, {r.label: config for r in results})
    emit(result_rows(results).to_dict(orient="records"))
    return 0
