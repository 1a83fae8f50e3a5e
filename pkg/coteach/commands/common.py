"""Arguments shared by every sub-command and the config/seed resolution behind them."""
import argparse
import json
from typing import List, Optional, Tuple

from coteach.config import get_settings, load_experiment_config
from coteach.schemas.experiment import ExperimentConfig


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None,
                        help="YAML experiment file (one mapping per section)")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="Override one config key; repeatable")
    parser.add_argument("--seed", type=int, default=None, help="Run a single seed")
    parser.add_argument("--seeds", type=int, default=None, help="Run seeds 0..N-1")
    parser.add_argument("--out", type=str, default=None, help="Output directory")
    parser.add_argument("--workers", type=int, default=None,
                        help="Process pool width (default: COTEACH_MAX_WORKERS)")


def resolve(args: argparse.Namespace, config_path: Optional[str] = None) -> Tuple[ExperimentConfig, List[int]]:
    config = load_experiment_config(config_path or args.config, args.overrides)
    if args.out:
        config = config.model_copy(update={"out_dir": args.out})
    elif "out_dir" not in config.model_fields_set:
        config = config.model_copy(update={"out_dir": get_settings().results_dir})
    if args.seeds is not None:
        seeds = list(range(args.seeds))
    elif args.seed is not None:
        seeds = [args.seed]
    else:
        seeds = list(config.seeds)
    return config, seeds


def workers(args: argparse.Namespace) -> int:
    return args.workers if args.workers is not None else get_settings().max_workers


def emit(payload) -> None:
    """Final machine-readable summary on stdout."""
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))
