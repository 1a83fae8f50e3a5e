import argparse

from coteach.commands.common import add_common_arguments, emit, resolve
from coteach.database import SessionLocal, init_db
from coteach.services.export import export_workbook


def register(subparsers) -> None:
    parser = subparsers.add_parser("export", help="Write stored runs to results.xlsx")
    add_common_arguments(parser)
    parser.add_argument("--label", type=str, default=None, help="Only runs with this label")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config, _ = resolve(args)
    init_db()
    db = SessionLocal()
    try:
        path = export_workbook(db, config.out_dir, args.label)
    finally:
        db.close()
    emit({"workbook": str(path)})
    return 0
