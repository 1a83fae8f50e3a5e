from coteach.commands.train import register as register_train
from coteach.commands.evaluate import register as register_evaluate
from coteach.commands.compare import register as register_compare
from coteach.commands.transfer import register as register_transfer
from coteach.commands.sweep import register as register_sweep
from coteach.commands.export import register as register_export
from coteach.commands.pretrain import register as register_pretrain

__all__ = [
    "register_train",
    "register_evaluate",
    "register_compare",
    "register_transfer",
    "register_sweep",
    "register_export",
    "register_pretrain",
]
