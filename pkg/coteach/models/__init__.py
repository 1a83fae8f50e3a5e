from coteach.models.run import Run
from coteach.models.curve_point import CurvePoint

__all__ = [
    "Run",
    "CurvePoint",
]
