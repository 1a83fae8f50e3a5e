"""Persists finished runs and their learning curves in the SQL results store."""
import logging
from typing import List, Optional

from sqlalchemy.orm import Session

from coteach.models import CurvePoint, Run
from coteach.schemas.experiment import ExperimentConfig
from coteach.schemas.results import RunResult

logger = logging.getLogger(__name__)


def save_run(db: Session, result: RunResult, config: Optional[ExperimentConfig] = None) -> Run:
    run = Run(
        label=result.label,
        algorithm=result.algorithm,
        domain=result.domain,
        seed=result.seed,
        reward_kind=result.reward_kind,
        cost=result.cost,
        v_bar=result.v_bar,
        auc=result.auc,
        normalized_auc=result.normalized_auc,
        optimum=result.optimum,
        advice_i=result.advice_counts[0],
        advice_j=result.advice_counts[1],
        config=config.model_dump(mode="json") if config is not None else None,
    )
    rates = result.advice_rate_curve or [[0.0, 0.0]] * len(result.curve)
    training = result.training_returns or [None] * len(result.curve)
    for episode, (value, train_value, rate) in enumerate(zip(result.curve, training, rates)):
        run.curve_points.append(CurvePoint(
            episode=episode,
            greedy_return=value,
            training_return=train_value,
            advice_rate_i=rate[0],
            advice_rate_j=rate[1],
        ))
    db.add(run)
    db.commit()
    db.refresh(run)
    logger.info(f"Stored run {run.id} ({result.label}, seed {result.seed})")
    return run


def list_runs(db: Session, label: Optional[str] = None) -> List[Run]:
    query = db.query(Run)
    if label:
        query = query.filter(Run.label == label)
    return query.order_by(Run.label, Run.seed, Run.id).all()


def run_rows(runs: List[Run]) -> List[dict]:
    return [
        {
            "label": run.label,
            "algorithm": run.algorithm,
            "domain": run.domain,
            "seed": run.seed,
            "reward_kind": run.reward_kind,
            "cost": run.cost,
            "v_bar": run.v_bar,
            "auc": run.auc,
            "normalized_auc": run.normalized_auc,
            "advice_i": run.advice_i,
            "advice_j": run.advice_j,
        }
        for run in runs
    ]
