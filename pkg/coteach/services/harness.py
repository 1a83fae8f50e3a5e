"""
Experiment orchestration: the Phase I / Phase II outer loop, metrics, seed
handling, comparisons with significance tests, transfer runs and sweeps.
"""
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from coteach.database import SessionLocal, init_db
from coteach.exceptions import ConfigError, PolicyFormatError
from coteach.schemas.enums import LEARNED, HeuristicKind, RewardKind
from coteach.schemas.experiment import DomainConfig, ExperimentConfig
from coteach.schemas.results import (
    AlgorithmSummary,
    CellFailure,
    ComparisonReport,
    MetricSummary,
    RunResult,
)
from coteach.services.advising import AdvisingPolicySet
from coteach.services.envs import HeterogeneousActions, make_env
from coteach.services.heuristics import EXPERT_KINDS, HeuristicState
from coteach.services.policy_store import load_learner, load_policy, save_learner, save_policy
from coteach.services.protocol import (
    BehavioralPolicy,
    HeuristicTeaching,
    LearnedTeaching,
    NoTeaching,
    TeachingAlgorithm,
    run_phase1,
    run_phase2,
)
from coteach.services.qlearn import check_compatible, make_learners
from coteach.services.results_store import save_run
from coteach.services.rewards import estimate_joint_value
from coteach.services.stats import is_significant, welch_t_test

logger = logging.getLogger(__name__)

CALIBRATION_SEEDS = (0, 1, 2)
METRICS = ("v_bar", "auc", "normalized_auc", "advice_per_episode")
RESULT_COLUMNS = ["label", "algorithm", "domain", "seed", "reward_kind", "cost", "v_bar", "auc",
                  "normalized_auc", "advice_i", "advice_j", "advice_per_episode"]


def behavioral_policies(env, domain: DomainConfig) -> List[BehavioralPolicy]:
    policies = [BehavioralPolicy.identity(n) for n in env.n_actions]
    if domain.behavioral == "rotation" and isinstance(env, HeterogeneousActions):
        policies[env.agent] = BehavioralPolicy.from_rotation(env.rotation)
    return policies


def _learners(config: ExperimentConfig, env):
    q = config.qlearn
    return make_learners(env, q.learner, q.alpha, q.gamma, q.epsilon, q.tilings, q.tile_width)


def _streams(seed: int, n: int = 3) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _start_value(learners, env) -> float:
    obs = env.reset()
    return float(np.mean([learner.value_estimate(o) for learner, o in zip(learners, obs)]))


def pretrain_experts(config: ExperimentConfig, seed: int, out_dir: Optional[Union[str, Path]] = None):
    """
    Independent Q-learning to expert level on the unrotated domain. Saved to
    <out_dir>/experts/ and reused from there when present.
    """
    domain = config.domain.model_copy(update={"rotation_degrees": 0, "behavioral": "identity"})
    paths = []
    if out_dir is not None:
        stem = f"{domain.name.value}{'-' + domain.flip if domain.flip else ''}_seed{seed}"
        paths = [Path(out_dir) / "experts" / f"{stem}_agent{agent}.json" for agent in (0, 1)]
        if all(p.exists() for p in paths):
            return [load_learner(p) for p in paths]

    env = make_env(domain)
    learners = _learners(config, env)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7919]))
    result = run_phase1(env, learners, NoTeaching(), config.heuristic.expert_episodes,
                        behavioral_policies(env, domain), rng)
    logger.info(
        f"Pre-trained experts on {domain.name.value} (seed {seed}): final greedy return {result.curve[-1]:.4f}"
    )
    for learner, path in zip(learners, paths):
        save_learner(learner, path)
    return learners


def expert_knowledge(config: ExperimentConfig, seed: int, env, out_dir: Optional[Union[str, Path]] = None):
    """
    Teacher k answers with the expert for its student's role, so the knowledge
    tuple is (expert of agent j, expert of agent i).
    """
    if config.heuristic.expert_paths:
        if len(config.heuristic.expert_paths) != 2:
            raise ConfigError("heuristic.expert_paths needs one policy file per agent")
        experts = [load_learner(p) for p in config.heuristic.expert_paths]
    else:
        experts = pretrain_experts(config, seed, out_dir)
    for agent, expert in enumerate(experts):
        check_compatible(expert, env.observation_count, env.n_actions[agent])
    return (experts[1], experts[0])


def calibrate_veg_tau(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None) -> float:
    """
    VEG threshold: a fraction of the mean final start-state value estimate of
    no-teaching reference runs. Cached per domain in <out_dir>/calibration.json.
    """
    domain = config.domain
    key = f"{domain.name.value}-rot{domain.rotation_degrees}-{domain.flip or 'noflip'}-E{config.phase1_episodes}"
    cache_path = Path(out_dir) / "calibration.json" if out_dir is not None else None
    cache: Dict[str, float] = {}
    if cache_path is not None and cache_path.exists():
        cache = json.loads(cache_path.read_text())
        if key in cache:
            return float(cache[key])

    estimates = []
    for seed in CALIBRATION_SEEDS:
        env = make_env(domain)
        learners = _learners(config, env)
        run_phase1(env, learners, NoTeaching(), config.phase1_episodes, behavioral_policies(env, domain),
                   _streams(seed)[0])
        estimates.append(_start_value(learners, env))
    tau = config.rewards.veg_fraction * float(np.mean(estimates))
    if tau <= 0.0:
        logger.warning(f"No-teaching reference runs on {key} learned nothing; VEG threshold is {tau}")
    logger.info(f"Calibrated VEG threshold for {key}: {tau:.4f}")

    if cache_path is not None:
        cache[key] = tau
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        cache_path.write_text(json.dumps(cache, indent=2, sort_keys=True))
    return tau


def _policy_set(config: ExperimentConfig, env, rng: np.random.Generator) -> AdvisingPolicySet:
    if not config.advising.load_path:
        return AdvisingPolicySet(env.observation_count, env.n_actions, config.advising, rng)
    policy_set = AdvisingPolicySet.from_policy_file(load_policy(config.advising.load_path), rng)
    if policy_set.n_observations != env.observation_count or policy_set.n_actions != tuple(env.n_actions):
        raise PolicyFormatError(
            f"advising policies cover {policy_set.n_observations} observations x {policy_set.n_actions} actions, "
            f"domain needs {env.observation_count} x {tuple(env.n_actions)}"
        )
    return policy_set


def train(
    config: ExperimentConfig,
    seed: int,
    env=None,
    knowledge: Optional[Sequence] = None,
    save: bool = True,
    out_dir: Optional[Union[str, Path]] = None,
    label: Optional[str] = None,
) -> RunResult:
    """
    One run. Learned advising repeats (fresh task learners -> Phase I -> Phase II)
    for `phase2_episodes` generations and reports the last generation; heuristic
    and no-teaching algorithms run a single Phase I.
    """
    out_dir = Path(out_dir or config.out_dir)
    label = label or config.display_label
    env = env if env is not None else make_env(config.domain)
    behavioral = behavioral_policies(env, config.domain)
    episode_rng, net_rng, update_rng = _streams(seed)
    logger.info(f"Run {label} seed {seed} on {env.name}: {config.phase1_episodes} Phase I episodes")

    policy_set = None
    veg_tau = config.rewards.veg_tau
    reward_kind: Optional[RewardKind] = None
    if config.is_learned:
        policy_set = _policy_set(config, env, net_rng)
        reward_kind = config.rewards.kind
        if reward_kind == RewardKind.VEG and veg_tau is None:
            veg_tau = calibrate_veg_tau(config, out_dir)
        frozen = config.advising.freeze
        teaching: TeachingAlgorithm = LearnedTeaching(policy_set, "sample", knowledge, collect=not frozen)
        generations = 1 if frozen else config.phase2_episodes
    else:
        kind = config.heuristic_kind
        if kind == HeuristicKind.NONE:
            teaching = NoTeaching(knowledge)
        else:
            if knowledge is None and kind in EXPERT_KINDS:
                knowledge = expert_knowledge(config, seed, env, out_dir)
            h = config.heuristic
            state = HeuristicState.create(env.observation_count, h.threshold, h.budget, h.upsilon)
            teaching = HeuristicTeaching(kind, state, knowledge)
        generations = 1

    scaler = policy_set.scaler if policy_set is not None and config.rewards.scale else None
    phase2_stats = []
    for generation in range(generations):
        learners = _learners(config, env)
        phase1 = run_phase1(
            env, learners, teaching, config.phase1_episodes, behavioral, episode_rng,
            reward_kind=reward_kind,
            cost=config.rewards.cost,
            collect=teaching.collects_experience,
            veg_tau=veg_tau,
            jvg_rollouts=config.rewards.jvg_rollouts,
            scaler=scaler,
        )
        if teaching.collects_experience:
            stats = run_phase2(policy_set, phase1.steps, update_rng)
            phase2_stats.append(stats)
            logger.info(
                f"{label} seed {seed} generation {generation + 1}/{generations}: "
                f"mean greedy return {np.mean(phase1.curve) if phase1.curve else 0.0:.4f}, "
                f"advice {phase1.advice_counts}, critic loss {stats.mean_critic_loss:.5f}"
            )

    optimum = float(env.optimal_value(config.qlearn.gamma))
    v_bar = estimate_joint_value(env, learners, config.evaluation_rollouts)
    auc = float(np.sum(phase1.curve))
    episodes = len(phase1.curve)
    normalized_auc = auc / (episodes * optimum) if episodes and optimum > 0 else 0.0

    policy_paths = []
    if save:
        stem = out_dir / "policies" / f"{label}_seed{seed}"
        for agent, learner in enumerate(learners):
            policy_paths.append(str(save_learner(learner, f"{stem}_agent{agent}.json")))
        if policy_set is not None:
            policy_paths.append(str(save_policy(policy_set.to_policy_file(), f"{stem}_advising.json")))

    result = RunResult(
        label=label,
        algorithm=config.algorithm,
        domain=env.name,
        seed=seed,
        reward_kind=reward_kind.value if reward_kind is not None else None,
        cost=config.rewards.cost if config.is_learned else 0.0,
        curve=phase1.curve,
        training_returns=phase1.training_returns,
        advice_rate_curve=phase1.advice_rate_curve,
        advice_counts=phase1.advice_counts,
        v_bar=v_bar,
        auc=auc,
        normalized_auc=normalized_auc,
        optimum=optimum,
        phase2=phase2_stats,
        policy_paths=policy_paths,
    )
    logger.info(f"Finished {label} seed {seed}: V={v_bar:.4f} AUC={auc:.3f} normalized={normalized_auc:.3f}")
    return result


def evaluate(policy_paths: Sequence[Union[str, Path]], domain: DomainConfig, rollouts: int = 10) -> float:
    """Mean greedy, advice-free discounted return of saved task policies."""
    if rollouts < 1:
        raise ConfigError(f"rollouts must be >= 1, got {rollouts}")
    if len(policy_paths) != 2:
        raise ConfigError(f"evaluate needs one policy file per agent, got {len(policy_paths)}")
    env = make_env(domain)
    learners = [load_learner(p) for p in policy_paths]
    for agent, learner in enumerate(learners):
        check_compatible(learner, env.observation_count, env.n_actions[agent])
    return estimate_joint_value(env, learners, rollouts)


def transfer(
    config: ExperimentConfig,
    source_paths: Sequence[Union[str, Path]],
    axis: str,
    seed: int,
    out_dir: Optional[Union[str, Path]] = None,
    save: bool = True,
) -> RunResult:
    """
    Fresh learners train on the flipped domain while the source task policies
    act as fixed teacher knowledge.
    """
    if axis not in ("none", "horizontal", "vertical"):
        raise ConfigError(f"unknown flip axis '{axis}' (use none, horizontal or vertical)")
    if len(source_paths) != 2:
        raise ConfigError(f"transfer needs one source policy per agent, got {len(source_paths)}")
    domain = config.domain.model_copy(update={"flip": None if axis == "none" else axis})
    flipped = config.model_copy(update={"domain": domain})
    env = make_env(domain)
    sources = [load_learner(p) for p in source_paths]
    for agent, learner in enumerate(sources):
        check_compatible(learner, env.observation_count, env.n_actions[agent])
    label = f"{config.display_label}-transfer-{axis}"
    return train(flipped, seed, env=env, knowledge=sources, save=save, out_dir=out_dir, label=label)


def _run_cell(payload: Tuple[dict, int, str, str]) -> Union[RunResult, CellFailure]:
    config_data, seed, out_dir, label = payload
    config = ExperimentConfig.model_validate(config_data)
    try:
        return train(config, seed, out_dir=out_dir, label=label)
    except Exception as e:
        logger.warning(f"Cell {label} seed {seed} failed: {e}")
        return CellFailure(label=label, seed=seed, error=f"{type(e).__name__}: {e}")


def _unique_labels(configs: Sequence[ExperimentConfig]) -> List[str]:
    labels, seen = [], {}
    for config in configs:
        base = config.display_label
        seen[base] = seen.get(base, 0) + 1
        labels.append(base if seen[base] == 1 else f"{base}#{seen[base]}")
    return labels


def _prepare(config: ExperimentConfig, seeds: Sequence[int], out_dir: Path) -> ExperimentConfig:
    """Resolve everything shared between cells before they fan out."""
    if config.is_learned and config.rewards.kind == RewardKind.VEG and config.rewards.veg_tau is None:
        tau = calibrate_veg_tau(config, out_dir)
        config = config.model_copy(update={"rewards": config.rewards.model_copy(update={"veg_tau": tau})})
    kind = config.heuristic_kind
    if kind in EXPERT_KINDS and not config.heuristic.expert_paths:
        for seed in seeds:
            pretrain_experts(config, seed, out_dir)
    return config


def result_rows(results: Sequence[RunResult]) -> pd.DataFrame:
    rows = [
        {
            "label": r.label,
            "algorithm": r.algorithm,
            "domain": r.domain,
            "seed": r.seed,
            "reward_kind": r.reward_kind or "",
            "cost": r.cost,
            "v_bar": r.v_bar,
            "auc": r.auc,
            "normalized_auc": r.normalized_auc,
            "advice_i": r.advice_counts[0],
            "advice_j": r.advice_counts[1],
            "advice_per_episode": r.advice_per_episode,
        }
        for r in results
    ]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def write_run_artifacts(results: Sequence[RunResult], out_dir: Union[str, Path]) -> Path:
    """results.csv plus one curve file per run."""
    out_dir = Path(out_dir)
    (out_dir / "curves").mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    result_rows(results).to_csv(csv_path, index=False)
    for r in results:
        rates = r.advice_rate_curve or [[0.0, 0.0]] * len(r.curve)
        training = r.training_returns or [float("nan")] * len(r.curve)
        pd.DataFrame({
            "episode": np.arange(len(r.curve)),
            "greedy_return": r.curve,
            "training_return": training,
            "advice_rate_i": [rate[0] for rate in rates],
            "advice_rate_j": [rate[1] for rate in rates],
        }).to_csv(out_dir / "curves" / f"{r.label}_seed{r.seed}.csv", index=False)
    logger.info(f"Wrote {len(results)} result rows to {csv_path}")
    return csv_path


def record_runs(results: Sequence[RunResult], configs: Dict[str, ExperimentConfig]) -> None:
    init_db()
    db = SessionLocal()
    try:
        for result in results:
            save_run(db, result, configs.get(result.label))
    finally:
        db.close()


def summarize(results: Sequence[RunResult], failures: Sequence[CellFailure] = (),
              significance: float = 0.05) -> ComparisonReport:
    df = result_rows(results)
    labels = list(dict.fromkeys(df["label"]))
    samples = {metric: {label: df.loc[df["label"] == label, metric].to_numpy() for label in labels}
               for metric in METRICS}

    p_values: Dict[str, Dict[str, Dict[str, float]]] = {}
    for metric in METRICS:
        table: Dict[str, Dict[str, float]] = {label: {} for label in labels}
        for a, b in product(labels, labels):
            if a == b or len(samples[metric][a]) < 2 or len(samples[metric][b]) < 2:
                continue
            table[a][b] = welch_t_test(samples[metric][a], samples[metric][b])
        p_values[metric] = table

    def winners(metric: str) -> set:
        if not labels:
            return set()
        means = {label: float(np.mean(samples[metric][label])) for label in labels}
        best = max(labels, key=lambda label: means[label])
        tied = {label for label in labels
                if label != best and not is_significant(p_values[metric][best].get(label, 1.0), significance)}
        return {best} | tied

    best_v_bar, best_auc = winners("v_bar"), winners("auc")
    summaries = []
    for label in labels:
        def summary(metric: str) -> MetricSummary:
            values = samples[metric][label]
            return MetricSummary(
                mean=float(np.mean(values)),
                std=float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
            )

        summaries.append(AlgorithmSummary(
            label=label,
            runs=len(samples["v_bar"][label]),
            v_bar=summary("v_bar"),
            auc=summary("auc"),
            normalized_auc=summary("normalized_auc"),
            advice_per_episode=summary("advice_per_episode"),
            best_v_bar=label in best_v_bar,
            best_auc=label in best_auc,
        ))
    return ComparisonReport(algorithms=summaries, p_values=p_values, failures=list(failures),
                            significance=significance)


def compare(
    configs: Sequence[ExperimentConfig],
    seeds: Sequence[int],
    out_dir: Union[str, Path],
    max_workers: int = 1,
    persist: bool = True,
) -> ComparisonReport:
    """Every (algorithm, seed) cell, aggregated with Welch tests at p < 0.05."""
    if len(configs) < 2:
        raise ConfigError(f"compare needs at least 2 algorithms, got {len(configs)}")
    if len(seeds) < 2:
        raise ConfigError(f"compare needs at least 2 seeds, got {len(seeds)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    labels = _unique_labels(configs)
    prepared = [_prepare(config, seeds, out_dir) for config in configs]
    payloads = [
        (config.model_dump(mode="json"), seed, str(out_dir), label)
        for config, label in zip(prepared, labels)
        for seed in seeds
    ]
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            outcomes = list(executor.map(_run_cell, payloads))
    else:
        outcomes = [_run_cell(payload) for payload in payloads]

    results = [o for o in outcomes if isinstance(o, RunResult)]
    failures = [o for o in outcomes if isinstance(o, CellFailure)]
    report = summarize(results, failures)

    write_run_artifacts(results, out_dir)
    (out_dir / "summary.json").write_text(report.model_dump_json(indent=2))
    if persist:
        record_runs(results, dict(zip(labels, prepared)))
    logger.info(f"Compared {len(labels)} algorithms over {len(seeds)} seeds ({len(failures)} failed cells)")
    return report


def sweep_configs(
    base: ExperimentConfig,
    algorithms: Optional[Sequence[str]] = None,
    kinds: Optional[Sequence[RewardKind]] = None,
    rotations: Optional[Sequence[int]] = None,
    costs: Optional[Sequence[float]] = None,
) -> List[ExperimentConfig]:
    """Grid over algorithms x reward kinds x rotations x costs; kinds and costs only vary learned runs."""
    algorithms = list(algorithms or [base.algorithm])
    kinds = list(kinds or [base.rewards.kind])
    rotations = list(rotations if rotations is not None else [base.domain.rotation_degrees])
    costs = list(costs if costs is not None else [base.rewards.cost])

    configs, seen = [], set()
    for algorithm, rotation in product(algorithms, rotations):
        grid = product(kinds, costs) if algorithm.lower() == LEARNED else [(base.rewards.kind, base.rewards.cost)]
        for kind, cost in grid:
            data = base.model_dump(mode="json")
            data["algorithm"] = algorithm
            data["label"] = None
            data["domain"]["rotation_degrees"] = rotation
            data["rewards"]["kind"] = RewardKind(kind).value
            data["rewards"]["cost"] = cost
            config = ExperimentConfig.model_validate(data)
            if config.display_label not in seen:
                seen.add(config.display_label)
                configs.append(config)
    return configs


def sweep(base: ExperimentConfig, seeds: Sequence[int], out_dir: Union[str, Path], max_workers: int = 1,
          **grid) -> ComparisonReport:
    return compare(sweep_configs(base, **grid), seeds, out_dir, max_workers)
