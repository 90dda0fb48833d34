"""End-to-end runs: scenario generation, training, evaluation and multi-algorithm comparison."""

from __future__ import annotations

import csv
import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import make_baseline
from .metrics import CSV_HEADER, MetricsSeries, record_row
from .network import SubstrateNetwork
from .persist import ALGORITHMS, ModelArtifact, RunConfig, load_scenario, save_scenario
from .policy import PolicyParams, TrainingResult, evaluate, train
from .scenario import EventStream, ScenarioConfig, build_scenario, seed_streams, split_train_test
from .simulate import replay

log = logging.getLogger(__name__)

TRAINING_HEADER = "epoch,window,requests,acceptances,acc_ratio,revenue,cost,rc_ratio,avg_revenue,mean_reward"
SUMMARY_HEADER = "algorithm,runs,failed,mean_acc,mean_rc,final_acc,final_rc,final_avg_revenue"


def scenario_config_for(cfg: RunConfig, seed: int) -> ScenarioConfig:
    return dataclasses.replace(cfg.scenario, seed=seed)


def generate(cfg: RunConfig, seed: int, path) -> None:
    scfg = scenario_config_for(cfg, seed)
    net, stream = build_scenario(scfg)
    save_scenario(path, scfg, net, stream)


def train_model(cfg: RunConfig, net: SubstrateNetwork, train_stream: EventStream, seed: int,
                epochs: Optional[int] = None) -> tuple[ModelArtifact, TrainingResult]:
    epochs = cfg.epochs if epochs is None else epochs
    init_rng, sample_rng = seed_streams(seed)[2:4]
    params = PolicyParams.initialize(init_rng, cfg.learning_rate, cfg.batch_size)
    result = train(params, net, train_stream, epochs, sample_rng)
    return ModelArtifact(result.params, seed, epochs, result.updates), result


def evaluate_algorithm(name: str, net: SubstrateNetwork, test_stream: EventStream,
                       model: Optional[ModelArtifact] = None, window: float = 100.0) -> MetricsSeries:
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}")
    if name == "css-rl":
        if model is None:
            raise ValueError("css-rl evaluation needs a trained model")
        return evaluate(model.params, net, test_stream, window)
    if model is not None:
        raise ValueError(f"{name} is a heuristic and takes no model")
    work = net.copy()
    work.reset()
    return replay(work, test_stream, make_baseline(name, work), window=window)


def _f(x: float) -> str:
    return f"{x:.6f}"


def write_training_csv(result: TrainingResult, path) -> None:
    lines = [TRAINING_HEADER]
    for w in result.curves:
        lines.append(",".join([
            str(w.epoch), str(w.window), str(w.requests), str(w.acceptances), _f(w.acc_ratio),
            _f(w.revenue), _f(w.cost), _f(w.rc_ratio), _f(w.avg_revenue), _f(w.mean_reward),
        ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class RunSummary:
    algorithm: str
    seed: int
    mean_acc: float
    mean_rc: float
    final_acc: float
    final_rc: float
    final_avg_revenue: float
    error: str = ""


def summarize(algorithm: str, seed: int, series: MetricsSeries) -> RunSummary:
    recs = series.records
    if not recs:
        return RunSummary(algorithm, seed, 0.0, 1.0, 0.0, 1.0, 0.0)
    rcs = [r.rc_ratio for r in recs if r.rc_defined] or [1.0]
    last = recs[-1]
    return RunSummary(
        algorithm, seed,
        float(np.mean([r.acc_ratio for r in recs])), float(np.mean(rcs)),
        last.acc_ratio, last.rc_ratio, last.avg_revenue,
    )


def _run_one(task) -> tuple[str, int, Optional[list], str]:
    """One (algorithm, seed) comparison run in isolation; returns rows or an error."""
    algorithm, seed, scenario_path, cfg = task
    try:
        _, net, stream = load_scenario(scenario_path)
        train_stream, test_stream = split_train_test(stream, scenario_config_for(cfg, seed))
        model = None
        if algorithm == "css-rl":
            model, _ = train_model(cfg, net, train_stream, seed)
        series = evaluate_algorithm(algorithm, net, test_stream, model, cfg.window)
        return algorithm, seed, series.records, ""
    except Exception as exc:  # reported per run, other runs continue
        return algorithm, seed, None, f"{type(exc).__name__}: {exc}"


def compare(cfg: RunConfig, algorithms: list[str], seeds: list[int], out_dir, jobs: int = 1) -> list[RunSummary]:
    """Run every algorithm on the same per-seed scenario files.

    Writes ``scenarios/seed_<s>.json``, ``compare.csv`` (one row per
    algorithm, seed and window) and ``summary.csv`` (means over seeds).
    """
    if len(algorithms) < 2:
        raise ValueError("compare needs at least two algorithms")
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}")
    out = Path(out_dir)
    (out / "scenarios").mkdir(parents=True, exist_ok=True)
    paths = {}
    for seed in seeds:
        paths[seed] = out / "scenarios" / f"seed_{seed}.json"
        generate(cfg, seed, paths[seed])

    tasks = [(a, s, paths[s], cfg) for s in seeds for a in algorithms]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]

    rows = []
    summaries = []
    for algorithm, seed, records, error in results:
        if error:
            log.error("run %s seed %d failed: %s", algorithm, seed, error)
            summaries.append(RunSummary(algorithm, seed, float("nan"), float("nan"), float("nan"),
                                        float("nan"), float("nan"), error))
            continue
        series = MetricsSeries(records=records)
        summaries.append(summarize(algorithm, seed, series))
        for idx, rec in enumerate(records):
            rows.append([algorithm, str(seed), str(idx)] + record_row(rec))

    with open(out / "compare.csv", "w", newline="\n", encoding="utf-8") as fh:
        fh.write("algorithm,seed,window," + CSV_HEADER + "\n")
        for r in rows:
            fh.write(",".join(r) + "\n")
    write_summary(summaries, algorithms, out / "summary.csv")
    return summaries


def aggregate(summaries: list[RunSummary], algorithms: list[str]) -> dict[str, dict]:
    table = {}
    for a in algorithms:
        ok = [s for s in summaries if s.algorithm == a and not s.error]
        failed = sum(1 for s in summaries if s.algorithm == a and s.error)
        def mean(attr):
            return float(np.mean([getattr(s, attr) for s in ok])) if ok else float("nan")
        table[a] = {
            "runs": len(ok), "failed": failed,
            "mean_acc": mean("mean_acc"), "mean_rc": mean("mean_rc"),
            "final_acc": mean("final_acc"), "final_rc": mean("final_rc"),
            "final_avg_revenue": mean("final_avg_revenue"),
        }
    return table


def write_summary(summaries: list[RunSummary], algorithms: list[str], path) -> None:
    table = aggregate(summaries, algorithms)
    lines = [SUMMARY_HEADER]
    for a in algorithms:
        t = table[a]
        lines.append(",".join([a, str(t["runs"]), str(t["failed"])] + [
            _f(t[k]) for k in ("mean_acc", "mean_rc", "final_acc", "final_rc", "final_avg_revenue")
        ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
