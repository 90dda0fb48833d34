"""Command-line entry point: ``secvne generate|train|evaluate|compare``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .metrics import export_csv
from .persist import ALGORITHMS, FormatError, RunConfig, load_config, load_model, load_scenario, save_model
from .scenario import ConfigError, build_scenario, split_train_test

log = logging.getLogger("secvne")


def _config(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def _single_seed(args, cfg: RunConfig) -> int:
    seeds = args.seed or []
    if len(seeds) > 1:
        raise ConfigError("seed", "this command takes a single --seed")
    return seeds[0] if seeds else cfg.seeds[0]


def _scenario(args, cfg: RunConfig, seed: int):
    """Scenario from --scenario if given, otherwise generated in memory from config + seed."""
    if args.scenario:
        scfg, net, stream = load_scenario(args.scenario)
    else:
        scfg = harness.scenario_config_for(cfg, seed)
        net, stream = build_scenario(scfg)
    return scfg, net, stream


def cmd_generate(args) -> None:
    cfg = _config(args)
    seed = _single_seed(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    harness.generate(cfg, seed, out / "scenario.json")
    log.info("wrote %s", out / "scenario.json")


def cmd_train(args) -> None:
    cfg = _config(args)
    seed = _single_seed(args, cfg)
    scfg, net, stream = _scenario(args, cfg, seed)
    train_stream, _ = split_train_test(stream, scfg)
    model, result = harness.train_model(cfg, net, train_stream, seed, args.epochs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(out / "model.json", model)
    harness.write_training_csv(result, out / "training.csv")
    log.info("trained %d epochs, %d batch updates", model.epochs, model.updates)


def cmd_evaluate(args) -> None:
    cfg = _config(args)
    if args.algorithm and len(args.algorithm) > 1:
        raise ConfigError("algorithm", "evaluate takes a single --algorithm")
    algorithm = (args.algorithm or [cfg.algorithm])[0]
    if algorithm == "css-rl" and not args.model:
        raise ConfigError("model", "css-rl evaluation requires --model")
    if algorithm != "css-rl" and args.model:
        raise ConfigError("model", f"{algorithm} takes no model")
    seed = _single_seed(args, cfg)
    scfg, net, stream = _scenario(args, cfg, seed)
    _, test_stream = split_train_test(stream, scfg)
    model = load_model(args.model) if args.model else None
    series = harness.evaluate_algorithm(algorithm, net, test_stream, model, cfg.window)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_csv(series, out / f"metrics_{algorithm}.csv")


def cmd_compare(args) -> None:
    cfg = _config(args)
    if args.epochs is not None:
        cfg.epochs = args.epochs
    algorithms = args.algorithm or list(ALGORITHMS)
    seeds = args.seed or cfg.seeds
    summaries = harness.compare(cfg, algorithms, seeds, args.out, args.jobs)
    table = harness.aggregate(summaries, algorithms)
    print(harness.SUMMARY_HEADER)
    for a in algorithms:
        t = table[a]
        print(f"{a},{t['runs']},{t['failed']},{t['mean_acc']:.4f},{t['mean_rc']:.4f},"
              f"{t['final_acc']:.4f},{t['final_rc']:.4f},{t['final_avg_revenue']:.4f}")
    if any(s.error for s in summaries):
        raise RuntimeError("some comparison runs failed; see log")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secvne", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeds_many=False):
        p.add_argument("--config", help="JSON run config (defaults built in)")
        p.add_argument("--seed", type=int, action="append",
                       help="seed (repeatable for compare)" if seeds_many else "seed")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("generate", help="write a substrate and request stream")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train the policy network")
    common(p)
    p.add_argument("--scenario", help="scenario.json from generate")
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="replay the test stream with one algorithm")
    common(p)
    p.add_argument("--scenario")
    p.add_argument("--algorithm", action="append", choices=ALGORITHMS)
    p.add_argument("--model", help="model.json from train (css-rl only)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run several algorithms on shared scenarios")
    common(p, seeds_many=True)
    p.add_argument("--algorithm", action="append", choices=ALGORITHMS)
    p.add_argument("--epochs", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "epochs", None) is not None and args.epochs < 0:
            raise ConfigError("epochs", "must be non-negative")
        args.func(args)
    except ConfigError as exc:
        print(f"secvne: config error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, FileNotFoundError, ValueError, RuntimeError, OSError) as exc:
        print(f"secvne: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
