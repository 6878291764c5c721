"""Command line: train, eval, quantize, convert, bench, show-config.

Exit codes: 0 success, 1 runtime failure, 2 bad configuration or input
files, 3 evaluation-protocol mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .actors import DeepActor, SpikingActor, as_policy
from .bench import format_bench, run_bench
from .config import TrainConfig, preset
from .errors import ConfigError, ProtocolError
from .evaluate import EvalReport, collect_states, evaluate, generate_pairs
from .lif import LifConfig
from .quantize import DEFAULT_GRID, dnn_snn_convert, quantize_san
from .serialize import load_model, save_model
from .simworld import resolve_world
from .stbp import PseudoGradConfig
from .training import run_training

log = logging.getLogger("sddpg")

EXIT_RUNTIME, EXIT_CONFIG, EXIT_PROTOCOL = 1, 2, 3


def load_config(args) -> TrainConfig:
    cfg = TrainConfig.load(args.config) if args.config else preset(args.preset)
    overrides = {}
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            overrides[key] = json.loads(value)
        except json.JSONDecodeError:
            overrides[key] = value
    if getattr(args, "actor", None):
        overrides["actor"] = args.actor
    if overrides:
        cfg = TrainConfig.from_dict({**cfg.to_dict(), **overrides})
    return cfg


def cmd_train(args) -> int:
    cfg = load_config(args)
    out = Path(args.out_dir)
    seeds = args.seed
    for seed in seeds:
        run_dir = out if len(seeds) == 1 else out / f"seed{seed}"
        log.info("training %s actor, seed %d -> %s", cfg.actor, seed, run_dir)
        res = run_training(cfg, seed, out_dir=run_dir, resume_from=args.resume)
        goals = sum(r["outcome"] == "goal" for r in res.log_rows)
        print(f"seed {seed}: {len(res.log_rows)} episodes, {goals} reached the goal, models in {run_dir}")
    return 0


def cmd_eval(args) -> int:
    cfg = load_config(args)
    world = resolve_world(args.world or cfg.eval_world)
    episodes = args.episodes or cfg.eval_episodes
    separation = cfg.eval_min_separation if args.min_separation is None else args.min_separation
    # one start/goal set per seed, shared by every model
    pairs = generate_pairs(world, episodes, separation, args.seed)
    methods = args.method or [Path(m).parent.name or Path(m).stem for m in args.model]
    if len(methods) != len(args.model):
        raise ConfigError("give one --method name per --model")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for path, method in zip(args.model, methods):
        policy = as_policy(load_model(path))
        rep = evaluate(policy, method, world, pairs, args.seed, cfg.kinematics, cfg.reward,
                       cfg.observation, cfg.max_episode_steps, args.workers)
        rep.save(out / f"eval_{method}.csv")
        rates = rep.rates()
        print(f"{method}: success {rates['goal']:.3f} collision {rates['collision']:.3f} "
              f"timeout {rates['timeout']:.3f} ({len(rep.episodes)} episodes, pairs {rep.pairs_hash})")
    return 0


def cmd_quantize(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, SpikingActor):
        raise ConfigError(f"{args.model} is not a spiking actor")
    q = quantize_san(model.params, model.lif.v_th, args.w_max_int, model.lif)
    save_model(args.out, q)
    print(f"ratios {[round(r, 3) for r in q.ratios]}, thresholds {q.v_th} -> {args.out}")
    return 0


def cmd_convert(args) -> int:
    cfg = load_config(args)
    model = load_model(args.model)
    if not isinstance(model, DeepActor):
        raise ConfigError(f"{args.model} is not a deep actor")
    if args.calibration:
        states = np.load(args.calibration)
    else:
        world = resolve_world(args.world or cfg.curriculum[-1][0])
        states = collect_states(model, world, args.states, args.seed, cfg.kinematics, cfg.reward,
                                cfg.observation, cfg.max_episode_steps)
    lif = LifConfig(cfg.v_th, cfg.d_c, cfg.d_v, args.T or cfg.T)
    grid = tuple(args.grid) if args.grid else DEFAULT_GRID
    res = dnn_snn_convert(model.params, lif, states, grid, seed=args.seed)
    save_model(args.out, SpikingActor(res.params, lif, PseudoGradConfig()))
    print(f"T={lif.T} scales {res.scales} mean action error {res.error:.4f} -> {args.out}")
    return 0


def cmd_bench(args) -> int:
    reports = [EvalReport.load(p) for p in args.reports]
    worlds = {}
    for r in reports:
        try:
            worlds[r.world] = resolve_world(r.world)
        except ConfigError:
            pass
    rows = run_bench(reports, args.out_dir, worlds)
    sys.stdout.write(format_bench(rows))
    return 0


def cmd_show_config(args) -> int:
    print(json.dumps(load_config(args).to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sddpg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--preset", choices=["paper", "desk"], default="desk")
        p.add_argument("--config", help="JSON config file (overrides --preset)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config field; VALUE is parsed as JSON when possible")
        return p

    p = with_config(sub.add_parser("train", help="train one model per seed"))
    p.add_argument("--seed", type=int, nargs="+", default=[0])
    p.add_argument("--actor", choices=["san", "ddpg", "ddpg-poisson"])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resume", help="stage checkpoint to continue from")
    p.set_defaults(func=cmd_train)

    p = with_config(sub.add_parser("eval", help="evaluate models on one shared start/goal set"))
    p.add_argument("--model", nargs="+", required=True)
    p.add_argument("--method", nargs="+", help="names for the models (default: their directory)")
    p.add_argument("--world")
    p.add_argument("--episodes", type=int)
    p.add_argument("--min-separation", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("quantize", help="8-bit integer copy of a spiking actor")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--w-max-int", type=int, default=127)
    p.set_defaults(func=cmd_quantize)

    p = with_config(sub.add_parser("convert", help="deep actor to spiking actor by rate conversion"))
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--T", type=int)
    p.add_argument("--calibration", help=".npy array of observations")
    p.add_argument("--world", help="collect calibration states here instead")
    p.add_argument("--states", type=int, default=1000)
    p.add_argument("--grid", type=float, nargs="+")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("bench", help="comparison table and figures from eval reports")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_bench)

    p = with_config(sub.add_parser("show-config", help="print the effective configuration"))
    p.set_defaults(func=cmd_show_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, ArithmeticError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
