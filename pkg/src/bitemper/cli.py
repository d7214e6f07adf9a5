"""Command-line harness: run experiments, oracle checks, fixture listing.

Subcommands:
    run       execute an experiment config across seeds, write CSVs + manifest
    oracle    exact stationarity check of the step kernels for a small config
    fixtures  list the shipped experiment configs
"""
from __future__ import annotations

import argparse
import concurrent.futures
import importlib.resources
import json
import os
import sys
import time

from . import __version__
from .config import ConfigError, ExperimentConfig, config_hash, load_config
from .diagnostics import (ORACLE_DIM_CAP, expected_stationary, kernel_oracle,
                          tvd, write_gamma_csv, write_hits_csv, write_runs_csv,
                          write_swaps_csv, write_tvd_csv)
from .tempering import run_pt

OUT_ENV_VAR = "BITEMPER_OUT"
FIXTURES = ("bimodal16", "sevenmode16", "highdim1000", "highdim3000",
            "highdim5000", "highdim7000", "scaled200")
ORACLE_KINDS = ("mh", "ss_iit", "rf_mh", "mh_mult", "iit", "aiit")


def fixture_path(name: str):
    res = importlib.resources.files("bitemper.fixtures") / f"{name}.json"
    if not res.is_file():
        raise FileNotFoundError(f"no fixture named {name!r}")
    return res


def resolve_config(arg: str):
    """Map a shipped fixture name to its path; leave real paths untouched."""
    if arg in FIXTURES and not os.path.exists(arg):
        return fixture_path(arg)
    return arg


def run_one(config: ExperimentConfig, label: str, seed: int,
            rounds: int | None = None):
    """One (ladder, seed) run; top-level so worker processes can import it."""
    opts = config.pt_options(label, rounds)
    return run_pt(config.target, config.ladders[label], opts, seed)


def _run_task(args):
    config_raw, label, seed, rounds = args
    from .config import parse_config
    config = parse_config(config_raw)
    return run_pt(config.target, config.ladders[label],
                  config.pt_options(label, rounds), seed)


def execute(config: ExperimentConfig, seeds, workers: int = 1,
            rounds: int | None = None):
    """All (ladder, seed) runs in a deterministic order; returns summaries."""
    tasks = [(config.raw, label, seed, rounds)
             for label in config.ladders for seed in seeds]
    if workers > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_task, tasks))
    return [_run_task(t) for t in tasks]


def write_outputs(out_dir, config: ExperimentConfig, seeds, summaries) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_runs_csv(os.path.join(out_dir, "runs.csv"), summaries)
    write_hits_csv(os.path.join(out_dir, "hits.csv"), summaries)
    write_tvd_csv(os.path.join(out_dir, "tvd.csv"), summaries)
    write_swaps_csv(os.path.join(out_dir, "swaps.csv"), summaries)
    write_gamma_csv(os.path.join(out_dir, "gamma.csv"), summaries)
    manifest = {
        "name": config.name,
        "config_sha256": config_hash(config),
        "seeds": list(seeds),
        "ladders": list(config.ladders),
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def cmd_run(args) -> int:
    try:
        config = load_config(resolve_config(args.config))
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.seed_list is not None:
        seeds = args.seed_list
    elif args.seeds is not None:
        seeds = [config.seed + i for i in range(args.seeds)]
    else:
        seeds = [config.seed]
    out_dir = args.out or os.environ.get(OUT_ENV_VAR, ".")
    try:
        summaries = execute(config, seeds, args.workers, args.rounds)
        write_outputs(out_dir, config, seeds, summaries)
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {e}", file=sys.stderr)
        return 1
    print(f"wrote {len(summaries)} run(s) to {out_dir}")
    return 0


def cmd_oracle(args) -> int:
    try:
        config = load_config(resolve_config(args.config))
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    t = config.target
    if t.p > ORACLE_DIM_CAP:
        print(f"error: oracle needs p <= {ORACLE_DIM_CAP}, config has p={t.p}",
              file=sys.stderr)
        return 2
    from .balancing import BalancingSpec
    spec = BalancingSpec("bounded_sqrt", max(config.gamma0, 2.0))
    worst = 0.0
    for kind in ORACLE_KINDS:
        _, pi = kernel_oracle(kind, t, spec)
        d = tvd(pi, expected_stationary(kind, t, spec))
        worst = max(worst, d)
        print(f"{kind:10s} stationary TVD = {d:.3e}")
    return 0 if worst <= 1e-9 else 1


def cmd_fixtures(_args) -> int:
    for name in FIXTURES:
        with fixture_path(name).open() as f:
            data = json.load(f)
        tags = ",".join(data.get("tags", [])) or "-"
        print(f"{name:12s} p={data['target']['p']:<5d} tags={tags}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bitemper",
        description="Tempered MCMC benchmark harness for binary state spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None,
                       help=f"output directory (default ${OUT_ENV_VAR} or .)")
    group = p_run.add_mutually_exclusive_group()
    group.add_argument("--seeds", type=int, default=None,
                       help="number of consecutive seeds from the config seed")
    group.add_argument("--seed-list", type=int, nargs="+", default=None)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--rounds", type=int, default=None,
                       help="override the configured round count")
    p_run.set_defaults(func=cmd_run)

    p_oracle = sub.add_parser("oracle", help="exact kernel stationarity check")
    p_oracle.add_argument("--config", required=True)
    p_oracle.set_defaults(func=cmd_oracle)

    p_fix = sub.add_parser("fixtures", help="list shipped experiment configs")
    p_fix.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
