"""Command line front end.

    envy-condensation run       --config CFG [--seed S] [--out-dir DIR]
    envy-condensation sweep     --config CFG [--replicates R] [--threads T]
    envy-condensation scatter   --config CFG [--epsilon E]
    envy-condensation ultimatum [--epsilon E]
    envy-condensation oracle    [--seed S] [--replicates R]

Exit status: 0 on success, 1 for usage or config errors, 2 when a run or a
write fails.  Data goes to files in the output directory (``--out-dir``,
else ``$OUT_DIR``, else ``./out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import __version__
from .dynamics import DegenerateStateError
from .io import (
    AGENT_COLUMNS,
    PAYOFF_COLUMNS,
    REPLICATE_COLUMNS,
    SWEEP_COLUMNS,
    ULTIMATUM_COLUMNS,
    ConfigError,
    OutputError,
    RunManifest,
    agent_rows,
    emit_reports,
    fmt,
    format_config,
    parse_config,
    payoff_rows,
    replicate_rows,
    sweep_rows,
    ultimatum_rows,
)
from .oracles import brute_force_pure_nash, check_fixed_point
from .sweeps import ExperimentConfig, ExperimentError, epsilon_sweep, run_experiment, with_overrides
from .ultimatum import DEFAULT_GRID, threshold_curve

ORACLE_SIZES = ((2, 2), (2, 3), (3, 2), (3, 3))
ORACLE_COLUMNS = ("agents", "options", "seed", "assignment", "min_purity", "is_nash", "n_equilibria")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for runtime failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="INI config file or a previous manifest.json")
    common.add_argument("--seed", type=int, help="seed (base seed for replicate ensembles)")
    common.add_argument("--out-dir", type=Path, help="output directory (default $OUT_DIR or ./out)")
    common.add_argument("--epsilon", type=float, help="override the envy level")
    common.add_argument("--variant", help="income-envy, divide-the-cake or reward-envy")
    common.add_argument("--iterations", type=int, help="replicator steps per run")
    common.add_argument("--replicates", type=int, help="replicates per grid point")
    common.add_argument("--threads", type=int, default=1, help="concurrent runs (never splits a run)")

    ap = _Parser(prog="envy-condensation", description="Envy-driven strategy condensation simulations.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, text in [
        ("run", "single population: agents.csv, payoffs.csv"),
        ("sweep", "replicate ensembles over epsilon_grid: sweep.csv, sweep_replicates.csv"),
        ("scatter", "heterogeneous envy run: per-agent envy, income and class"),
        ("ultimatum", "acceptance thresholds over an epsilon grid"),
        ("oracle", "replicator fixed points versus enumerated pure equilibria"),
    ]:
        sub.add_parser(name, parents=[common], help=text, description=text)
    return ap


def resolve_config(args) -> ExperimentConfig:
    config = parse_config(args.config) if args.config else ExperimentConfig()
    for key, val in [("iterations", args.iterations), ("replicates", args.replicates)]:
        if val is not None and val < 1:
            raise ConfigError(f"--{key} must be >= 1")
    try:
        config = with_overrides(
            config,
            epsilon=args.epsilon,
            variant=args.variant,
            iterations=args.iterations,
            replicates=args.replicates,
            base_seed=args.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.seed is not None:
        # --seed wins over an explicit seed list in the config
        config = replace(config, seeds=None)
    return config


def _manifest(config: ExperimentConfig, command: str, seeds) -> RunManifest:
    return RunManifest(
        config_text=format_config(config),
        command=command,
        tool_version=__version__,
        seeds=list(seeds),
    )


def cmd_run(config: ExperimentConfig, args, out: Path) -> int:
    seed = config.base_seed
    t0 = time.perf_counter()
    run = run_experiment(config, config.epsilon, seed)
    wall = time.perf_counter() - t0
    man = _manifest(config, "run", [seed])
    man.wall_clock.append({"epsilon": config.epsilon, "seed": seed, "seconds": wall})
    emit_reports(
        out,
        {
            "agents.csv": (AGENT_COLUMNS, agent_rows(run)),
            "payoffs.csv": (PAYOFF_COLUMNS, payoff_rows(run, config.profile())),
        },
        man,
    )
    return 0


def _timed_runner(log: list):
    def runner(config, eps, seed):
        t0 = time.perf_counter()
        res = run_experiment(config, eps, seed)
        log.append({"epsilon": eps, "seed": seed, "seconds": time.perf_counter() - t0})
        return res

    return runner


def cmd_sweep(config: ExperimentConfig, args, out: Path) -> int:
    if args.epsilon is not None:
        config = with_overrides(config, epsilon_grid=(args.epsilon,))
    if not config.epsilon_grid:
        raise ConfigError("sweep needs a non-empty epsilon_grid (config key or --epsilon)")
    log: list = []
    records = epsilon_sweep(config, threads=args.threads, runner=_timed_runner(log))
    failed = 0
    for rec in records:
        for seed, msg in rec.failures:
            failed += 1
            print(f"warning: epsilon={rec.epsilon} seed={seed} failed: {msg}", file=sys.stderr)
    man = _manifest(config, "sweep", config.replicate_seeds())
    man.wall_clock = sorted(log, key=lambda d: (d["epsilon"], d["seed"]))
    emit_reports(
        out,
        {
            "sweep.csv": (SWEEP_COLUMNS, sweep_rows(records)),
            "sweep_replicates.csv": (REPLICATE_COLUMNS, replicate_rows(records)),
        },
        man,
    )
    return 2 if failed == sum(len(r.failures) + len(r.replicates) for r in records) else 0


def cmd_scatter(config: ExperimentConfig, args, out: Path) -> int:
    config = replace(config, envy_mode="per-agent-uniform")
    return cmd_run(config, args, out)


def cmd_ultimatum(config: ExperimentConfig, args, out: Path) -> int:
    if args.epsilon is not None:
        grid = (args.epsilon,)
    else:
        grid = config.epsilon_grid if args.config and config.epsilon_grid else DEFAULT_GRID
    rows = ultimatum_rows(threshold_curve(grid))
    man = _manifest(with_overrides(config, epsilon_grid=tuple(grid)), "ultimatum", [])
    emit_reports(out, {"ultimatum.csv": (ULTIMATUM_COLUMNS, rows)}, man)
    return 0


def cmd_oracle(config: ExperimentConfig, args, out: Path) -> int:
    seeds = config.replicate_seeds() if args.replicates or args.seed is not None else list(range(20))
    rows = []
    bad = 0
    for M, N in ORACLE_SIZES:
        sized = replace(config, agents=M, options=N, epsilon=0.0, envy_mode="uniform")
        profile = sized.profile()
        params = sized.model_params(0.0, 0)
        eq = brute_force_pure_nash(profile, params)
        for s in seeds:
            chk = check_fixed_point(profile, replace(params, seed=s), s, eq)
            bad += not chk.is_nash
            rows.append([M, N, s, " ".join(map(str, chk.assignment)), fmt(chk.min_purity), int(chk.is_nash), len(eq)])
    emit_reports(out, {"oracle.csv": (ORACLE_COLUMNS, rows)}, _manifest(config, "oracle", seeds))
    if bad:
        print(f"oracle: {bad} fixed points are not pure equilibria", file=sys.stderr)
        return 2
    return 0


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "scatter": cmd_scatter,
    "ultimatum": cmd_ultimatum,
    "oracle": cmd_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(args)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out = args.out_dir or Path(os.environ.get("OUT_DIR") or "out")
    try:
        return COMMANDS[args.command](config, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ExperimentError, DegenerateStateError, OutputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
