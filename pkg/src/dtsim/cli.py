"""Command-line surface: reproducible simulation, search and analysis runs.

Commands write CSV artifacts plus a JSON manifest that embeds the effective
configuration verbatim, so every output file is traceable to the exact
inputs that produced it. Configuration precedence: command-line flags >
config file > built-in defaults; the DTSIM_SEED environment variable
overrides the built-in default seed only.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .core import SimulationConfig, category, strategy_from_category, validate_strategy
from .ingest import (
    DEFAULT_AMOUNT_MU,
    DEFAULT_AMOUNT_SIGMA,
    DEFAULT_DRIFT_SIGMA,
    DEFAULT_DRIFT_TAU_S,
    DatasetSpec,
    IrrationalMix,
    SchemaError,
    generate,
    inject_irrational,
    load_csv,
)
from .metrics import benchmark_check, rolling_volatility, series_volatility
from .optimize import (
    ALGORITHMS,
    OptimizerConfig,
    SearchSpace,
    constriction_params,
    evaluate,
    experiment_grid,
    grid_rows,
    run_optimizer,
    write_grid_csv,
    write_trace_csv,
)
from .simulator import DataError, run, write_assignments_csv, write_blocks_csv
from .verkle import (
    PUBLISHED_SCENARIOS,
    bandwidth_report,
    check_published_cells,
    graphene_integration_summary,
    write_bandwidth_csv,
)
from .vrp import MAX_ORACLE_BLOCKS, MAX_ORACLE_TXS, VrpInstance, brute_force_min_variance, variance_objective

ENV_SEED = "DTSIM_SEED"


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "simulation": {
        "leaf_capacity": "2100",
        "commission_ratio": "0.002",
        "arrival_rate_tps": "3.5",
        "verkle_branching_factor": "5",
        "seed": "0",
    },
    "dataset": {
        "count": "400000",
        "amount_mu": repr(DEFAULT_AMOUNT_MU),
        "amount_sigma": repr(DEFAULT_AMOUNT_SIGMA),
        "drift_sigma": repr(DEFAULT_DRIFT_SIGMA),
        "drift_tau_s": repr(DEFAULT_DRIFT_TAU_S),
    },
    "strategy": {
        "category": "2",
        "a1": "25469",
        "a6": "110",
        "a7": "6.94",
        "a8": "1.0",
    },
    "optimizer": {
        "algorithm": "pso",
        "n_pop": "50",
        "max_gen": "100",
        "pso_k": "1.0",
        "pso_phi1": "2.05",
        "pso_phi2": "2.05",
        "de_f": "0.5",
        "de_cr": "0.9",
        "ga_crossover_rate": "0.9",
        "gbo_escape_prob": "0.5",
    },
    "irrational": {
        "rational_fraction": "1.0",
        "overpaid_fraction": "0.0",
        "underpaid_fraction": "0.0",
        "over_multiplier_low": "1.5",
        "over_multiplier_high": "3.0",
        "under_multiplier_low": "0.1",
        "under_multiplier_high": "0.7",
    },
}


def default_config_text() -> str:
    parser = configparser.ConfigParser()
    for section, values in DEFAULTS.items():
        parser[section] = dict(values)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def load_config(path: str | None) -> tuple[dict, str, set]:
    """Layer a config file over the defaults.

    Returns (values, verbatim text, explicitly-set (section, key) pairs).
    """
    layered = {section: dict(values) for section, values in DEFAULTS.items()}
    explicit = set()
    if path is None:
        return layered, default_config_text(), explicit
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for section in parser.sections():
        if section not in layered:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in parser[section].items():
            if key not in layered[section]:
                raise ConfigError(f"unknown config key {key!r} in [{section}]")
            layered[section][key] = value
            explicit.add((section, key))
    return layered, Path(path).read_text(encoding="utf-8"), explicit


def _pick(flag, config_section, key, cast):
    if flag is not None:
        return flag
    return cast(config_section[key])


def _resolve_seed(args, config, explicit) -> int:
    """Seed precedence: --seed flag > config file > DTSIM_SEED > built-in 0."""
    if getattr(args, "seed", None) is not None:
        return args.seed
    if ("simulation", "seed") in explicit:
        return int(config["simulation"]["seed"])
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer, got {env!r}") from None
    return int(config["simulation"]["seed"])


def _sim_config(args, config, seed) -> SimulationConfig:
    sim = config["simulation"]
    return SimulationConfig(
        leaf_capacity=int(sim["leaf_capacity"]),
        commission_ratio=float(sim["commission_ratio"]),
        arrival_rate_tps=float(sim["arrival_rate_tps"]),
        rng_seed=seed,
        verkle_branching_factor=int(sim["verkle_branching_factor"]),
        transaction_budget=getattr(args, "budget_txs", None),
        block_count_target=getattr(args, "block_target", None),
    )


def _dataset(args, config, cfg: SimulationConfig, seed: int):
    """Load or synthesize the transaction stream per flags and config."""
    if getattr(args, "dataset", None) and getattr(args, "synthetic", False):
        raise ConfigError("--dataset and --synthetic are mutually exclusive")
    if getattr(args, "dataset", None):
        try:
            stream = load_csv(args.dataset, commission_ratio=cfg.commission_ratio)
        except OSError as exc:
            raise DataError(f"cannot read dataset: {exc}") from None
        if not stream:
            raise DataError(f"dataset {args.dataset} holds no transactions")
    else:
        ds = config["dataset"]
        spec = DatasetSpec(
            count=_pick(getattr(args, "count", None), ds, "count", int),
            arrival_rate_tps=cfg.arrival_rate_tps,
            commission_ratio=cfg.commission_ratio,
            amount_mu=float(ds["amount_mu"]),
            amount_sigma=float(ds["amount_sigma"]),
            drift_sigma=float(ds["drift_sigma"]),
            drift_tau_s=float(ds["drift_tau_s"]),
            rng_seed=seed,
        )
        stream = generate(spec)
    mix = _mix_from_config(config)
    if mix.rational_fraction < 1.0:
        stream = inject_irrational(stream, mix, seed + 1)
    return stream


def _mix_from_config(config) -> IrrationalMix:
    irr = config["irrational"]
    return IrrationalMix(
        rational_fraction=float(irr["rational_fraction"]),
        overpaid_fraction=float(irr["overpaid_fraction"]),
        underpaid_fraction=float(irr["underpaid_fraction"]),
        over_multiplier=(float(irr["over_multiplier_low"]), float(irr["over_multiplier_high"])),
        under_multiplier=(float(irr["under_multiplier_low"]), float(irr["under_multiplier_high"])),
    )


def _strategy(args, config):
    st = config["strategy"]
    cat_id = _pick(getattr(args, "category", None), st, "category", int)
    try:
        cat = category(cat_id)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    kwargs = {
        "a1": _pick(getattr(args, "a1", None), st, "a1", int),
        "a6": _pick(getattr(args, "a6", None), st, "a6", int),
        "a7": _pick(getattr(args, "a7", None), st, "a7", float),
        "a8": _pick(getattr(args, "a8", None), st, "a8", float),
    }
    if cat.designated_space:
        a4 = getattr(args, "a4", None) if getattr(args, "a4", None) is not None else st.get("a4")
        a5 = getattr(args, "a5", None) if getattr(args, "a5", None) is not None else st.get("a5")
        if a4 is None or a5 is None:
            raise ConfigError(f"category {cat.id} needs --a4 and --a5")
        kwargs["a4"] = float(a4)
        kwargs["a5"] = int(a5)
    else:
        if getattr(args, "a4", None) is not None or getattr(args, "a5", None) is not None:
            raise ConfigError(f"category {cat.id} has no designated space; drop --a4/--a5")
    try:
        return strategy_from_category(cat, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _write_manifest(out_dir: Path, command: str, seed: int, config_text: str,
                    outputs: list, wall_time: float, extras: dict | None = None):
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "package_version": __version__,
        "seed": seed,
        "config_digest": hashlib.sha256(config_text.encode()).hexdigest(),
        "config_text": config_text,
        "outputs": [str(p) for p in outputs],
        "wall_time_s": round(wall_time, 3),
    }
    if extras:
        manifest.update(extras)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args, config, config_text, explicit) -> int:
    t0 = time.perf_counter()
    seed = _resolve_seed(args, config, explicit)
    cfg = _sim_config(args, config, seed)
    strategy = _strategy(args, config)
    problems = validate_strategy(strategy, cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    stream = _dataset(args, config, cfg, seed)

    result = run(stream, strategy, cfg, force_seal=args.force_seal,
                 build_trees=args.verkle_roots)

    out = _out_dir(args)
    outputs = []
    blocks_path = out / "blocks.csv"
    write_blocks_csv(result.blocks, blocks_path)
    outputs.append(blocks_path)
    if not args.no_assignments:
        assign_path = out / "assignments.csv"
        write_assignments_csv(result.assignments, assign_path)
        outputs.append(assign_path)

    summary = {
        "blocks_sealed": len(result.blocks),
        "submitted": result.submitted_count,
        "included": result.included_count,
        "evicted": result.evicted_count,
        "rejected": result.rejected_count,
        "pending": result.pending_count,
        "unsealed": result.unsealed_count,
        "submitted_fees": result.submitted_fees,
        "block_fees": math.fsum(result.incentives),
    }
    if len(result.blocks) >= 3:
        vol = series_volatility(result.incentives)
        summary["volatility"] = vol
        summary["benchmark"] = benchmark_check(vol)
    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in summary.items():
            writer.writerow([key, repr(value) if isinstance(value, float) else value])
    outputs.append(summary_path)

    manifest = _write_manifest(out, "simulate", seed, config_text, outputs,
                               time.perf_counter() - t0,
                               {"strategy": strategy.attributes()})
    for key, value in summary.items():
        print(f"{key}: {value}")
    print(f"manifest: {manifest}")
    return 0


def cmd_optimize(args, config, config_text, explicit) -> int:
    t0 = time.perf_counter()
    seed = _resolve_seed(args, config, explicit)
    cfg = _sim_config(args, config, seed)
    opt = config["optimizer"]
    if args.budget is not None and args.budget < 1:
        raise ConfigError("--budget must be positive")
    base = OptimizerConfig(
        algorithm=args.algo or opt["algorithm"],
        n_pop=_pick(args.n_pop, opt, "n_pop", int),
        max_gen=_pick(args.max_gen, opt, "max_gen", int),
        n_eval=args.budget,
        de_f=float(opt["de_f"]),
        de_cr=float(opt["de_cr"]),
        ga_crossover_rate=float(opt["ga_crossover_rate"]),
        gbo_escape_prob=float(opt["gbo_escape_prob"]),
        rng_seed=seed,
    )
    w, c1, c2 = constriction_params(float(opt["pso_k"]), float(opt["pso_phi1"]),
                                    float(opt["pso_phi2"]))
    base = dataclasses.replace(base, w=w, c1=c1, c2=c2)

    stream = _dataset(args, config, cfg, seed)
    out = _out_dir(args)
    outputs = []

    if args.grid:
        runs = experiment_grid(stream, cfg, base_config=base, jobs=args.jobs)
    else:
        cat = category(args.category if args.category is not None else int(config["strategy"]["category"]))
        space = SearchSpace(category=cat)

        def objective(attrs):
            return evaluate([attrs[n] for n in space.names], cat, stream, cfg)

        runs = [run_optimizer(base.algorithm, space, objective, base)]

    rows = grid_rows(runs)
    grid_path = out / ("grid.csv" if args.grid else "result.csv")
    write_grid_csv(rows, grid_path)
    outputs.append(grid_path)
    for r in runs:
        trace_path = out / f"trace_{r.algorithm}_cat{r.category_id}.csv"
        write_trace_csv(r, trace_path)
        outputs.append(trace_path)

    manifest = _write_manifest(
        out, "optimize", seed, config_text, outputs, time.perf_counter() - t0,
        {"pso_derived": {"w": round(w, 6), "c1": round(c1, 6), "c2": round(c2, 6)},
         "budget": base.budget})
    for row in rows:
        print(f"{row['algorithm']} experiment {row['experiment']} "
              f"cat ({row['a2']}, space={row['a3']}): volatility {row['volatility']:.6f}")
    print(f"pso derived (w, c1, c2) = ({w:.2f}, {c1:.2f}, {c2:.2f})")
    print(f"manifest: {manifest}")
    return 0


def _parse_scenarios(text: str):
    scenarios = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" in part:
            name, _, num = part.partition("=")
            scenarios.append((name.strip(), int(num)))
        else:
            scenarios.append((part, int(part)))
    if not scenarios:
        raise ConfigError("no scenarios given")
    return scenarios


def cmd_proofsize(args, config, config_text, explicit) -> int:
    t0 = time.perf_counter()
    if args.scenarios:
        scenarios = _parse_scenarios(args.scenarios)
    else:
        scenarios = list(PUBLISHED_SCENARIOS) + [("Graphene-DTS", 540000)]
    ks = [int(k) for k in args.k.split(",")] if args.k else [3, 5, 10, 1024]
    for k in ks:
        if k < 2:
            raise ConfigError(f"branching factor must be >= 2, got {k}")
    for _name, n_t in scenarios:
        if n_t < 2:
            raise ConfigError(f"scenario size must be >= 2, got {n_t}")
    modes = ("smooth", "ceil") if args.mode == "both" else (args.mode,)

    rows = bandwidth_report(scenarios, ks, modes)
    for row in rows:
        print(f"{row['scenario']:>14s} n_t={row['n_t']:>7d} {row['structure']:6s} "
              f"k={row['k']:<5d} {row['mode']:6s} {row['bytes']:10.2f} bytes")

    published = check_published_cells()
    flagged = [c for c in published if not c["matches"]]
    print(f"published cells checked: {len(published)}, inconsistent: {len(flagged)}")
    for cell in flagged:
        print(f"  flagged: {cell['scenario']} {cell['structure']} k={cell['k']} "
              f"published {cell['published_bytes']} vs computed {cell['computed_bytes']:.2f}")
    summary = graphene_integration_summary()
    print(f"integration scenario n_t={summary.n_t}: merkle {summary.merkle_levels} levels "
          f"= {summary.merkle_proof_bytes:.0f} bytes; "
          f"k={summary.verkle_branching} proof {summary.verkle_proof_bytes:.1f} bytes")

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_bandwidth_csv(rows, out)
        _write_manifest(out.parent, "proofsize", _resolve_seed(args, config, explicit), config_text,
                        [out], time.perf_counter() - t0)
    return 0


def _read_assignments(path):
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            needed = {"tx_id", "block", "fee", "nodes"}
            if not needed.issubset(reader.fieldnames or ()):
                raise DataError(f"{path}: expected columns {sorted(needed)}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    rows.append((int(row["tx_id"]), int(row["block"]),
                                 float(row["fee"]), int(row["nodes"])))
                except (TypeError, ValueError) as exc:
                    raise DataError(f"{path}:{lineno}: malformed row: {exc}") from None
    except OSError as exc:
        raise DataError(f"cannot read assignments: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no assignment rows")
    return rows


def cmd_vrp_check(args, config, config_text, explicit) -> int:
    if args.oracle_max_n > MAX_ORACLE_TXS:
        raise ConfigError(f"--oracle-max-n is capped at {MAX_ORACLE_TXS}")
    if args.oracle_blocks > MAX_ORACLE_BLOCKS:
        raise ConfigError(f"--oracle-blocks is capped at {MAX_ORACLE_BLOCKS}")
    assignments_path = args.assignments
    if assignments_path is None:
        assignments_path = Path(args.blocks).with_name("assignments.csv")
    rows = _read_assignments(assignments_path)
    capacity = int(config["simulation"]["leaf_capacity"])

    # Full-chain constraint check.
    tx_rows = {}
    duplicates = []
    for tx_id, block, fee, nodes in rows:
        if tx_id in tx_rows:
            duplicates.append(tx_id)
        else:
            tx_rows[tx_id] = (block, fee, nodes)
    violations = [f"transaction {t} assigned more than once" for t in duplicates]
    block_ids = sorted({block for _, block, _, _ in rows})
    demand = {b: 0 for b in block_ids}
    for tx_id, (block, fee, nodes) in tx_rows.items():
        demand[block] += nodes
    for b in block_ids:
        if demand[b] > capacity:
            violations.append(f"block {b} demand {demand[b]} exceeds capacity {capacity}")

    print(f"transactions: {len(tx_rows)}, blocks: {len(block_ids)}, capacity: {capacity}")
    if violations:
        print(f"violations ({len(violations)}):")
        for v in violations:
            print(f"  {v}")
    else:
        print("violations (0): none")

    if args.target_incentive is not None:
        # Depot-style report: how far block incomes sit from the target level.
        sums = {b: 0.0 for b in block_ids}
        for _tx_id, (block, fee, _nodes) in tx_rows.items():
            sums[block] += fee
        deviations = [abs(sums[b] - args.target_incentive) for b in block_ids]
        print(f"target incentive {args.target_incentive!r}: "
              f"mean |deviation| {sum(deviations) / len(deviations)!r}, "
              f"max |deviation| {max(deviations)!r}")

    # Oracle gap on a truncated instance: first few blocks, first few txs.
    chosen_blocks = block_ids[: args.oracle_blocks]
    truncated = [(tx_id, block, fee, nodes) for tx_id, block, fee, nodes in rows
                 if block in chosen_blocks][: args.oracle_max_n]
    if truncated and not duplicates:
        fees = tuple(fee for _, _, fee, _ in truncated)
        demands = tuple(nodes for _, _, _, nodes in truncated)
        instance = VrpInstance(fees=fees, demands=demands, capacity=capacity)
        block_index = {b: i for i, b in enumerate(chosen_blocks)}
        actual_rows = tuple(
            tuple(1 if block_index[block] == k else 0 for k in range(len(chosen_blocks)))
            for _, block, _, _ in truncated
        )
        from .vrp import AssignmentMatrix

        actual = AssignmentMatrix(rows=actual_rows,
                                  tx_ids=tuple(t for t, _, _, _ in truncated))
        actual_var = variance_objective(actual, fees)
        _witness, best_var = brute_force_min_variance(instance, len(chosen_blocks))
        gap = actual_var - best_var
        print(f"oracle instance: {len(truncated)} txs over {len(chosen_blocks)} blocks")
        print(f"assignment variance: {actual_var!r}")
        print(f"oracle minimum variance: {best_var!r}")
        print(f"gap (assignment - optimum, >= 0): {gap!r}")
        if gap < -1e-9:
            print("ERROR: greedy assignment beats exhaustive optimum; invariant broken")
            return 1
    return 0


def cmd_volatility(args, config, config_text, explicit) -> int:
    try:
        with open(args.infile, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise DataError(f"{args.infile}: empty file")
            column = args.column
            if column not in reader.fieldnames:
                raise DataError(
                    f"{args.infile}: no column {column!r}; available: {reader.fieldnames}")
            values = []
            bad_rows = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    v = float(row[column])
                except (TypeError, ValueError):
                    raise DataError(f"{args.infile}:{lineno}: non-numeric value") from None
                if v <= 0:
                    bad_rows.append((lineno, v))
                values.append(v)
    except OSError as exc:
        raise DataError(f"cannot read input: {exc}") from None
    if bad_rows:
        listing = ", ".join(f"line {ln} ({v})" for ln, v in bad_rows[:10])
        raise DataError(f"non-positive incentives at: {listing}"
                        + (" ..." if len(bad_rows) > 10 else ""))
    if len(values) < 2:
        raise DataError("need at least two incentives")

    if args.window is not None:
        if args.window < 2:
            raise ConfigError("--window must be >= 2")
        series = rolling_volatility(values, args.window)
        print(f"rolling volatility, window {args.window}: {len(series)} values")
        print(f"first {series[0]!r}, last {series[-1]!r}")
        if args.out:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["index", "volatility"])
                for i, v in enumerate(series):
                    writer.writerow([i, repr(v)])
        overall = series_volatility(values)
    else:
        overall = series_volatility(values)
    print(f"volatility: {overall!r}")
    print(f"benchmark: {benchmark_check(overall)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtsim",
        description="Fee-driven dynamic block-space simulation and strategy search.")
    parser.add_argument("--print-defaults", action="store_true",
                        help="print the default configuration and exit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file layered over built-in defaults")
    common.add_argument("--seed", type=int, help="run seed (overrides config and DTSIM_SEED)")
    sub = parser.add_subparsers(dest="command")

    sim = sub.add_parser("simulate", parents=[common], help="run one strategy over a stream")
    sim.add_argument("--dataset", help="transaction CSV (default: synthetic stream)")
    sim.add_argument("--synthetic", action="store_true", help="force synthetic stream")
    sim.add_argument("--count", type=int, help="synthetic stream length")
    sim.add_argument("--category", type=int, choices=(1, 2, 3, 4))
    sim.add_argument("--a1", type=int, help="mempool size")
    sim.add_argument("--a4", type=float, help="small-fee threshold (categories 1 and 3)")
    sim.add_argument("--a5", type=int, help="small-fee per-block count (categories 1 and 3)")
    sim.add_argument("--a6", type=int, help="max leaf nodes per transaction")
    sim.add_argument("--a7", type=float, help="CDF scale")
    sim.add_argument("--a8", type=float, help="CDF shape")
    sim.add_argument("--block-target", type=int, help="stop after this many sealed blocks")
    sim.add_argument("--budget-txs", type=int, help="consume at most this many transactions")
    sim.add_argument("--force-seal", action="store_true",
                     help="seal the partial tail block at end of stream")
    sim.add_argument("--verkle-roots", action="store_true",
                     help="build a commitment tree per sealed block")
    sim.add_argument("--no-assignments", action="store_true",
                     help="skip writing assignments.csv")
    sim.add_argument("--out", required=True, help="output directory")

    opt = sub.add_parser("optimize", parents=[common], help="search strategy attributes")
    opt.add_argument("--algo", choices=ALGORITHMS)
    opt.add_argument("--category", type=int, choices=(1, 2, 3, 4))
    opt.add_argument("--grid", action="store_true", help="run every algorithm x category cell")
    opt.add_argument("--budget", type=int, help="objective evaluation budget")
    opt.add_argument("--n-pop", type=int, dest="n_pop")
    opt.add_argument("--max-gen", type=int, dest="max_gen")
    opt.add_argument("--dataset", help="transaction CSV (default: synthetic stream)")
    opt.add_argument("--count", type=int, help="synthetic stream length")
    opt.add_argument("--jobs", type=int, default=1,
                     help="worker processes for independent grid cells")
    opt.add_argument("--out", required=True, help="output directory")

    proof = sub.add_parser("proofsize", parents=[common], help="closed-form proof-size tables")
    proof.add_argument("--scenarios", help="comma list of name=n_t (default: published set)")
    proof.add_argument("--k", help="comma list of branching factors (default 3,5,10,1024)")
    proof.add_argument("--mode", choices=("smooth", "ceil", "both"), default="both")
    proof.add_argument("--out", help="write the report CSV here")

    vrp = sub.add_parser("vrp-check", parents=[common], help="constraint and oracle-gap check of a run")
    vrp.add_argument("--blocks", required=True, help="blocks.csv from a simulate run")
    vrp.add_argument("--assignments", help="assignments.csv (default: next to blocks.csv)")
    vrp.add_argument("--oracle-max-n", type=int, default=10)
    vrp.add_argument("--oracle-blocks", type=int, default=3)
    vrp.add_argument("--target-incentive", type=float,
                     help="report per-block deviation from this depot incentive level")

    vol = sub.add_parser("volatility", parents=[common], help="volatility of an incentive column")
    vol.add_argument("--in", dest="infile", required=True, help="CSV with an incentive column")
    vol.add_argument("--column", default="incentive")
    vol.add_argument("--window", type=int, help="rolling window in returns")
    vol.add_argument("--out", help="write rolling series CSV here")

    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "proofsize": cmd_proofsize,
    "vrp-check": cmd_vrp_check,
    "volatility": cmd_volatility,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        print(default_config_text(), end="")
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        config, config_text, explicit = load_config(getattr(args, "config", None))
        return COMMANDS[args.command](args, config, config_text, explicit)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, SchemaError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
