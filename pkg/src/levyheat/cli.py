"""Batch experiment runner.

    levyheat run --config exp.yaml
    levyheat hardy --seed 3 --out results/
    levyheat plot results/results.jsonl --out results/tables

Each check appends one JSON record per exponent combination to
``<out>/results.jsonl``, prints a summary table and writes the CSV tables.
Exit status: 0 when every verdict passes, 1 when a check fails or hits a
precondition error, 2 for an invalid config.
"""

from __future__ import annotations

import argparse
import copy
import datetime as _dt
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import CHECKS, ExperimentConfig
from .errors import ConfigError
from .inequalities import (
    RatioReport,
    check_corollary,
    check_isometry,
    check_kunita,
    check_lemma1,
    check_lemma2,
    check_lemma3,
    check_partition,
    check_prop1,
    check_theorem,
)
from .plotdata import emit_plot_data

LOG_NAME = "results.jsonl"

# subcommand -> checks it may run (the first ones run when no config is given)
SUBCOMMANDS = {
    "partition-check": ("partition",),
    "kernel-decay": ("lemma1", "lemma2"),
    "hardy": ("lemma3",),
    "prop1": ("prop1",),
    "theorem": ("theorem",),
    "corollary": ("corollary",),
    "isometry": ("isometry",),
    "kunita": ("kunita",),
    "fractional": ("lemma1", "prop1"),
}

# starting points that resolve each check at desk scale
_DEFAULTS = {
    "partition": {},
    "lemma1": {"grid": {"n": 4096, "period": 32.0}},
    "lemma2": {"exponents": {"p": [2.0, 4.0]}},
    "lemma3": {"exponents": {"p": [2.0, 3.0, 4.0]}},
    "prop1": {"grid": {"n": 128}, "time": {"T": 0.25, "steps": 4096},
              "field_recipe": {"recipe": "random_decay", "seed": 1, "kmax": 8},
              "exponents": {"p": [2.0, 3.0]}, "params": {"levels": [128, 256]}},
    "theorem": {"grid": {"n": 32}, "field_recipe": {"recipe": "random_decay", "seed": 3, "kmax": 4},
                "exponents": {"p": [4.0], "k": [0.0, 1.0]}},
    "corollary": {"grid": {"n": 64}, "time": {"T": 1.0, "steps": 128},
                  "field_recipe": {"recipe": "single_mode", "j0": 2},
                  "exponents": {"p": [4.0], "k": [1.0]}, "samples": 200},
    "isometry": {"grid": {"n": 16}, "time": {"T": 1.0, "steps": 4096},
                 "field_recipe": {"recipe": "single_mode", "k0": [1]}, "samples": 2000},
    "kunita": {"grid": {"n": 32}, "time": {"T": 1.0, "steps": 64},
               "field_recipe": {"recipe": "random_decay", "kmax": 4},
               "exponents": {"p": [2.0, 4.0]}, "samples": 300},
}


def default_config(check: str, fractional: bool = False) -> ExperimentConfig:
    raw = {"check": check, **copy.deepcopy(_DEFAULTS[check])}
    if fractional:
        raw.setdefault("exponents", {})["alpha"] = [0.5, 0.75]
    return ExperimentConfig.from_dict(raw)


def _kunita_configs(cfg: ExperimentConfig):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(7,)))
    P = cfg.params
    out = []
    for i in range(int(P["configs"])):
        u, v = rng.uniform(-1.0, 1.0, size=2)
        nu = cfg.build_levy(2.0 ** (P["size_spread"] * u), 2.0 ** (P["rate_spread"] * v))
        out.append((cfg.build_field(seed_offset=i), nu))
    return out


def run_check(cfg: ExperimentConfig, sweep: dict) -> RatioReport:
    """Execute the configured check for one exponent combination."""
    P = cfg.params
    kind = cfg.semigroup(sweep.get("alpha", 1.0))
    p, k = sweep.get("p"), sweep.get("k")
    name = cfg.check
    if name == "partition":
        return check_partition(cfg.grid_spec(), P["tol"])
    if name == "lemma1":
        return check_lemma1(cfg.grid_spec(), P["j_range"], cfg.taus(), kind, tuple(P["fit_window"]),
                            P["collapse_tol"], P["r2_min"])
    if name == "lemma2":
        return check_lemma2(cfg.grid_spec(), P["j_range"], cfg.taus(), P["trials"], p, cfg.seed,
                            kind, P["single_mode"])
    if name == "lemma3":
        return check_lemma3(p, P["j_count"], cfg.time["T"], P["time_steps"], P["trials"],
                            P["index_mode"], cfg.seed, P["c"], P["refine"])
    if name == "prop1":
        levels = P["levels"]
        refine = (lambda n: cfg.build_field(n)) if levels else None
        return check_prop1(cfg.build_field(), p, P["homogeneous"], kind, refine, levels)
    if name == "theorem":
        return check_theorem(cfg.build_field(), cfg.build_levy(), k, p, P["homogeneous"],
                             cfg.samples, cfg.seed, kind, cfg.workers)
    if name == "corollary":
        return check_corollary(cfg.build_field(), cfg.build_levy(), k, p, P["norm_pair"],
                               cfg.samples, cfg.seed, kind, cfg.workers, P["embedding_trials"])
    if name == "isometry":
        return check_isometry(cfg.build_field(), cfg.build_levy(), cfg.samples, cfg.seed, kind,
                              cfg.workers, P["n_se"])
    if name == "kunita":
        return check_kunita(_kunita_configs(cfg), p, cfg.samples, cfg.seed, kind)
    raise ConfigError("check", f"unknown check {name!r}")


def _record(cfg: ExperimentConfig, sweep: dict, report: RatioReport | None, error: str | None,
            elapsed: float) -> dict:
    rec = {
        "check": cfg.check,
        "sweep": sweep,
        "config": cfg.to_dict(),
        "provenance": cfg.provenance(),
        "status": "error" if error else ("pass" if report.verdict else "fail"),
        "report": report.to_record() if report else None,
        "error": error,
        # excluded from determinism comparisons
        "meta": {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                 "elapsed_s": round(elapsed, 3)},
    }
    return rec


def deterministic_part(record: dict) -> dict:
    return {k: v for k, v in record.items() if k != "meta"}


def run(cfg: ExperimentConfig, out_dir: str | Path | None = None, echo=print) -> tuple[int, list[dict]]:
    """Run every exponent combination of ``cfg`` and append the records.

    Returns the exit status and the new records.
    """
    out_dir = Path(out_dir if out_dir is not None else cfg.output_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for sweep in cfg.sweep():
        t0 = time.perf_counter()
        report, error = None, None
        try:
            report = run_check(cfg, sweep)
        except ConfigError:
            raise
        except (ValueError, ArithmeticError) as exc:
            error = f"{type(exc).__name__}: {exc}"
        records.append(_record(cfg, sweep, report, error, time.perf_counter() - t0))
    with (out_dir / LOG_NAME).open("a") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    emit_plot_data(read_log(out_dir / LOG_NAME), out_dir / "tables")
    for line in summary_table(records):
        echo(line)
    ok = all(r["status"] == "pass" for r in records)
    return (0 if ok else 1), records


def read_log(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def summary_table(records: list[dict]) -> list[str]:
    head = f"{'status':<6}  {'check':<28}  {'lhs':>12}  {'rhs':>12}  {'ratio':>12}  {'stderr':>10}"
    lines = [head, "-" * len(head)]
    for r in records:
        rep = r["report"]
        if rep is None:
            lines.append(f"{'ERROR':<6}  {r['check']:<28}  {r['error']}")
            continue
        se = "" if rep["stderr"] is None else f"{rep['stderr']:.3g}"
        lines.append(f"{r['status'].upper():<6}  {rep['name']:<28}  {rep['lhs']:>12.6g}  "
                     f"{rep['rhs']:>12.6g}  {rep['ratio']:>12.6g}  {se:>10}")
    return lines


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    raw = cfg.to_dict()
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.workers is not None:
        raw["workers"] = args.workers
    if args.samples is not None:
        raw["samples"] = args.samples
    if args.out is not None:
        raw["output_path"] = args.out
    return ExperimentConfig.from_dict(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levyheat", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="YAML experiment config")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="output directory (default: config output_path)")
        sp.add_argument("--workers", type=int, help="processes for Monte Carlo sampling")
        sp.add_argument("--samples", type=int, help="override the Monte Carlo sample count")

    sp = sub.add_parser("run", help="run the check named in a config")
    common(sp)
    for name, checks in SUBCOMMANDS.items():
        common(sub.add_parser(name, help=f"checks: {', '.join(checks)}"))
    sp = sub.add_parser("plot", help="rebuild CSV tables from a results log")
    sp.add_argument("log", type=Path)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--check", choices=CHECKS, help="only records of this check")
    sp = sub.add_parser("show-config", help="print the default config of a check")
    sp.add_argument("check", choices=CHECKS)
    return parser


def _configs_for(args) -> list[ExperimentConfig]:
    if args.command == "run":
        if args.config is None:
            raise ConfigError("--config", "the run command needs a config file")
        return [ExperimentConfig.load(args.config)]
    allowed = SUBCOMMANDS[args.command]
    fractional = args.command == "fractional"
    if args.config is not None:
        cfg = ExperimentConfig.load(args.config)
        if fractional:
            if any(a >= 1.0 for a in cfg.exponents["alpha"]):
                raise ConfigError("exponents.alpha", "fractional runs need orders in (0, 1)")
        elif cfg.check not in allowed:
            raise ConfigError("check", f"{args.command} runs {', '.join(allowed)}, config names {cfg.check!r}")
        return [cfg]
    return [default_config(c, fractional) for c in allowed]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "show-config":
        print(default_config(args.check).dump(), end="")
        return 0
    if args.command == "plot":
        paths = emit_plot_data(read_log(args.log), args.out, args.check)
        for p in paths.values():
            print(p)
        return 0
    try:
        configs = [_apply_overrides(c, args) for c in _configs_for(args)]
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    status = 0
    for cfg in configs:
        try:
            code, _ = run(cfg)
        except ConfigError as exc:
            print(f"invalid config: {exc}", file=sys.stderr)
            return 2
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
