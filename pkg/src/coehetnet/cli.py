"""Command-line front end: cdf, validate, optimize, sweep, simulate."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import mixture_cdf
from .config import ConfigError, ScenarioConfig, load_config
from .evaluation import (METRICS, OBJECTIVES, kpi_sweep, ks_campaign,
                         optimize_grid)
from . import figures
from .simulator import drop_sample_to_csv, pooled_metric, run_drops

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG_ERROR = 2

SWEEP_OBJECTIVES = ("r10", "se10", "se50", "ee10", "ee50", "theta10", "theta50")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON scenario config (defaults built in)")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed override")
    parser.add_argument("--bias", type=float, default=None, help="bias B in dB")
    parser.add_argument("--w-micro", type=float, default=None,
                        help="fraction of users dropped in micro coverage")
    parser.add_argument("--eta", type=float, default=None,
                        help="time share of range-expanded users")
    parser.add_argument("--rho", type=float, default=None,
                        help="band share of macro users")
    parser.add_argument("--noise-bandwidth-mode", default=None,
                        choices=["full_band", "allocation"])
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for drop generation")
    parser.add_argument("--no-plot", action="store_true",
                        help="skip figure rendering")


def _load_cfg(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if args.bias is not None:
        overrides["bias_db"] = args.bias
    if getattr(args, "w_micro", None) is not None:
        overrides["w_micro"] = args.w_micro
    if args.eta is not None:
        overrides["eta"] = args.eta
    if args.rho is not None:
        overrides["rho"] = args.rho
    if args.noise_bandwidth_mode is not None:
        overrides["noise_bandwidth_mode"] = args.noise_bandwidth_mode
    return cfg.replace(**overrides) if overrides else cfg


def _write_manifest(out_dir: Path, cfg: ScenarioConfig, outputs: list[Path],
                    started: float) -> Path:
    manifest = {
        "command": " ".join(sys.argv),
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.rng_seed,
        "tool_version": __version__,
        "outputs": [str(p) for p in outputs],
        "duration_s": round(time.time() - started, 3),
    }
    path = out_dir / "manifest.json"
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2) + "\n")
    os.replace(tmp, path)
    return path


def _write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)
    return path


def cmd_cdf(args) -> int:
    started = time.time()
    cfg = _load_cfg(args)
    args.out.mkdir(parents=True, exist_ok=True)
    metric = args.metric
    cdf = mixture_cdf(cfg.bias_db, cfg.eta, cfg.rho, cfg, metric=metric)
    grid = np.linspace(cdf.support_hint[0], cdf.support_hint[1],
                       max(args.grid_size, 2))
    probs = np.asarray(cdf.evaluator(grid))
    outputs = [_write_csv(
        args.out / f"analytic_cdf_{metric}.csv",
        [f"{metric}_value", "probability"],
        ((f"{v:.8e}", f"{p:.8f}") for v, p in zip(grid, probs)))]

    drops = run_drops(cfg, args.drops, threads=args.threads)
    pooled = np.sort(pooled_metric(drops, metric))
    step = max(len(pooled) // max(args.grid_size, 2), 1)
    emp_x = pooled[::step]
    emp_p = (np.arange(1, len(pooled) + 1) / len(pooled))[::step]
    outputs.append(_write_csv(
        args.out / f"empirical_cdf_{metric}.csv",
        [f"{metric}_value", "probability"],
        ((f"{v:.8e}", f"{p:.8f}") for v, p in zip(emp_x, emp_p))))
    if not args.no_plot:
        outputs.append(figures.save_cdf_overlay(
            metric, (grid, probs), (emp_x, emp_p),
            args.out / f"cdf_overlay_{metric}.png",
            title=f"B={cfg.bias_db:g} dB, eta={cfg.eta:g}, rho={cfg.rho:g}, "
                  f"w_micro={cfg.w_micro:g}"))
    outputs.append(_write_manifest(args.out, cfg, outputs, started))
    print(f"wrote {len(outputs)} files to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    started = time.time()
    cfg = _load_cfg(args)
    args.out.mkdir(parents=True, exist_ok=True)
    report = ks_campaign(cfg, args.metric, n_trials=args.trials,
                         subsample=args.subsample, self_test=args.self_test)
    payload = {"metric": args.metric, "bias_db": cfg.bias_db,
               "w_micro": cfg.w_micro, "eta": cfg.eta, "rho": cfg.rho,
               "noise_bandwidth_mode": cfg.noise_bandwidth_mode,
               **report.as_dict()}
    out = args.out / f"ks_report_{args.metric}.json"
    out.write_text(json.dumps(payload, indent=2) + "\n")
    outputs = [out]
    outputs.append(_write_manifest(args.out, cfg, outputs, started))
    print(f"{'metric':>12s}  {'mean signif.':>12s}  {'pass ratio':>10s}  "
          f"{'trials':>6s}  {'n':>4s}")
    print(f"{args.metric:>12s}  {report.mean_significance:12.4f}  "
          f"{report.pass_ratio:10.4f}  {report.n_trials:6d}  "
          f"{report.sample_size:4d}")
    ok = report.pass_ratio >= args.threshold
    print(f"pass ratio {'meets' if ok else 'below'} threshold {args.threshold}")
    return EXIT_OK if ok else EXIT_VALIDATION_FAILED


def cmd_optimize(args) -> int:
    started = time.time()
    cfg = _load_cfg(args)
    args.out.mkdir(parents=True, exist_ok=True)
    result = optimize_grid(cfg.bias_db, cfg, objective=args.objective,
                           step=args.step)
    scale = 1e-6 if args.objective == "r10" else 1.0
    rows = []
    for i, e in enumerate(result.etas):
        for j, r in enumerate(result.rhos):
            rows.append((f"{e:.4f}", f"{r:.4f}", f"{result.grid[i, j] * scale:.8e}"))
    outputs = [_write_csv(args.out / f"grid_{args.objective}.csv",
                          ["eta", "rho", args.objective], rows)]
    summary = {"objective": args.objective, "eta_star": result.eta_star,
               "rho_star": result.rho_star, "value": result.value * scale,
               "value_units": "Mbit/s" if args.objective == "r10" else "",
               "bias_db": cfg.bias_db, "w_micro": cfg.w_micro,
               "noise_bandwidth_mode": cfg.noise_bandwidth_mode}
    out = args.out / f"optimize_{args.objective}.json"
    out.write_text(json.dumps(summary, indent=2) + "\n")
    outputs.append(out)
    if not args.no_plot:
        outputs.append(figures.save_optimize_heatmap(
            result, args.out / f"grid_{args.objective}.png", value_scale=scale,
            value_label=f"{args.objective}" + (" (Mbit/s)" if scale != 1.0 else "")))
    outputs.append(_write_manifest(args.out, cfg, outputs, started))
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _parse_range(text: str) -> np.ndarray:
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"range must be start:stop:step, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"bad sweep range {text!r}")
    n = int(round((stop - start) / step))
    return np.round(np.linspace(start, stop, n + 1), 12)


def cmd_sweep(args) -> int:
    started = time.time()
    cfg = _load_cfg(args)
    args.out.mkdir(parents=True, exist_ok=True)
    objectives = [o.strip() for o in args.objectives.split(",") if o.strip()]
    unknown = [o for o in objectives if o not in SWEEP_OBJECTIVES]
    if unknown:
        raise ConfigError(f"unknown sweep objective {unknown[0]!r}")
    values = _parse_range(args.range)
    sweep = kpi_sweep(cfg, cfg.bias_db, args.parameter, values, objectives)
    rows = []
    for obj in objectives:
        scale = 1e-6 if obj == "r10" else 1.0
        for x, y in zip(values, sweep[obj]):
            rows.append((args.parameter, f"{x:.4f}", obj, f"{y * scale:.8e}"))
    outputs = [_write_csv(args.out / f"sweep_{args.parameter}.csv",
                          ["parameter", "value", "objective", "kpi"], rows)]
    if not args.no_plot:
        outputs.append(figures.save_sweep_curves(
            args.parameter, sweep, objectives,
            args.out / f"sweep_{args.parameter}.png",
            title=f"B={cfg.bias_db:g} dB, w_micro={cfg.w_micro:g}"))
    outputs.append(_write_manifest(args.out, cfg, outputs, started))
    print(f"swept {args.parameter} over {len(values)} points "
          f"for {len(objectives)} objectives")
    return EXIT_OK


def cmd_simulate(args) -> int:
    started = time.time()
    cfg = _load_cfg(args)
    args.out.mkdir(parents=True, exist_ok=True)
    drops = run_drops(cfg, args.drops, threads=args.threads,
                      exact_interference=args.exact_interference)
    outputs = []
    for i, drop in enumerate(drops):
        path = args.out / f"drop_{i:04d}.csv"
        drop_sample_to_csv(drop, path)
        outputs.append(path)
    outputs.append(_write_manifest(args.out, cfg, outputs, started))
    print(f"wrote {args.drops} drops to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coehetnet",
        description="Per-user rate/SE/EE distributions and resource-split "
                    "optimization for a two-tier cell-on-edge network")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cdf", help="export analytic + simulated CDF tables")
    _add_common(p)
    p.add_argument("--metric", choices=list(METRICS), default="rate")
    p.add_argument("--grid-size", type=int, default=512)
    p.add_argument("--drops", type=int, default=400)
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("validate", help="KS goodness-of-fit campaign")
    _add_common(p)
    p.add_argument("--metric", choices=list(METRICS), default="rate")
    p.add_argument("--trials", type=int, default=400)
    p.add_argument("--subsample", type=int, default=100)
    p.add_argument("--threshold", type=float, default=0.5,
                   help="minimum pass ratio for exit code 0")
    p.add_argument("--self-test", action="store_true",
                   help="draw samples from the analytic CDF itself")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("optimize", help="exhaustive (eta, rho) grid search")
    _add_common(p)
    p.add_argument("--objective", choices=list(OBJECTIVES), default="r10")
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="KPI curves along eta or rho")
    _add_common(p)
    p.add_argument("--parameter", choices=["eta", "rho"], default="eta")
    p.add_argument("--range", default="0:1:0.05", help="start:stop:step")
    p.add_argument("--objectives", default="se10,se50,ee10,ee50,theta10,theta50")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="export raw per-user drop records")
    _add_common(p)
    p.add_argument("--drops", type=int, default=1)
    p.add_argument("--exact-interference", action="store_true",
                   help="per-user interferer sums instead of per-type constants")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
