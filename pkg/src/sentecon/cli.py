"""Command-line entry points: run a simulation, drive the ablation and
backend-comparison experiments, or recompute a report from stored output.

Each run writes a self-contained directory (months.csv, agents.csv,
manifest.json, report.json, figures/) under ``runs/`` unless an explicit
output directory is given. Exit codes: 0 ok, 1 configuration error,
2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import charts, engine, metrics
from .config import (ConfigError, RunConfig, apply_overrides, config_hash,
                     load_config, parse_override_value)
from .engine import AGENT_COLUMNS, MONTH_COLUMNS, RunResult

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

ABLATION_VARIANTS = [
    ("full", None),
    ("no_history_memory", "no_history_memory"),
    ("no_sentiment_index", "no_sentiment_index"),
    ("no_belief_factor", "no_belief_factor"),
    ("no_investment_impact", "no_investment_impact"),
]


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v
                             for v in row])


def read_months_csv(path: Path) -> list[dict]:
    """Monthly rows back as dicts of floats (month index as int)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {k: float(v) for k, v in raw.items()}
            row["month"] = int(row["month"])
            rows.append(row)
    return rows


def write_run_outputs(out_dir: Path, result: RunResult) -> dict:
    """Persist one run: tables, manifest, report and figures."""
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "months.csv", MONTH_COLUMNS,
               [r.to_row() for r in result.month_records])
    _write_csv(out_dir / "agents.csv", AGENT_COLUMNS, result.agent_rows)
    (out_dir / "manifest.json").write_text(
        json.dumps(result.manifest, indent=2, sort_keys=True))
    months = [dict(zip(MONTH_COLUMNS, r.to_row()))
              for r in result.month_records]
    try:
        report = metrics.full_report(months)
    except ValueError as exc:
        report = {"error": str(exc)}
    (out_dir / "report.json").write_text(json.dumps(report, indent=2))
    if "annual" in report:
        charts.write_figures(out_dir / "figures", months, report)
    return report


def _year_summary_lines(result: RunResult) -> list[str]:
    lines = []
    records = result.month_records
    for year in range(len(records) // 12):
        chunk = records[year * 12:(year + 1) * 12]
        mean_u = sum(r.unemployment for r in chunk) / 12.0
        mean_p = sum(r.price for r in chunk) / 12.0
        nominal = sum(r.production * r.price for r in chunk)
        lines.append(
            f"year {year:3d}: price {mean_p:8.4f}  unemployment {mean_u:6.3f}  "
            f"nominal GDP {nominal:14.2f}  rate {chunk[-1].interest_rate:.4f}  "
            f"esi {chunk[-1].mean_esi:+.3f}")
    return lines


def _default_out_dir(config: RunConfig) -> Path:
    stamp = time.strftime("%Y%m%d-%H%M%S", time.gmtime())
    return Path("runs") / f"{stamp}-{config_hash(config)[:8]}"


def _load_with_overrides(args) -> RunConfig:
    config = load_config(args.config)
    overrides: dict[str, object] = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError([f"--set expects path=value, got {item!r}"])
        dotted, raw = item.split("=", 1)
        overrides[dotted] = parse_override_value(raw)
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.agents is not None:
        overrides["n_agents"] = args.agents
    if args.months is not None:
        overrides["n_months"] = args.months
    if getattr(args, "backend", None):
        overrides["backend.kind"] = args.backend
    config = apply_overrides(config, overrides)
    config.validate()
    return config


def cmd_run(args) -> int:
    config = _load_with_overrides(args)
    out_dir = Path(args.out) if args.out else _default_out_dir(config)
    result = engine.run(config)
    write_run_outputs(out_dir, result)
    for line in _year_summary_lines(result):
        print(line)
    print(f"run written to {out_dir}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    base = _load_with_overrides(args)
    out_dir = Path(args.out) if args.out else _default_out_dir(base)
    out_dir.mkdir(parents=True, exist_ok=True)

    unemployment: dict[str, list[float]] = {}
    summary: dict[str, dict] = {}
    for name, flag in ABLATION_VARIANTS:
        flags = engine.AblationFlags()
        if flag is not None:
            setattr(flags, flag, True)
        variant = replace(base, ablation=flags)
        result = engine.run(variant)
        write_run_outputs(out_dir / name, result)
        series = [r.unemployment for r in result.month_records]
        unemployment[name] = series
        mean = sum(series) / len(series)
        variance = sum((u - mean) ** 2 for u in series) / len(series)
        summary[name] = {
            "unemployment_mean": mean,
            "unemployment_variance": variance,
            "retrieval_calls": result.retrieval_calls,
            "mean_esi_max_abs": max(abs(r.mean_esi)
                                    for r in result.month_records),
            "investment_max": max(r.investment for r in result.month_records),
        }
        print(f"{name}: mean u {mean:.4f}, variance {variance:.6f}")

    names = [name for name, _ in ABLATION_VARIANTS]
    rows = [[m] + [unemployment[name][m] for name in names]
            for m in range(base.n_months)]
    _write_csv(out_dir / "ablation.csv", ["month"] + names, rows)
    (out_dir / "ablation_summary.json").write_text(
        json.dumps(summary, indent=2))
    print(f"ablation results written to {out_dir}")
    return EXIT_OK


def cmd_compare(args) -> int:
    base = _load_with_overrides(args)
    kinds = [k.strip() for k in args.backends.split(",") if k.strip()]
    if len(kinds) < 2:
        raise ConfigError(["compare needs at least 2 backend kinds"])
    out_dir = Path(args.out) if args.out else _default_out_dir(base)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports: dict[str, dict] = {}
    annuals: dict[str, list[dict]] = {}
    for kind in kinds:
        variant = replace(base, backend=replace(base.backend, kind=kind))
        variant.validate()
        result = engine.run(variant)
        report = write_run_outputs(out_dir / kind, result)
        reports[kind] = report.get("regularity", {})
        annuals[kind] = report.get("annual", [])
        print(f"{kind}: {json.dumps(reports[kind].get('phillips', {}))}")

    n_years = min(len(a) for a in annuals.values())
    header = ["year"]
    for kind in kinds:
        header += [f"{kind}_inflation", f"{kind}_unemployment",
                   f"{kind}_nominal_gdp"]
    rows = []
    for y in range(n_years):
        row: list = [y]
        for kind in kinds:
            a = annuals[kind][y]
            row += [a["inflation"] if a["inflation"] is not None else "",
                    a["unemployment_mean"], a["nominal_gdp"]]
        rows.append(row)
    _write_csv(out_dir / "compare_indicators.csv", header, rows)
    (out_dir / "compare_summary.json").write_text(json.dumps(reports, indent=2))
    print(f"comparison written to {out_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    months_path = Path(args.months)
    if not months_path.exists():
        raise ConfigError([f"months table not found: {months_path}"])
    months = read_months_csv(months_path)
    report = metrics.full_report(months)
    out_dir = months_path.parent
    (out_dir / "report.json").write_text(json.dumps(report, indent=2))
    charts.write_figures(out_dir / "figures", months, report)
    reg = report.get("regularity", {})
    if "phillips" in reg:
        print(f"phillips rho={reg['phillips']['rho']:.4f} "
              f"p={reg['phillips']['p_value']:.4g}")
        print(f"okun     rho={reg['okun']['rho']:.4f} "
              f"p={reg['okun']['p_value']:.4g}")
    print(f"report written to {out_dir / 'report.json'}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML/JSON config or run manifest")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--agents", type=int, help="number of agents")
    parser.add_argument("--months", type=int, help="number of months")
    parser.add_argument("--set", action="append", metavar="PATH=VALUE",
                        help="dotted-path config override (repeatable)")
    parser.add_argument("--out", help="output directory (default runs/<id>)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentecon",
        description="Agent-based macroeconomic simulator with sentiment- and "
                    "memory-driven households.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    _add_common(p_run)
    p_run.add_argument("--backend", help="backend kind override")
    p_run.set_defaults(func=cmd_run)

    p_ablate = sub.add_parser("ablate", help="run the five ablation variants")
    _add_common(p_ablate)
    p_ablate.set_defaults(func=cmd_ablate, backend=None)

    p_compare = sub.add_parser("compare", help="run several backends side by side")
    _add_common(p_compare)
    p_compare.add_argument("--backends", required=True,
                           help="comma-separated backend kinds")
    p_compare.set_defaults(func=cmd_compare, backend=None)

    p_report = sub.add_parser("report",
                              help="recompute report.json from months.csv")
    p_report.add_argument("months", help="path to an existing months.csv")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("configuration errors:", file=sys.stderr)
        for err in exc.errors:
            print(f"  {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
