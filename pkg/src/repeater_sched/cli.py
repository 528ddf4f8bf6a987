"""Command-line front end.

Thin argument-parsing layer over the engine: every subcommand builds the
same report dictionaries the HTTP service returns, then prints them as
JSON, CSV, or text.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import ENGINE_VERSION, defaults, reports
from .analysis import (
    SweepGrid,
    bound_row,
    bounds_rows,
    curves_rows,
    default_policies,
    min_n_table,
    plateau_table,
    run_sweep,
)
from .optimizer import SearchConfig, search_schedules
from .protocol import BudgetError, ChainParams, parse_policy, run_protocol
from .store import ResultsStore, StoreError, config_hash

SIMULATE_CSV_COLUMNS = [
    "segments", "multiplexing", "coupling_eff", "gate_error", "total_distance_m",
    "policy", "skr", "level", "pre_fidelity", "post_fidelity", "steps",
    "step_success_probs", "expected_links", "stage_skr",
]

ANALYZE_CSV_COLUMNS = {
    "plateau": [
        "segments", "multiplexing", "coupling_eff", "gate_error", "rule",
        "gd_plateau_mean", "ld_plateau_mean", "ratio", "flag",
    ],
    "min_n": ["multiplexing", "coupling_eff", "gate_error", "rule", "minimal_n"],
    "bounds": ["distance_m", "eta", "repeaters", "plob", "ultimate"],
    "curves": [
        "segments", "multiplexing", "coupling_eff", "gate_error", "distance_m",
        "policy", "skr", "schedule", "flags",
    ],
}


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row[col]) for col in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _chain_params(args) -> ChainParams:
    return ChainParams(
        segments=args.segments,
        multiplexing=args.multiplexing,
        coupling_eff=args.coupling,
        gate_error=args.gate_error,
        total_distance_m=args.distance,
        attenuation_m=args.attenuation,
        coherence_time_s=args.coherence_time,
        signal_speed_m_s=args.signal_speed,
    )


def _add_chain_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--segments", type=int, required=True, help="segment count N (power of 2)")
    parser.add_argument("--multiplexing", type=int, required=True, help="parallel link attempts M (power of 2)")
    parser.add_argument("--coupling", type=float, required=True, help="BSA coupling efficiency in [0, 1]")
    parser.add_argument("--gate-error", type=float, required=True, help="two-qubit gate error probability")
    parser.add_argument("--distance", type=float, required=True, help="end-to-end distance in meters")
    parser.add_argument("--attenuation", type=float, default=defaults.DEFAULT_ATTENUATION_M,
                        help="fiber attenuation length in meters")
    parser.add_argument("--coherence-time", type=float, default=defaults.DEFAULT_COHERENCE_TIME_S,
                        help="memory coherence time in seconds")
    parser.add_argument("--signal-speed", type=float, default=defaults.DEFAULT_SIGNAL_SPEED_M_S,
                        help="classical signal speed in m/s")
    parser.add_argument("--seed", type=int, default=defaults.DEFAULT_SEED)


def _cmd_simulate(args) -> int:
    params = _chain_params(args)
    policy = parse_policy(args.policy)
    result = run_protocol(params, policy)
    report = reports.run_report(params, policy, result, args.seed)
    if args.format == "json":
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    elif args.format == "csv":
        rows = []
        for stage in report["trace"]:
            rows.append({
                "segments": params.segments,
                "multiplexing": params.multiplexing,
                "coupling_eff": params.coupling_eff,
                "gate_error": params.gate_error,
                "total_distance_m": params.total_distance_m,
                "policy": report["policy"],
                "skr": report["skr"],
                "level": stage["level"],
                "pre_fidelity": stage["pre_fidelity"],
                "post_fidelity": stage["post_fidelity"],
                "steps": stage["steps"],
                "step_success_probs": ";".join(repr(p) for p in stage["step_success_probs"]),
                "expected_links": stage["expected_links"],
                "stage_skr": stage["stage_skr"],
            })
        _emit(_rows_to_csv(rows, SIMULATE_CSV_COLUMNS), args.out)
    else:
        lines = [
            f"chain: N={params.segments} M={params.multiplexing} eta_c={params.coupling_eff} "
            f"eps_G={params.gate_error} L={params.total_distance_m/1000:g} km",
            f"policy: {report['policy']}",
            f"skr: {report['skr']:.6e} per channel use",
            f"schedule: {report['schedule']}",
            f"bounds: plob={report['bounds']['plob']:.6e} ultimate={report['bounds']['ultimate']:.6e}",
            "stage  F_pre     F_post    steps  E[links]      stage_skr",
        ]
        for stage in report["trace"]:
            lines.append(
                f"{stage['level']:>5}  {stage['pre_fidelity']:.6f}  {stage['post_fidelity']:.6f}"
                f"  {stage['steps']:>5}  {stage['expected_links']:>12.4f}  {stage['stage_skr']:.6e}"
            )
        if report["flags"]:
            lines.append("flags: " + ", ".join(report["flags"]))
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_optimize(args) -> int:
    params = _chain_params(args)
    config = SearchConfig(
        samples=args.samples,
        seed=args.seed,
        include_ld_candidates=args.include_ld,
        max_steps_per_level=args.max_steps_per_level,
        fth_grid=tuple(args.fth_grid),
    )
    result = search_schedules(params, config)
    report = reports.optimize_report(params, config, result)
    if args.format == "json":
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = [
            f"best schedule: {report['best_schedule']}  (skr {report['best_skr']:.6e})",
            f"evaluated {report['evaluated']} distinct schedules",
        ]
        for label, skr in sorted(report["ld_baselines"].items()):
            lines.append(f"baseline {label}: {skr:.6e}")
        lines.append("budget-usage histogram (total steps -> best skr):")
        for total, skr in report["histogram"].items():
            lines.append(f"  {total}: {skr:.6e}")
        if report["flags"]:
            lines.append("flags: " + ", ".join(report["flags"]))
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _load_sweep_setup(args) -> tuple[SweepGrid, list[str], SearchConfig, int]:
    if args.config:
        payload = json.loads(Path(args.config).read_text())
    else:
        payload = {}
    grid = SweepGrid.from_dict(payload.get("grid", {}))
    policies = list(payload.get("policies", default_policies()))
    search = payload.get("search", {})
    seed = args.seed if args.seed is not None else payload.get("seed", defaults.DEFAULT_SEED)
    config = SearchConfig(
        samples=args.samples if args.samples is not None else search.get("samples", 500),
        seed=seed,
        include_ld_candidates=search.get("include_ld_candidates", True),
        max_steps_per_level=search.get("max_steps_per_level"),
        fth_grid=tuple(search.get("fth_grid", defaults.DEFAULT_FTH_GRID)),
    )
    return grid, policies, config, seed


def _search_config_dict(config: SearchConfig) -> dict:
    return {
        "samples": config.samples,
        "include_ld_candidates": config.include_ld_candidates,
        "max_steps_per_level": config.max_steps_per_level,
        "fth_grid": list(config.fth_grid),
    }


def _cmd_sweep(args) -> int:
    grid, policies, config, seed = _load_sweep_setup(args)
    setup = {
        "grid": grid.to_dict(),
        "policies": policies,
        "search": _search_config_dict(config),
        "seed": seed,
    }
    manifest = dict(setup, grid_hash=config_hash(setup), model_constants=defaults.model_constants())
    if args.resume:
        store = ResultsStore.create_or_resume(Path(args.out), manifest)
    else:
        store = ResultsStore.create(Path(args.out), manifest)

    def progress(done: int, total: int) -> None:
        if done % 20 == 0 or done == total:
            print(f"sweep: {done}/{total} records", file=sys.stderr)

    summary = run_sweep(
        grid, policies, config, store,
        workers=args.workers, limit=args.limit, progress=progress,
    )
    print(
        f"sweep complete: {summary['new_records']} new records "
        f"({summary['skipped']} already present)",
        file=sys.stderr,
    )
    return 0


def _cmd_analyze(args) -> int:
    records = None
    if args.store:
        store = ResultsStore.open(Path(args.store))
        records = store.records()
        if not records:
            print("store is empty", file=sys.stderr)
            return 1
    if args.subcommand == "plateau":
        kind, rows = "plateau", plateau_table(records)
    elif args.subcommand == "min-n":
        kind, rows = "min_n", min_n_table(records)
    elif args.subcommand == "bounds":
        kind = "bounds"
        rows = bounds_rows(records) if records else []
        if args.eta is not None:
            rows.append(bound_row(args.eta, args.repeaters))
    else:
        kind, rows = "curves", curves_rows(records)
    if args.format == "json":
        _emit(json.dumps({"kind": kind, "rows": rows}, indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(_rows_to_csv(rows, ANALYZE_CSV_COLUMNS[kind]), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    if not port.isdigit():
        host, port = args.bind, "8000"
    app = create_app(
        store_root=Path(args.store) if args.store else None,
        static_dir=Path(args.static_dir) if args.static_dir else None,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repeater-sched",
        description="Distillation-schedule simulator and optimizer for repeater chains",
    )
    parser.add_argument("--version", action="version", version=ENGINE_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the protocol once at a single distance")
    _add_chain_args(p_sim)
    p_sim.add_argument("--policy", required=True,
                       help="fth:<threshold> | skr | manual:<comma-separated steps>")
    p_sim.add_argument("--format", choices=["json", "csv", "text"], default="text")
    p_sim.add_argument("--out", help="write the report to this path instead of stdout")
    p_sim.set_defaults(func=_cmd_simulate)

    p_opt = sub.add_parser("optimize", help="Monte-Carlo search for a near-optimal schedule")
    _add_chain_args(p_opt)
    p_opt.add_argument("--samples", type=int, default=500)
    p_opt.add_argument("--include-ld", action=argparse.BooleanOptionalAction, default=True,
                       help="seed the candidate pool with local-rule schedules")
    p_opt.add_argument("--max-steps-per-level", type=int, default=None)
    p_opt.add_argument("--fth-grid", type=float, nargs="+", default=list(defaults.DEFAULT_FTH_GRID))
    p_opt.add_argument("--format", choices=["json", "text"], default="text")
    p_opt.add_argument("--out")
    p_opt.set_defaults(func=_cmd_optimize)

    p_sweep = sub.add_parser("sweep", help="evaluate a parameter grid into a results store")
    group = p_sweep.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="JSON sweep config (grid/policies/search/seed)")
    group.add_argument("--default-grid", action="store_true",
                       help="use the built-in default parameter grid")
    p_sweep.add_argument("--out", required=True, help="store directory")
    p_sweep.add_argument("--resume", action="store_true",
                         help="continue an existing store with a matching manifest")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--samples", type=int, default=None)
    p_sweep.add_argument("--workers", type=int, default=None)
    p_sweep.add_argument("--limit", type=int, default=None,
                         help="stop after this many new records (sweep can be resumed)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_an = sub.add_parser("analyze", help="tables and exports over a results store")
    p_an.add_argument("subcommand", choices=["plateau", "min-n", "bounds", "export-curves"])
    p_an.add_argument("--store")
    p_an.add_argument("--eta", type=float, default=None, help="bounds: transmissivity for a direct row")
    p_an.add_argument("--repeaters", type=int, default=0, help="bounds: middle-node count for --eta")
    p_an.add_argument("--format", choices=["json", "csv"], default="json")
    p_an.add_argument("--out")
    p_an.set_defaults(func=_cmd_analyze)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--bind", default="127.0.0.1:8000")
    p_serve.add_argument("--store", help="store directory (or directory of stores)")
    p_serve.add_argument("--static-dir", help="explorer bundle to serve at /")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "analyze":
        if args.subcommand != "bounds" and not args.store:
            parser.error("--store is required for this analyze subcommand")
        if args.subcommand == "bounds" and not args.store and args.eta is None:
            parser.error("analyze bounds needs --store and/or --eta")
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
