"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from pathlib import Path

import yaml

from .config import (
    ConfigError,
    apply_overrides,
    build,
    check_override_key,
    default_config,
    merge,
    parse_override,
    read_config,
    resolve_scenario,
)
from .engine import ScenarioError, simulate, sweep
from .harvest import DAY
from .tracing import TracingError, detect_encounters, load_agents, tracing_energy, write_encounters

TS_FIELDS = ("t_s", "stored_j", "load_w", "harvest_w", "event")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario file or bundled scenario name (default: built-in defaults)")
    p.add_argument("--out", type=Path, help="directory for output files")
    p.add_argument("--seed", type=int, help="RNG seed (tracing noise)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--dt", type=float, help="integration step in seconds")
    p.add_argument("--format", choices=("csv", "text"), default="text")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wearsim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="run one scenario and report lifetime and energy")
    _common(p)
    p = sub.add_parser("lifetime", help="print the lifetime in days")
    _common(p)
    p.add_argument("--mode", help="run this mode for the whole day instead of the scenario schedule")
    p = sub.add_parser("sweep", help="simulate every point of a parameter grid")
    _common(p)
    p.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2,...",
                   help="grid axis (repeatable); adds to sweep.grid from the scenario")
    p.add_argument("--workers", type=int, default=None)
    p = sub.add_parser("trace", help="detect BLE encounters from agent traces")
    _common(p)
    p.add_argument("--agents", type=Path, help="agent trace CSV (id,t_s,x_m,y_m)")
    p = sub.add_parser("validate", help="compare the model against its reference figures")
    _common(p)
    return ap


def _overrides(args) -> dict:
    ov = dict(parse_override(s) for s in args.overrides)
    if args.dt is not None:
        ov["dt_s"] = args.dt
    if args.seed is not None:
        ov["tracing.rng_seed"] = args.seed
    return ov


def _raw_config(args) -> tuple[dict, Path | None]:
    if not args.scenario:
        return {}, None
    p = resolve_scenario(args.scenario)
    return read_config(p), p.parent


def _world(args, extra=None):
    raw, base = _raw_config(args)
    ov = _overrides(args)
    if extra:
        ov.update(extra)
    return build(raw, ov, base_dir=base)


def _report(world):
    return simulate(world.scenario, world.power.profiles, world.power.modes, world.curve,
                    world.battery, world.uplink)


def _timeseries_csv(report, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TS_FIELDS)
    ts = report.timeseries
    for t, s, lw, hw, ev in zip(ts["t_s"], ts["stored_j"], ts["load_w"], ts["harvest_w"], ts["event"]):
        w.writerow((f"{t:g}", f"{s:.6f}", f"{lw:.9g}", f"{hw:.9g}", ev))


def _summary_text(summary: dict) -> str:
    return yaml.safe_dump(summary, sort_keys=False)


def cmd_simulate(args) -> int:
    world = _world(args)
    rep = _report(world)
    summary = {"scenario": world.name, **rep.summary()}
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "summary.yaml").write_text(_summary_text(summary))
        with open(args.out / "timeseries.csv", "w", newline="") as fh:
            _timeseries_csv(rep, fh)
    if args.format == "csv":
        _timeseries_csv(rep, sys.stdout)
    else:
        sys.stdout.write(_summary_text(summary))
    return 0


def cmd_lifetime(args) -> int:
    raw, base = _raw_config(args)
    if args.mode:
        raw = {k: v for k, v in raw.items() if k not in ("mode_schedule", "duty_cycle")}
        raw["mode_schedule"] = [{"start_s": 0, "duration_s": DAY, "mode": args.mode}]
    rep = _report(build(raw, _overrides(args), base_dir=base))
    if rep.survived:
        print(f"survived horizon of {rep.simulated_time / DAY:.2f} days")
    else:
        print(f"{rep.lifetime_days:.2f} days")
    return 0


def _parse_grid(items) -> dict:
    grid = {}
    for item in items:
        key, raw = parse_override(item)
        vals = raw if isinstance(raw, list) else [yaml.safe_load(v) for v in str(raw).split(",")]
        grid[key] = vals
    return grid


def cmd_sweep(args) -> int:
    raw, _ = _raw_config(args)
    ov = _overrides(args)
    template = dict(raw)
    if ov:
        for k in ov:
            check_override_key(template, k)
        template = apply_overrides(merge(default_config(), template), ov)
    grid = dict((template.get("sweep") or {}).get("grid") or {})
    grid.update(_parse_grid(args.grid))
    workers = args.workers or int((template.get("sweep") or {}).get("workers") or 1)
    template.pop("sweep", None)
    reports = sweep(template, grid, workers=workers)
    keys = list(grid)
    rows = []
    for combo, rep in zip(itertools.product(*(grid[k] for k in keys)), reports):
        rows.append({**dict(zip(keys, combo)),
                     "lifetime_days": "" if rep.survived else f"{rep.lifetime_days:.6f}",
                     "average_load_w": f"{rep.average_load_power:.9g}",
                     "average_harvest_w": f"{rep.average_harvest_power:.9g}"})
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "sweep.csv").write_text(buf.getvalue())
    if args.format == "csv":
        sys.stdout.write(buf.getvalue())
    else:
        for r in rows:
            print("  ".join(f"{k}={v}" for k, v in r.items()))
    return 0


def cmd_trace(args) -> int:
    world = _world(args)
    tr = world.tracing
    path = args.agents or tr.agents_csv
    if not path:
        raise ConfigError("trace needs --agents or tracing.agents_csv")
    if not Path(path).exists():
        raise ConfigError(f"agent trace file not found: {path}")
    agents = load_agents(path, world.ble, tr.rx_sensitivity)
    recs = detect_encounters(agents, tr.model, tr.horizon, tr.min_duration, tr.max_gap)
    buf = io.StringIO()
    write_encounters(recs, buf)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "encounters.csv").write_text(buf.getvalue())
    if args.format == "csv":
        sys.stdout.write(buf.getvalue())
    else:
        e = tracing_energy(agents[0], tr.horizon, world.power.profiles, world.power.modes) if agents else 0.0
        print(f"agents: {len(agents)}  encounters: {len(recs)}  horizon: {tr.horizon:g} s  "
              f"advertising energy per agent: {e:.4f} J")
        for r in recs:
            print(f"{r.observer} <- {r.observed}: {r.start:g}-{r.end:g} s, "
                  f"min {r.min_distance:.2f} m, {r.samples} packets")
    return 0


def cmd_validate(args) -> int:
    from .validate import claim_rows, format_table

    if args.scenario:
        resolve_scenario(args.scenario)
    rows = claim_rows(_overrides(args) or None)
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(("key", "reference", "computed", "criterion", "passed", "note"))
        for r in rows:
            w.writerow((r.key, r.reference, r.computed, r.criterion, int(r.passed), r.note))
    else:
        print(format_table(rows))
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "validation.json").write_text(json.dumps([r.__dict__ for r in rows], indent=2))
    failed = [r.key for r in rows if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {"simulate": cmd_simulate, "lifetime": cmd_lifetime, "sweep": cmd_sweep,
            "trace": cmd_trace, "validate": cmd_validate}


def run(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ScenarioError, TracingError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
