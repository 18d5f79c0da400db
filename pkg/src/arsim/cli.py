"""Command-line entry point: ``arsim run|sweep|validate|dump-chart``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from arsim import engine as E
from arsim.chart import ChartError, builtin_malaga_rwy13, dump_chart, load_chart
from arsim.performance import PerformanceConfigError, load_performance

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

INSTANT_COLUMNS = ("procedure", "t_rel_s", "x_m", "y_m", "z_m", "V_ms", "hdot_ms", "thrust_N", "F_kgmin", "Fa_rel_kg")


def _read_json(path: str, what: str):
    if not os.path.isfile(path):
        raise E.ConfigError(what, f"no such file {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise E.ConfigError(what, f"invalid JSON at line {exc.lineno}: {exc.msg}") from None


def load_scenario(path: str | None, overrides=()) -> tuple[dict, E.ScenarioConfig]:
    if path is None:
        doc, base = E.default_document(), None
    else:
        doc, base = _read_json(path, "scenario"), os.path.dirname(os.path.abspath(path))
    try:
        for o in overrides:
            E.apply_override(doc, o)
        cfg = E.config_from_document(doc, base)
        # fail early on broken references
        E.resolve_chart(cfg.chart)
        load_performance(cfg.performance)
        E.sweep_lists(doc)
    except (E.ConfigError, ChartError, PerformanceConfigError):
        raise
    except (ValueError, OSError) as exc:
        raise E.ConfigError("scenario", str(exc)) from None
    return doc, cfg


def _outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def cmd_run(args) -> int:
    _, cfg = load_scenario(args.scenario, args.set)
    cfg = replace(cfg, trace=args.trace)
    report = E.run(cfg)
    out = _outdir(args.out)
    if args.trace:
        E.write_trace(os.path.join(out, "trace.csv"), report)
    if args.dump_plan:
        E.atomic_write(os.path.join(out, "plan.json"), E.json_text(report.plan))
    E.write_summary(os.path.join(out, "summary.json"), report)
    print(f"{cfg.procedure}: outcome={report.outcome} maneuver_time={E.fmt(report.maneuver_time)} "
          f"maneuver_fuel={E.fmt(report.maneuver_fuel)}")
    return EXIT_OK


def instantaneous_rows(conv: E.RunReport, ars_: E.RunReport):
    """Missed-aircraft series from the first MAPt crossing to landing, both procedures."""
    for name, rep in (("conventional", conv), ("ars", ars_)):
        tr = E.missed_trace(rep)
        t0, t1 = rep.t_mapt
        w = tr[(tr[:, 0] >= t0) & (tr[:, 0] <= t1)]
        for r in w:
            yield (name, r[0] - t0, r[2], r[3], r[4], r[5], r[8], r[9], r[10], r[11] - rep.fuel_at_mapt[0])


def grid_text(cells, attr: str) -> str:
    """Whitespace table: one row per distance, one column per T_s (gnuplot-friendly)."""
    ts = sorted({c.T_s for c in cells})
    ds = sorted({c.distance_to_gap for c in cells})
    val = {(c.T_s, c.distance_to_gap): getattr(c, attr) for c in cells}
    lines = ["# distance_to_gap " + " ".join(f"T_s={E.fmt(t)}" for t in ts)]
    for d in ds:
        lines.append(" ".join([str(d)] + [E.fmt(val.get((t, d), np.nan)) for t in ts]))
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    doc, cfg = load_scenario(args.scenario, args.set)
    ts_list, d_list = E.sweep_lists(doc)
    cells = E.sweep(cfg, ts_list, d_list, jobs=args.jobs)
    out = _outdir(args.out)
    E.write_sweep(os.path.join(out, "sweep.csv"), cells)
    E.atomic_write(os.path.join(out, "fig_time_savings.dat"), grid_text(cells, "time_saving"))
    E.atomic_write(os.path.join(out, "fig_fuel_savings.dat"), grid_text(cells, "fuel_saving"))
    # instantaneous comparison at the configured spot cell
    spot = replace(cfg, trace=True)
    conv = E.run(replace(spot, procedure="conventional"))
    ars_ = E.run(replace(spot, procedure="ars"))
    E.atomic_write(os.path.join(out, "fig_instantaneous.csv"), E.csv_text(INSTANT_COLUMNS, instantaneous_rows(conv, ars_)))
    failed = sum(c.failed for c in cells)
    print(f"sweep: {len(cells)} cells, {failed} failed, written to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.scenario is None:
        raise E.ConfigError("scenario", "--scenario is required")
    doc = _read_json(args.scenario, "scenario")
    if isinstance(doc, dict) and "frame" in doc:
        load_chart(doc)
        kind = "chart"
    elif isinstance(doc, dict) and "polar" in doc:
        load_performance(doc)
        kind = "performance"
    else:
        load_scenario(args.scenario, args.set)
        kind = "scenario"
    print(f"ok: {kind} {args.scenario}")
    return EXIT_OK


def cmd_dump_chart(args) -> int:
    text = dump_chart(builtin_malaga_rwy13()) + "\n"
    if args.out and args.out != "-":
        E.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arsim", description="Missed-approach reinjection simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="out"):
        sp.add_argument("--scenario", help="scenario JSON (defaults to the built-in scenario)")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--set", action="append", default=[], metavar="K=V", help="dotted override, e.g. engine.T_s=120")

    sp = sub.add_parser("run", help="single simulation run")
    common(sp)
    sp.add_argument("--trace", action=argparse.BooleanOptionalAction, default=True, help="write trace.csv")
    sp.add_argument("--dump-plan", action="store_true", help="write plan.json with the reinjection plan")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="paired conventional/ARS sweep and figure data")
    common(sp)
    sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="check a scenario, chart or performance file")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("dump-chart", help="print the built-in Malaga chart")
    sp.add_argument("--out", default="-", help="file to write (default stdout)")
    sp.set_defaults(func=cmd_dump_chart)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: jobs: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (E.ConfigError, ChartError, PerformanceConfigError) as exc:
        print(f"error: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        # loaders raise plain ValueError from dataclass invariants
        kind = EXIT_CONFIG if args.command == "validate" else EXIT_RUNTIME
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return kind
    except Exception as exc:  # noqa: BLE001 - report any simulation failure as runtime
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
