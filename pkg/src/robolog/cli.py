"""Command-line front end.

Subcommands: generate (write labeled logs), train (fit models on generated
logs), eval (score held-out records and write the report), run (generate +
train + eval over all iterations), plan (print a path on a grid), roc
(recompute ROC point files from logs + checkpoints). Every subcommand is
deterministic given its config and seed.
"""

import argparse
import os
import sys

from . import evaluate, models, planner
from .config import (
    ExperimentConfig, dump_config, load_config, preset_config, resolve_out_dir,
)
from .dataset import build_dataset, read_log
from .errors import NoPath, RobologError
from .grid import resolve_grid


def _add_common(p):
    p.add_argument("--config", help="path to a config file")
    p.add_argument("--preset", choices=("context1", "context2"),
                   help="builtin experiment preset")
    p.add_argument("--seed", type=int, help="override base_seed")
    p.add_argument("--iterations", type=int, help="override iteration count")
    p.add_argument("--models", help="comma-separated subset of lr,svm,ae")
    p.add_argument("--out", help="output directory (falls back to config, then $ROBOLOG_OUT)")
    p.add_argument("--emit-accel-traces", action="store_true",
                   help="also write accel_trace_*.csv per generated log")


def _effective_config(args) -> ExperimentConfig:
    from dataclasses import replace
    if args.config and args.preset:
        raise RobologError("--config and --preset are mutually exclusive")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset_config(args.preset)
    else:
        cfg = ExperimentConfig()
    updates = {}
    if args.seed is not None:
        updates["base_seed"] = args.seed
    if args.iterations is not None:
        updates["iterations"] = args.iterations
    if args.models:
        updates["models"] = tuple(m.strip() for m in args.models.split(",") if m.strip())
    if args.emit_accel_traces:
        updates["emit_accel_traces"] = True
    return replace(cfg, **updates) if updates else cfg


def _prepare_out(args, cfg):
    out_dir = resolve_out_dir(args.out, cfg)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "effective_config.ini"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(dump_config(cfg))
    return out_dir


def cmd_generate(args) -> int:
    cfg = _effective_config(args)
    out_dir = _prepare_out(args, cfg)
    n = args.normal if args.normal is not None else cfg.normal_runs
    a = args.anomalous if args.anomalous is not None else cfg.anomalous_runs
    evaluate.write_logs_with_manifest(cfg, out_dir, n, a, cfg.base_seed)
    print(f"wrote {n} normal + {a} anomalous logs to {out_dir}")
    return 0


def _load_split(cfg, out_dir):
    normals, anomalous = [], []
    for name in sorted(os.listdir(out_dir)):
        if name.startswith("normal_") and name.endswith(".csv"):
            normals.append(read_log(os.path.join(out_dir, name)))
        elif name.startswith("anomalous_") and name.endswith(".csv"):
            anomalous.append(read_log(os.path.join(out_dir, name)))
    if not normals and not anomalous:
        raise RobologError(f"no normal_*.csv / anomalous_*.csv logs found in {out_dir}")
    return build_dataset(normals, anomalous, cfg.test_fraction, cfg.base_seed)


def cmd_train(args) -> int:
    cfg = _effective_config(args)
    out_dir = _prepare_out(args, cfg)
    train, _ = _load_split(cfg, out_dir)
    for kind in cfg.models:
        model = evaluate._train_model(kind, train, cfg, cfg.base_seed)
        path = os.path.join(out_dir, f"model_{kind}.txt")
        models.save_model(model, path)
        print(f"trained {kind} -> {path}")
    return 0


def _load_models(cfg, out_dir):
    out = {}
    for kind in cfg.models:
        path = os.path.join(out_dir, f"model_{kind}.txt")
        if not os.path.exists(path):
            raise RobologError(f"missing checkpoint {path}; run `robolog train` first")
        out[kind] = models.load_model(path)
    return out


def cmd_eval(args) -> int:
    cfg = _effective_config(args)
    out_dir = _prepare_out(args, cfg)
    _, test = _load_split(cfg, out_dir)
    trained = _load_models(cfg, out_dir)
    report = evaluate.EvalReport(context=cfg.context, iterations=1, models=tuple(cfg.models))
    for kind, model in trained.items():
        result, points = evaluate.evaluate_model(model, test)
        report.stats[kind] = {m: (result[m], 0.0) for m in evaluate.METRIC_ORDER}
        report.roc_points[kind] = points
    evaluate.write_report_csv(report, os.path.join(out_dir, "report.csv"))
    for kind in cfg.models:
        evaluate.write_roc_csv(report, kind, os.path.join(out_dir, f"roc_{kind}.csv"))
    print(evaluate.format_report_table(report))
    return 0


def cmd_run(args) -> int:
    cfg = _effective_config(args)
    out_dir = _prepare_out(args, cfg)
    report = evaluate.run_experiment(cfg)
    evaluate.write_report_csv(report, os.path.join(out_dir, "report.csv"))
    for kind in cfg.models:
        evaluate.write_roc_csv(report, kind, os.path.join(out_dir, f"roc_{kind}.csv"))
    if cfg.emit_accel_traces:
        normals, anomalous = evaluate.generate_logs(
            cfg, cfg.base_seed, cfg.normal_runs, cfg.anomalous_runs)
        for i, traj in enumerate(normals):
            evaluate.write_accel_trace(
                traj, os.path.join(out_dir, f"accel_trace_normal_{i}.csv"))
        for i, traj in enumerate(anomalous):
            evaluate.write_accel_trace(
                traj, os.path.join(out_dir, f"accel_trace_anomalous_{i}.csv"))
    print(evaluate.format_report_table(report))
    return 0


def cmd_roc(args) -> int:
    cfg = _effective_config(args)
    out_dir = _prepare_out(args, cfg)
    _, test = _load_split(cfg, out_dir)
    trained = _load_models(cfg, out_dir)
    report = evaluate.EvalReport(context=cfg.context, iterations=1, models=tuple(cfg.models))
    for kind, model in trained.items():
        s, _preds = models.scores(model, test.features)
        report.roc_points[kind] = evaluate.roc_curve(s, test.labels)
        path = os.path.join(out_dir, f"roc_{kind}.csv")
        evaluate.write_roc_csv(report, kind, path)
        print(f"wrote {path}")
    return 0


def _parse_cell(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise RobologError(f"expected x,y cell, got {text!r}")
    try:
        return (int(parts[0]), int(parts[1]))
    except ValueError:
        raise RobologError(f"cell coordinates must be integers: {text!r}") from None


def cmd_plan(args) -> int:
    grid = resolve_grid(args.grid)
    path = planner.plan(grid, _parse_cell(args.start), _parse_cell(args.goal))
    print(f"cost={path.cost:.6f}")
    for cell, world in zip(path.cells, path.world_points):
        print(f"{cell[0]},{cell[1]} -> {world[0]:.3f},{world[1]:.3f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="robolog",
        description="Deterministic robot telemetry generation and "
                    "anomaly-detection benchmark toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate and write labeled telemetry logs")
    _add_common(p)
    p.add_argument("--normal", type=int, help="number of normal logs")
    p.add_argument("--anomalous", type=int, help="number of anomalous logs")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train configured models on generated logs")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate checkpoints and write report files")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="generate + train + eval across all iterations")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("roc", help="write ROC point files from logs + checkpoints")
    _add_common(p)
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("plan", help="plan a path on a grid file or builtin")
    p.add_argument("--grid", required=True, help="grid file path or builtin name")
    p.add_argument("--start", required=True, help="start cell as x,y")
    p.add_argument("--goal", required=True, help="goal cell as x,y")
    p.set_defaults(func=cmd_plan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoPath as exc:
        print(f"error: no path: {exc}", file=sys.stderr)
        return 2
    except (RobologError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
