"""Command-line front door: run, compare, analyze, serve.

Exit codes: 0 success, 1 usage or input error, 2 task failure (the
session ended with broken chalk or a safety stop).  All artifacts are
byte-stable for a fixed seed so runs diff cleanly in CI.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (
    ConfigError,
    ControlParams,
    ScenarioConfig,
    load_config,
    save_config,
    scenario,
)
from .environment import StrokeCanvas
from .metrics import human_reference, session_metrics
from .operator import ReplayOperator, ScriptedOperator, ScriptedTask, TremorParams
from .reporting import session_summary, strokes_to_svg, write_json
from .session import SessionLog, run_session

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TASK_FAILED = 2


class UsageError(Exception):
    pass


def _resolve_config(label: str | None, path: Path | None,
                    rate_hz: float | None) -> ScenarioConfig:
    if label is not None and path is not None:
        raise UsageError("give either --scenario or --config, not both")
    if path is not None:
        cfg = load_config(path)
    else:
        cfg = scenario(label if label is not None else "C")
    if rate_hz is not None:
        if rate_hz <= 0:
            raise UsageError("--rate-hz must be positive")
        cfg = cfg.replace(control=ControlParams(rate_hz=rate_hz))
    return cfg


def build_operator(spec: str, cfg: ScenarioConfig, seed: int):
    """Operator factory from a source spec: scripted:<TEXT> | replay:<csv>."""
    kind, _, arg = spec.partition(":")
    if kind == "scripted":
        task = ScriptedTask(text=arg or "ACG",
                            tremor=TremorParams(seed=seed))
        try:
            return ScriptedOperator(task, cfg.env, cfg.plant.start_position,
                                    cfg.control.rate_hz,
                                    base_rotation=cfg.mapping.base_rotation)
        except KeyError as exc:
            raise UsageError(f"no stroke layout for letter {exc}") from exc
    if kind == "replay":
        if not arg:
            raise UsageError("replay operator needs a CSV path: replay:<path>")
        path = Path(arg)
        if not path.exists():
            raise UsageError(f"replay file not found: {path}")
        return ReplayOperator.from_csv(path)
    raise UsageError(f"unknown operator source {spec!r} "
                     "(expected scripted:<TEXT> or replay:<path>)")


def _run_one(cfg: ScenarioConfig, operator, duration: float | None,
             outdir: Path) -> tuple[int, dict]:
    """Execute one session and write the full artifact set into outdir."""
    outcome = run_session(cfg, operator, duration)
    human_span = max(outcome.duration, 2.0 * cfg.control.dt, 1e-3)
    human = human_reference(human_span, cfg.control.rate_hz)
    f_th = cfg.normal_force_limit if cfg.saturation_enabled else None
    metrics = session_metrics(
        outcome.log, outcome.canvas, cfg.env,
        getattr(operator, "intended_segments", None), human, f_th=f_th)
    metrics["success"] = outcome.success
    metrics["failure_reason"] = outcome.failure_reason

    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "log.csv").write_text(outcome.log.to_csv())
    (outdir / "strokes.svg").write_text(
        strokes_to_svg(outcome.canvas.as_arrays()))
    write_json(outdir / "summary.json", session_summary(outcome, cfg, metrics))
    write_json(outdir / "metrics.json", metrics)
    save_config(cfg, outdir / "config.yaml")
    code = EXIT_OK if outcome.success else EXIT_TASK_FAILED
    return code, metrics


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args.scenario, args.config, args.rate_hz)
    operator = build_operator(args.operator, cfg, args.seed)
    code, metrics = _run_one(cfg, operator, args.duration_s, args.out)
    status = "success" if code == EXIT_OK else metrics["failure_reason"]
    print(f"scenario {cfg.label}: {status}")
    if "mean_difference_n" in metrics:
        print(f"  mean difference  {metrics['mean_difference_n']:8.3f} N")
        print(f"  peak difference  {metrics['peak_difference_n']:8.3f} N")
    if "unintended_gaps" in metrics:
        print(f"  unintended gaps  {metrics['unintended_gaps']:5d}")
    print(f"  artifacts in {args.out}")
    return code


def cmd_compare(args: argparse.Namespace) -> int:
    if args.config:
        configs = [load_config(p) for p in args.config]
    else:
        labels = [s.strip() for s in args.scenarios.split(",") if s.strip()]
        configs = [scenario(label) for label in labels]
    if len(configs) < 2:
        raise UsageError("compare needs at least two scenarios")
    if args.rate_hz is not None:
        configs = [c.replace(control=ControlParams(rate_hz=args.rate_hz))
                   for c in configs]

    rows = []
    table: dict[str, dict] = {}
    for cfg in configs:
        operator = build_operator(args.operator, cfg, args.seed)
        subdir = args.out / f"scenario_{cfg.label}"
        _, metrics = _run_one(cfg, operator, args.duration_s, subdir)
        table[cfg.label] = metrics
        rows.append((
            cfg.label,
            "success" if metrics["success"] else metrics["failure_reason"],
            metrics.get("mean_difference_n"),
            metrics.get("peak_difference_n"),
            metrics.get("unintended_gaps"),
        ))

    write_json(args.out / "metrics.json", table)
    fmt_f = lambda v: "     --" if v is None else f"{v:7.3f}"
    fmt_i = lambda v: "  --" if v is None else f"{v:4d}"
    print(f"{'scenario':<9} {'outcome':<14} {'MD [N]':>7} "
          f"{'peak diff [N]':>13} {'gaps':>4}")
    for label, outcome, md, peak, gaps in rows:
        print(f"{label:<9} {outcome:<14} {fmt_f(md):>7} "
              f"{fmt_f(peak):>13} {fmt_i(gaps):>4}")
    print(f"artifacts in {args.out}")
    return EXIT_OK


def _rebuild_canvas(log: SessionLog, env) -> StrokeCanvas:
    """Replay stroke deposition from a log; bit-equal to the live canvas."""
    canvas = StrokeCanvas()
    for i in range(len(log)):
        tip = log.plant_p[i]
        depth = env.penetration(tip)
        canvas.deposit(env.to_board(tip), depth > 0.0,
                       bool(log.chalk_intact[i]))
    return canvas


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args.scenario, args.config, None)
    f_th = cfg.normal_force_limit if cfg.saturation_enabled else None
    reports: dict[str, dict] = {}
    for path in args.logs:
        log_path = Path(path)
        if not log_path.exists():
            raise UsageError(f"log not found: {log_path}")
        log = SessionLog.read(log_path)
        canvas = _rebuild_canvas(log, cfg.env)
        span = max(log.t[-1] - log.t[0], 2.0 * cfg.control.dt) if len(log) \
            else 1e-3
        human = human_reference(span, cfg.control.rate_hz)
        reports[str(log_path)] = session_metrics(
            log, canvas, cfg.env, args.intended, human, f_th=f_th)

    payload = next(iter(reports.values())) if len(reports) == 1 else reports
    write_json(args.out, payload)
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_app

    cfg = _resolve_config(args.scenario, args.config, args.rate_hz)
    static = None
    if args.static is not None:
        if not Path(args.static).is_dir():
            raise UsageError(f"static directory not found: {args.static}")
        static = str(args.static)
    app = build_app(cfg, real_time=True, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hapticsim",
        description="Deterministic haptic teleoperation writing simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--operator", default="scripted:ACG",
                       help="scripted:<TEXT> or replay:<csv> "
                            "(default scripted:ACG)")
        p.add_argument("--seed", type=int, default=0,
                       help="tremor RNG seed (default 0)")
        p.add_argument("--rate-hz", type=float, default=None,
                       help="override control rate")
        p.add_argument("--duration-s", type=float, default=None,
                       help="override run duration")

    p_run = sub.add_parser("run", help="run one scenario, write artifacts")
    p_run.add_argument("--scenario", choices=["A", "B", "C"], default=None)
    p_run.add_argument("--config", type=Path, default=None,
                       help="scenario config YAML (instead of --scenario)")
    p_run.add_argument("--out", type=Path, default=Path("out"))
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare",
                           help="run scenarios on one trace, tabulate")
    p_cmp.add_argument("--scenarios", default="A,B,C",
                       help="comma-separated labels (default A,B,C)")
    p_cmp.add_argument("--config", type=Path, nargs="*", default=None,
                       help="explicit config files instead of labels")
    p_cmp.add_argument("--out", type=Path, default=Path("compare_out"))
    common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_an = sub.add_parser("analyze", help="recompute metrics from log CSVs")
    p_an.add_argument("logs", nargs="+", help="session log.csv paths")
    p_an.add_argument("--scenario", choices=["A", "B", "C"], default=None)
    p_an.add_argument("--config", type=Path, default=None,
                      help="config used for board geometry and thresholds")
    p_an.add_argument("--intended", type=int, default=None,
                      help="intended pen-down segment count for gap scoring")
    p_an.add_argument("--out", type=Path, default=Path("metrics.json"))
    p_an.set_defaults(func=cmd_analyze)

    p_srv = sub.add_parser("serve", help="WebSocket session service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--scenario", choices=["A", "B", "C"], default=None)
    p_srv.add_argument("--config", type=Path, default=None)
    p_srv.add_argument("--rate-hz", type=float, default=None)
    p_srv.add_argument("--static", type=Path, default=None,
                       help="serve a built cockpit bundle from this dir")
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
