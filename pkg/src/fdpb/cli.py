"""Command-line entry points.

`fdpb run` and `fdpb sweep` execute experiments in-process and write CSV
results; `fdpb serve` starts the HTTP service wrapping the same core.
Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import datetime
import logging
import sys
from pathlib import Path

from . import __version__
from .config import (
    ExperimentConfig,
    apply_sweep_point,
    parse_config,
    parse_sweep_text,
)
from .errors import ConfigError, ParseError
from .results import write_comparison_csv, write_run_outputs
from .sim import run_experiment


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _ensure_writable(out_dir: Path) -> None:
    """Fail before any computation if the output directory is unusable."""
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write_probe"
    probe.write_text("", encoding="utf-8")
    probe.unlink()


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    return cfg


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out_dir = Path(args.out)
    _ensure_writable(out_dir)
    started = _now()
    result = run_experiment(cfg, dump_knowledge=args.dump_knowledge)
    write_run_outputs(result, cfg, out_dir, __version__, started, _now())
    if not args.quiet:
        final = result.reports[-1]
        print(
            f"run complete: rounds={cfg.rounds} "
            f"tol_avg_acc={final.tol_avg_acc:.4f} "
            f"vctm_avg_acc={final.vctm_avg_acc:.4f} -> {out_dir}"
        )
    return 0


def _sweep_dir_name(method: str, axis: str, value: object) -> str:
    rendered = ("true" if value else "false") if isinstance(value, bool) else str(value)
    return f"{method}_{axis}_{rendered}".replace("/", "_")


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = _load_config(args)
    sweep = parse_sweep_text(Path(args.config).read_text(encoding="utf-8"), str(args.config))
    out_dir = Path(args.out)
    _ensure_writable(out_dir)

    rows = []
    for method in sweep.methods:
        for value in sweep.values:
            cfg = apply_sweep_point(base, method, sweep.axis, value)
            started = _now()
            result = run_experiment(cfg)
            sub = out_dir / _sweep_dir_name(method, sweep.axis, value)
            write_run_outputs(result, cfg, sub, __version__, started, _now())
            final = result.reports[-1]
            rows.append((method, sweep.axis, value, final.tol_avg_acc, final.vctm_avg_acc))
            if not args.quiet:
                print(
                    f"sweep point method={method} {sweep.axis}={value}: "
                    f"tol={final.tol_avg_acc:.4f} vctm={final.vctm_avg_acc:.4f}"
                )
    path = write_comparison_csv(rows, out_dir)
    if not args.quiet:
        print(f"sweep complete: {len(rows)} runs -> {path}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdpb",
        description="Federated-distillation poisoning benchmark simulator",
    )
    parser.add_argument("--version", action="version", version=f"fdpb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one experiment and write CSVs")
    run_p.add_argument("config", help="experiment config file (INI)")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="master seed override")
    run_p.add_argument(
        "--dump-knowledge", action="store_true", help="also write knowledge.csv"
    )
    run_p.add_argument("--quiet", action="store_true", help="suppress progress output")

    sweep_p = sub.add_parser("sweep", help="run a method-by-axis grid of experiments")
    sweep_p.add_argument("config", help="experiment config with a [sweep] section")
    sweep_p.add_argument("--out", required=True, help="output directory")
    sweep_p.add_argument("--seed", type=int, default=None, help="master seed override")
    sweep_p.add_argument("--quiet", action="store_true", help="suppress progress output")

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_serve(args)
    except (ConfigError, ParseError) as exc:
        print(f"fdpb: validation error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"fdpb: validation error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"fdpb: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
