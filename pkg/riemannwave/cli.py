import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from riemannwave.core.config import configure_logging, load_run_config
from riemannwave.core.exceptions import EXIT_CONFIG, EXIT_OK, ConfigError

logger = logging.getLogger(__name__)


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "physics.epsilon": getattr(args, "epsilon", None),
        "diagnostics.max_j": getattr(args, "max_j", None),
        "stepping.project_constraints": True if getattr(args, "project", False) else None,
        "output.directory": getattr(args, "out", None),
        "seed": getattr(args, "seed", None),
    }


def cmd_run(args: argparse.Namespace) -> int:
    from riemannwave.services.runner import run_simulation

    config = load_run_config(args.config, _overrides(args))
    result = run_simulation(config)
    s = result.summary
    logger.info("run %s status=%s reports=%d wall=%.2fs", s.name, s.status, s.reports, s.wall_time)
    return s.exit_code


def cmd_sweep(args: argparse.Namespace) -> int:
    from riemannwave.services.sweep import run_sweep

    config = load_run_config(args.config, _overrides(args))
    out = args.out or config.output.directory
    result = run_sweep(config, args.eps0, args.ratio, args.count, args.periods, args.workers, out)
    return result.exit_code


def cmd_verify(args: argparse.Namespace) -> int:
    from riemannwave.services.verification import run_verification

    report = run_verification(args.seed, args.n, not args.no_dynamics, args.only, args.out)
    for r in report.results:
        logger.info("%-26s %-5s value=%s threshold=%s", r.name, "ok" if r.passed else "FAIL", r.value, r.threshold)
    if not report.passed:
        logger.error("mandatory failures: %s", ", ".join(report.mandatory_failures))
    return EXIT_OK if report.passed else 1


def cmd_converge(args: argparse.Namespace) -> int:
    from riemannwave.services.converge import run_convergence

    config = load_run_config(args.config, _overrides(args))
    report = run_convergence(config, args.out or config.output.directory)
    for row in report.dt_rows + report.n_rows:
        logger.info("%s=%.6g error=%s order=%s", row.parameter, row.value, row.error, row.observed_order)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("riemannwave.main:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riemannwave", description="Water waves in the Riemann variable")
    parser.add_argument("--log-level", default=None, help="overrides RIEMANNWAVE_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, required=True)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--max-j", dest="max_j", type=int, default=None)
        p.add_argument("--project", action="store_true", help="project onto the holomorphy constraints each step")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("run", help="single simulation with energy diagnostics")
    run_options(p)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("sweep", help="epsilon ladder and log-log slopes")
    run_options(p)
    p.add_argument("--eps0", type=float, default=0.08)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--periods", type=int, nargs="+", default=[1, 2])
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("verify", help="identity and inequality suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--only", nargs="+", default=None, help="property names to run")
    p.add_argument("--no-dynamics", action="store_true")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("converge", help="dt and N refinement tables")
    run_options(p)
    p.set_defaults(handler=cmd_converge)

    p = sub.add_parser("serve", help="read-only HTTP API over results")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
