"""
Command line front end.

    python -m geoball ball configs/flat.ini
    python -m geoball verify configs/berger.ini --checks theorem1,gauss_bonnet
    python -m geoball verify configs/sphere.ini --all --out results/
    python -m geoball serve --endpoint tcp://*:5556

Exit codes: 0 all verdicts pass, 1 a check failed, 2 hypothesis or
precondition violated, 3 numerics under-resolved. Diagnostics go to stderr
as one JSON object per line; the summary goes to stdout.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from geoball.ballvolume import ball_functions, sphere_quadrature
from geoball.curvature import curvature_at
from geoball.errors import GeoballError
from geoball.verify import SuiteContext, applicable_checks, run_suite

from .config import RunConfig, parse_config
from .report import BANNER, emit_csv, print_summary

logger = logging.getLogger("geoball")

COMMANDS = ("curvature", "ball", "verify", "compare", "serve")


class JsonFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record):
        entry = {"level": record.levelname, "logger": record.name, "message": record.getMessage()}
        for key in ("status", "error", "exit_code"):
            if hasattr(record, key):
                entry[key] = getattr(record, key)
        if record.exc_info:
            entry["traceback"] = self.formatException(record.exc_info)
        return json.dumps(entry)


def setup_logging(level="WARNING", stream=None):
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(JsonFormatter())
    root = logging.getLogger("geoball")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def _artifact(config, name):
    return Path(config.out_dir) / f"{config.prefix}{name}.csv"


def _evaluator(config):
    if not config.remote:
        return None
    from geoball.messaging import RemoteRayEvaluator

    return RemoteRayEvaluator(config.remote)


def _context(config, evaluator=None):
    return SuiteContext(
        family=config.family,
        p=config.base_point,
        opts=config.ray,
        quad=sphere_quadrature(config.level),
        kappa_bound=config.kappa_bound,
        sec_bound=config.sec_bound,
        ric_bound=config.ric_bound,
        corollary_kappas=tuple(config.corollary_kappas),
        evaluator=evaluator,
        chunk_size=config.chunk_size,
        resolution_tol=config.resolution_tol if config.resolution_check else None,
        **config.tolerances,
    )


def run_curvature(config):
    data = curvature_at(config.family, config.base_point)
    with np.printoptions(precision=12, suppress=True):
        print(BANNER)
        print(f"Curvature of {config.family.describe()} at {config.base_point.coords}")
        print(BANNER)
        print(f"Curvature operator eigenvalues: {data.op_eigenvalues}")
        print(f"Ricci eigenvalues:              {data.ricci_eigenvalues}")
        print(f"Scalar curvature:               {data.scalar:.12g}")
        print(f"K+:                             {max(0.0, data.ricci_eigenvalues[-1]):.12g}")
        print("Curvature operator matrix (e1^e2, e1^e3, e2^e3):")
        print(data.op_matrix)
        print(BANNER)
    return 0


def run_ball(config, evaluator=None):
    ctx = _context(config, evaluator)
    path = emit_csv(ctx.profile, _artifact(config, "ball"))
    print_summary("Ball profile", config, artifacts=[path])
    return 0


def run_verify(config, checks, evaluator=None):
    ctx = _context(config, evaluator)
    if "all" in checks:
        checks = applicable_checks(config.family)
    if not checks:
        raise GeoballError("no checks requested; use [verify] checks=..., --checks or --all")
    results = run_suite(list(checks), ctx)
    seen = {}
    paths = []
    for result in results:
        seen[result.name] = seen.get(result.name, 0) + 1
        suffix = f"_{seen[result.name]}" if result.name == "corollary" else ""
        paths.append(emit_csv(result, _artifact(config, f"{result.name}{suffix}")))
    for name, curve in ctx.curves.items():
        paths.append(emit_csv(curve, _artifact(config, f"{name}_curve")))
    print_summary("Verification", config, results, paths)
    return 0 if all(r.passed for r in results) else 1


def run_compare(config, evaluator=None):
    ctx = _context(config, evaluator)
    results = run_suite(["bishop_gunter"], ctx)
    path = emit_csv(ctx.curves["bishop_gunter"], _artifact(config, "bishop_gunter"))
    print_summary("Bishop-Gunter comparison", config, results, [path])
    return 0 if all(r.passed for r in results) else 1


def run(config, command, checks=None):
    """
    Execute one subcommand for a parsed configuration.

    Returns:
        exit code (0 pass, 1 failed check, 2 precondition, 3 under-resolved)
    """
    if not isinstance(config, RunConfig):
        raise ValueError(f"run needs a RunConfig, got {type(config).__name__}")
    evaluator = None
    try:
        if command == "curvature":
            return run_curvature(config)
        if command not in ("ball", "verify", "compare"):
            raise ValueError(f"unknown command '{command}'")
        evaluator = _evaluator(config)
        if command == "ball":
            return run_ball(config, evaluator)
        if command == "verify":
            return run_verify(config, checks if checks is not None else config.checks, evaluator)
        return run_compare(config, evaluator)
    except GeoballError as exc:
        logger.error(str(exc), extra={"status": "error", "error": type(exc).__name__, "exit_code": exc.exit_code})
        return exc.exit_code
    except ValueError as exc:
        logger.error(str(exc), extra={"status": "error", "error": "ValueError", "exit_code": 2})
        return 2
    finally:
        if evaluator is not None:
            evaluator.close()


def build_parser():
    parser = argparse.ArgumentParser(prog="geoball", description="Curvature and geodesic ball volumes on 3-manifolds")
    parser.add_argument("--log-level", default="WARNING", help="stderr log level (DEBUG, INFO, WARNING, ...)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("curvature", "ball", "verify", "compare"):
        cmd = sub.add_parser(name)
        cmd.add_argument("config", help="run configuration file (.ini)")
        cmd.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
        if name == "verify":
            cmd.add_argument("--checks", default=None, help="comma separated check names")
            cmd.add_argument("--all", action="store_true", help="run every check applicable to the family")
    serve = sub.add_parser("serve")
    serve.add_argument("--endpoint", default="tcp://*:5556", help="address the ray server binds")
    serve.add_argument("--max-requests", type=int, default=None, help="stop after this many requests")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level.upper())

    if args.command == "serve":
        from geoball.messaging import RayServer

        print(BANNER)
        print(f"Ray server on {args.endpoint}")
        print(BANNER)
        RayServer(args.endpoint, max_requests=args.max_requests).serve_forever()
        return 0

    overrides = {}
    if args.out:
        overrides["output"] = {"dir": args.out}
    try:
        text = Path(args.config).read_text()
        config = parse_config(text, overrides)
    except OSError as exc:
        logger.error(f"cannot read {args.config}: {exc}", extra={"status": "error", "error": "IoError", "exit_code": 2})
        return 2
    except GeoballError as exc:
        logger.error(str(exc), extra={"status": "error", "error": type(exc).__name__, "exit_code": exc.exit_code})
        return exc.exit_code

    checks = None
    if args.command == "verify":
        if args.all:
            checks = ["all"]
        elif args.checks:
            checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    return run(config, args.command, checks)


__all__ = ["RunConfig", "emit_csv", "main", "parse_config", "run"]
