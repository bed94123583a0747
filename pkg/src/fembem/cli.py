"""Command line driver for the L-shape convergence study.

Settings are resolved as defaults < config file < environment < flags.
Environment variables use the prefix ``FEMBEM_`` followed by the upper-case
key (``FEMBEM_DEGREE``, ``FEMBEM_LEVELS``, ...). A config file holds
``key = value`` lines with the same keys as the long flags, using
underscores (``data_mode``, ``quad_volume``, ...); ``#`` starts a comment.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .coupling import DATA_MODES, SolverError
from .report import emit_report
from .study import StudyConfig, run_study

ENV_PREFIX = "FEMBEM_"
KEYS = ("degree", "alpha", "levels", "data_mode", "quad_volume", "quad_boundary", "format", "out",
        "dump_mesh", "dump_matrix")
DEFAULT_LEVELS = {1: (0, 6), 2: (0, 5)}


def parse_levels(text: str) -> tuple[int, int]:
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
    else:
        lo = hi = text
    return int(lo), int(hi)


def read_config_file(path) -> dict:
    settings = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            settings[key] = value
    return settings


def read_environment(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    return {key: environ[ENV_PREFIX + key.upper()] for key in KEYS if ENV_PREFIX + key.upper() in environ}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fembem-study", description="FEM-BEM coupling convergence study on the L-shape.")
    p.add_argument("--config", help="key=value settings file")
    p.add_argument("--degree", type=int, choices=(1, 2))
    p.add_argument("--alpha", type=float, help="singularity exponent (default: degree + 1/2)")
    p.add_argument("--levels", help="inclusive level range A..B")
    p.add_argument("--data-mode", dest="data_mode", choices=DATA_MODES)
    p.add_argument("--quad-volume", dest="quad_volume", type=int)
    p.add_argument("--quad-boundary", dest="quad_boundary", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--dump-mesh", dest="dump_mesh", metavar="PREFIX", help="write <PREFIX>.level<L>.txt meshes")
    p.add_argument("--dump-matrix", dest="dump_matrix", metavar="PREFIX", help="write <PREFIX>.level<L>.txt matrices")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace, environ=None) -> StudyConfig:
    settings = {}
    if args.config:
        settings.update(read_config_file(args.config))
    settings.update(read_environment(environ))
    settings.update({k: getattr(args, k) for k in KEYS if getattr(args, k, None) is not None})

    degree = int(settings.get("degree", 1))
    alpha = float(settings["alpha"]) if "alpha" in settings else degree + 0.5
    levels = parse_levels(settings["levels"]) if "levels" in settings else DEFAULT_LEVELS.get(degree, (0, 0))
    config = StudyConfig(
        degree=degree,
        alpha=alpha,
        levels=levels,
        data_mode=settings.get("data_mode", "project-u0"),
        quad_order_volume=int(settings.get("quad_volume", 10)),
        quad_order_boundary=int(settings.get("quad_boundary", 16)),
        output=settings.get("out"),
        format=settings.get("format", "csv"),
        dump_mesh=settings.get("dump_mesh"),
        dump_matrix=settings.get("dump_matrix"),
    )
    config.validate()
    return config


def main(argv=None, environ=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = resolve_config(args, environ)
    except (ValueError, OSError) as exc:
        print(f"fembem-study: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        reports, table = run_study(config)
    except SolverError as exc:
        print(f"fembem-study: solver failure: {exc}", file=sys.stderr)
        return 1
    try:
        emit_report(reports, table, config.format, config.output)
    except OSError as exc:
        print(f"fembem-study: cannot write report: {exc}", file=sys.stderr)
        return 1
    return 0


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
