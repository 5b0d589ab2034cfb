"""Command-line entry point: ``susy-chain generate|verify|census``.

Exit codes: 0 success, 1 a verification check failed, 2 bad config,
3 every grid point is singular.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .analysis import well_census
from .chain import eval_grid
from .config import ConfigError, load_config
from .verify import run_checks

log = logging.getLogger("susychain")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_ALL_SINGULAR = 0, 1, 2, 3


def _common(parser):
    parser.add_argument("--config", help="chain config (JSON); built-in default when omitted")
    parser.add_argument("--out", help="output path (overrides output.path)")
    parser.add_argument("--format", choices=("csv", "json"), help="overrides output.format")
    parser.add_argument("--stdout", action="store_true", help="write data to stdout only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="susy-chain", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("generate", "sample V_n on the grid; write CSV/JSON plus a JSON sidecar"),
        ("verify", "run the verification checks and write a JSON report"),
        ("census", "list wells and poles of V_n"),
    ):
        _common(sub.add_parser(name, help=help_text))
    return parser


def _emit(text, path, to_stdout):
    if to_stdout:
        sys.stdout.write(text)
    if path and not to_stdout:
        io.atomic_write(path, text)
        log.info("wrote %s", path)


def _sample(cfg):
    sample = eval_grid(cfg.chain(), cfg.x_min, cfg.x_max, cfg.samples)
    if np.all(sample.is_singular):
        raise _AllSingular()
    return sample


class _AllSingular(Exception):
    pass


def cmd_generate(cfg, args) -> int:
    sample = _sample(cfg)
    wells = well_census(sample)
    fmt = args.format or cfg.format
    path = args.out or cfg.path or f"susy_grid.{fmt}"
    if fmt == "csv":
        _emit(io.grid_csv(sample), path, args.stdout)
        if not args.stdout or args.out:
            meta = json.dumps(io.sidecar(sample, cfg.seeds, wells), indent=1) + "\n"
            io.atomic_write(io.sidecar_path(path), meta)
            log.info("wrote %s", io.sidecar_path(path))
    else:
        _emit(io.grid_json(sample, cfg.seeds, wells), path, args.stdout)
    log.info("%d samples, %d poles, %d wells", sample.x.size, len(sample.poles), len(wells))
    return EXIT_OK


def cmd_verify(cfg, args) -> int:
    results = run_checks(cfg)
    ok = all(r.passed for r in results)
    report = {"config": cfg.to_dict(), "checks": [r.to_dict() for r in results], "pass": ok}
    text = json.dumps(report, indent=1) + "\n"
    if args.stdout or not args.out:
        sys.stdout.write(text)
    else:
        io.atomic_write(args.out, text)
    for r in results:
        log.log(logging.INFO if r.passed else logging.ERROR, "%-10s %s  %s (threshold %g) %s",
                r.name, "PASS" if r.passed else "FAIL", r.max_residual, r.threshold, r.detail)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_census(cfg, args) -> int:
    sample = _sample(cfg)
    wells = well_census(sample)
    fmt = args.format or "json"
    if fmt == "json":
        doc = {
            "wells": [{"location": w.location, "depth": w.depth} for w in wells],
            "poles": [{"location": p.location, "kind": p.kind, "level": p.level} for p in sample.poles],
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        rows = ["feature,location,value,kind"]
        rows += [f"well,{w.location!r},{w.depth!r}," for w in wells]
        rows += [f"pole,{p.location!r},,{p.kind}" for p in sample.poles]
        text = "\n".join(rows) + "\n"
    if args.out and not args.stdout:
        io.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "verify": cmd_verify, "census": cmd_census}


def _configure_logging(verbose):
    # own handler so diagnostics reach stderr even if the root logger is configured
    for handler in [h for h in log.handlers if getattr(h, "_susy_cli", False)]:
        log.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    handler._susy_cli = True
    log.addHandler(handler)
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except _AllSingular:
        log.error("every grid point is singular")
        return EXIT_ALL_SINGULAR


if __name__ == "__main__":
    sys.exit(main())
