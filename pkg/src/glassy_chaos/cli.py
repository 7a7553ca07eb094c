"""Command-line runner: ``python -m glassy_chaos COMMAND [options]``.

Exit status: 0 on success, 1 when a command's own checks fail (``report``
fails on any acceptance gate), 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from importlib import metadata

from . import experiments
from .config import ConfigError, ExperimentConfig, config_hash, dump_config, load_config, validate
from .fields import dump_field_path
from .limit_law import write_atoms_csv
from .parallel import resolve_workers

log = logging.getLogger("glassy_chaos")


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _header(cfg, command, seed):
    return {"artifact": "glassy_chaos", "version": _version(), "command": command,
            "config_hash": config_hash(cfg), "seed": seed}


def _write_csv(path, header, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for k, v in header.items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def _json_default(x):
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


def build_parser():
    p = argparse.ArgumentParser(prog="glassy-chaos", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(experiments.COMMANDS))
    p.add_argument("--config", help="INI experiment config (defaults are the desk-scale profile)")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--workers", type=int, help="worker processes (else $GLASSY_CHAOS_WORKERS, else run.workers)")
    p.add_argument("--out", help="output directory (else run.out)")
    p.add_argument("--criteria", help="comma-separated criterion ids for report (else report.criteria)")
    p.add_argument("--dump-fields", action="store_true", help="write sampled fields as a binary dump (measure)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg.run.seed = args.seed
        if args.criteria:
            cfg.report.criteria = tuple(int(c) for c in args.criteria.split(","))
        errs = validate(cfg)
        if errs:
            raise ConfigError(errs)
        workers = resolve_workers(args.workers, cfg.run.workers)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = args.out or cfg.run.out
    os.makedirs(out_dir, exist_ok=True)
    seed = cfg.run.seed
    header = _header(cfg, args.command, seed)
    func = experiments.COMMANDS[args.command]
    kwargs = {"dump": True} if args.dump_fields and args.command == "measure" else {}
    try:
        outcome = func(cfg, workers=workers, **kwargs)
    except ValueError as exc:
        # model preconditions that only surface once objects are built
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    stem = args.command.replace("-", "_")
    for name, (cols, rows) in outcome.tables.items():
        _write_csv(os.path.join(out_dir, f"{name}.csv"), header, cols, rows)
    if outcome.atoms is not None:
        with open(os.path.join(out_dir, "atoms.csv"), "w", encoding="utf-8") as fh:
            write_atoms_csv(outcome.atoms, fh, [f"{k}: {v}" for k, v in header.items()])
    if outcome.fields_dump is not None:
        with open(os.path.join(out_dir, "fields.bin"), "wb") as fh:
            dump_field_path(outcome.fields_dump, fh)
    with open(os.path.join(out_dir, f"{stem}_config.ini"), "w", encoding="utf-8") as fh:
        fh.write(dump_config(cfg))
    body = {"header": header, "passed": outcome.passed, "summary": outcome.summary}
    with open(os.path.join(out_dir, f"{stem}.json"), "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")

    if args.command == "report":
        for c in outcome.summary["criteria"]:
            print(f"criterion {c['id']:2d} [{'PASS' if c['passed'] else 'FAIL'}] {c['title']}")
    else:
        status = {True: "PASS", False: "FAIL", None: "done"}[outcome.passed]
        print(f"{args.command}: {status} (outputs in {out_dir})")
    return 1 if outcome.passed is False else 0


if __name__ == "__main__":
    sys.exit(main())
