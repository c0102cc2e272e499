"""``tfrbench`` command line: generate, reconstruct, evaluate, report, run.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Failures print one JSON object ``{"error", "message", "exit_code"}`` to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, TFRError, ValidationError
from ..parallel import resolve_threads
from . import runner
from .config import ExperimentConfig

log = logging.getLogger("tfrbench")


def _common(p, config_required=True):
    p.add_argument("--config", required=config_required, help="experiment config (JSON)")
    p.add_argument("--seed", type=int, help="override the config's global seed")
    p.add_argument("--threads", type=int, help="worker processes (TFR_THREADS overrides)")
    p.add_argument("--out", help="output directory for this phase")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tfrbench", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="solve and store a dataset")
    _common(p)

    p = sub.add_parser("reconstruct", help="run baselines over a dataset's test sets")
    _common(p)
    p.add_argument("--dataset", help="dataset directory (default <out>/dataset)")

    p = sub.add_parser("evaluate", help="score predictions and write CSV + JSON reports")
    _common(p)
    p.add_argument("--dataset")
    p.add_argument("--predictions")
    p.add_argument("--dump", action="store_true",
                   help="also write per-sample metrics and mean error maps")

    p = sub.add_parser("report", help="merge metrics CSVs into markdown tables and figures")
    _common(p, config_required=False)
    p.add_argument("inputs", nargs="*", help="metrics.csv files or report directories")
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("run", help="generate, reconstruct, evaluate and report in one go")
    _common(p)
    p.add_argument("--dump", action="store_true")
    return ap


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _root(cfg, args) -> Path:
    return Path(cfg.out)


def _threads(cfg, args) -> int:
    return resolve_threads(args.threads if args.threads is not None else cfg.threads)


def cmd_generate(args):
    cfg = _load(args)
    out = Path(args.out) if args.out else _root(cfg, args) / "dataset"
    ds = runner.generate(cfg, out, _threads(cfg, args))
    summary = {"dataset": str(out), "config_hash": ds.config_hash,
               "case": ds.spec.case_tag, "grid_n": ds.spec.domain.grid_n,
               "monitors": len(ds.monitors),
               "sets": {k: v["count"] for k, v in ds.manifest["sets"].items()}}
    print(json.dumps(summary, indent=2))


def cmd_reconstruct(args):
    cfg = _load(args)
    dataset = Path(args.dataset) if args.dataset else _root(cfg, args) / "dataset"
    out = Path(args.out) if args.out else _root(cfg, args) / "predictions"
    written = runner.reconstruct(cfg, dataset, out, _threads(cfg, args))
    print(json.dumps({k: str(v) for k, v in written.items()}, indent=2))


def cmd_evaluate(args):
    cfg = _load(args)
    root = _root(cfg, args)
    dataset = Path(args.dataset) if args.dataset else root / "dataset"
    preds = Path(args.predictions) if args.predictions else root / "predictions"
    out = Path(args.out) if args.out else root / "report"
    rep = runner.evaluate_predictions(cfg, dataset, preds, out, dump=args.dump)
    print(runner.rows_to_csv(rep["rows"]), end="")


def cmd_report(args):
    inputs = list(args.inputs)
    out = Path(args.out) if args.out else None
    if args.config:
        cfg = _load(args)
        inputs = inputs or [_root(cfg, args) / "report"]
        out = out or _root(cfg, args) / "report"
    if not inputs:
        raise ConfigError("report needs input CSVs/directories or --config")
    out = out or Path(".")
    path = runner.report(inputs, out, figures=not args.no_figures)
    print(path)


def cmd_run(args):
    cfg = _load(args)
    root = Path(args.out) if args.out else _root(cfg, args)
    threads = _threads(cfg, args)
    runner.generate(cfg, root / "dataset", threads)
    runner.reconstruct(cfg, root / "dataset", root / "predictions", threads)
    rep = runner.evaluate_predictions(cfg, root / "dataset", root / "predictions",
                                      root / "report", dump=args.dump)
    runner.report([root / "report"], root / "report")
    print(runner.rows_to_csv(rep["rows"]), end="")


COMMANDS = {"generate": cmd_generate, "reconstruct": cmd_reconstruct, "evaluate": cmd_evaluate,
            "report": cmd_report, "run": cmd_run}


def _fail(exc: BaseException, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigError, ValidationError) as exc:
        return _fail(exc, 2)
    except (TFRError, OSError, ValueError) as exc:
        return _fail(exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
