"""Pipeline phases: generate, reconstruct, evaluate, report."""
from __future__ import annotations

import csv
import io
import json
import logging
import platform
import time
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..dataset import Dataset, RecordSet, generate_dataset, read_records, write_records
from ..errors import ConfigError, FormatError, MissingTrainSetError, ShapeMismatchError
from ..layout import rasterize
from ..metrics import METRIC_NAMES, aggregate, build_masks, evaluate
from ..parallel import pool_map
from ..reconstruct import TrainSetView, make_reconstructor
from ..sampling import STRATEGIES
from .config import ExperimentConfig

log = logging.getLogger(__name__)

CSV_COLUMNS = ("method", "case", "test_set", *METRIC_NAMES, "n_samples", "config_hash")
PRED_FORMAT = "TFRS-predictions"


def _record_timing(root: Path, phase: str, seconds: float) -> None:
    # kept next to (not inside) the artifacts so containers stay byte-reproducible
    path = root / "timings.json"
    data = json.loads(path.read_text()) if path.exists() else {}
    data[phase] = round(seconds, 3)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def generate(cfg: ExperimentConfig, out: Path, threads: int = 1) -> Dataset:
    t0 = time.perf_counter()
    spec = cfg.system_spec()
    ds = generate_dataset(spec, cfg.counts, cfg.seed, cfg.solver_config(),
                          monitor_seed=cfg.monitor_seed, threads=threads,
                          extra={"experiment": {k: v for k, v in cfg.to_dict().items()
                                                if k not in ("out", "threads", "baselines", "metrics")}})
    ds.save(out)
    _record_timing(Path(out).parent, "generate", time.perf_counter() - t0)
    return ds


def _predict_one(task):
    kind, hyper, obs, monitors, spec = task
    return make_reconstructor(kind, **hyper).predict_field(obs, monitors, spec)


def reconstruct(cfg: ExperimentConfig, dataset_path: Path, out: Path, threads: int = 1) -> dict:
    """Run every configured baseline over every test set; returns ``{kind: out_dir}``."""
    t0 = time.perf_counter()
    ds = Dataset.load(dataset_path)
    m = len(ds.monitors)
    models = {kind: make_reconstructor(kind, **cfg.hyper(kind)) for kind in cfg.kinds}
    for model in models.values():
        model.check(m)
    if "mlp_vector" in models and len(ds.sets.get("Train", ())) == 0:
        raise MissingTrainSetError("mlp_vector needs a non-empty Train set in the dataset")
    test_sets = [name for name in STRATEGIES if name in ds.sets and name != "Train"]
    out = Path(out)
    written = {}
    for kind, model in models.items():
        preds = {}
        if model.per_instance:
            tasks = [(kind, model.hyperparameters(), obs, ds.monitors, ds.spec)
                     for name in test_sets for obs in ds.sets[name].observations]
            fields = pool_map(_predict_one, tasks, threads)
            pos = 0
            for name in test_sets:
                c = len(ds.sets[name])
                preds[name] = np.array(fields[pos:pos + c]).reshape(c, ds.spec.domain.grid_n, -1)
                pos += c
        else:
            tr = ds.sets["Train"]
            model.fit(TrainSetView(tr.observations, tr.fields))
            for name in test_sets:
                preds[name] = model.predict_batch(ds.sets[name].observations)
        target = out / kind
        target.mkdir(parents=True, exist_ok=True)
        for name, f in preds.items():
            write_records(target / f"{name}.tfrs", RecordSet.fields_only(f))
        if not model.per_instance:
            model.save(target / "weights.tfrw")
        manifest = {
            "format": PRED_FORMAT,
            "format_version": 1,
            "method": kind,
            "hyperparameters": model.hyperparameters(),
            "normalization": model.normalization(),
            "dataset_config_hash": ds.config_hash,
            "sets": {name: {"count": len(preds[name]), "file": f"{name}.tfrs"} for name in test_sets},
        }
        (target / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        written[kind] = target
        log.info("%s: predicted %d test sets", kind, len(test_sets))
    _record_timing(out.parent, "reconstruct", time.perf_counter() - t0)
    return written


def _load_predictions(pred_root: Path, kinds=None) -> list[tuple[str, dict, Path]]:
    pred_root = Path(pred_root)
    if not pred_root.is_dir():
        raise FormatError(f"{pred_root}: predictions directory not found")
    found = {}
    for d in sorted(pred_root.iterdir()):
        mf = d / "manifest.json"
        if d.is_dir() and mf.exists():
            manifest = json.loads(mf.read_text())
            if manifest.get("format") != PRED_FORMAT:
                raise FormatError(f"{mf}: not a predictions manifest")
            found[manifest["method"]] = (manifest, d)
    order = [k for k in (kinds or []) if k in found] + sorted(set(found) - set(kinds or []))
    return [(k, *found[k]) for k in order]


def _fmt(v: float) -> str:
    return f"{v:.8f}"


def evaluate_predictions(cfg: ExperimentConfig, dataset_path: Path, pred_root: Path, out: Path,
                         dump: bool = False) -> dict:
    """Score predictions against ground truth; writes ``metrics.csv`` and ``report.json``."""
    t0 = time.perf_counter()
    ds = Dataset.load(dataset_path)
    masks = build_masks(rasterize(ds.spec), cfg.boundary_width)
    case = ds.spec.case_tag or "custom"
    rows, sample_rows, error_maps = [], [], {}
    for kind, manifest, d in _load_predictions(pred_root, cfg.kinds):
        if manifest["dataset_config_hash"] != ds.config_hash:
            raise ShapeMismatchError(
                f"{kind}: predictions were made from dataset {manifest['dataset_config_hash'][:12]}, "
                f"not {ds.config_hash[:12]}")
        for name, info in manifest["sets"].items():
            if name not in ds.sets:
                raise ShapeMismatchError(f"{kind}: set {name} missing from the dataset")
            pred = read_records(d / info["file"]).fields
            truth = ds.sets[name].fields
            if pred.shape != truth.shape:
                raise ShapeMismatchError(
                    f"{kind}/{name}: prediction shape {pred.shape} vs truth {truth.shape}")
            reports = [evaluate(p, t, masks) for p, t in zip(pred, truth)]
            agg = aggregate(reports)
            rows.append({"method": kind, "case": case, "test_set": name,
                         **agg.as_dict(), "n_samples": len(reports),
                         "config_hash": ds.config_hash})
            if dump:
                for k, r in enumerate(reports):
                    sample_rows.append({"method": kind, "test_set": name, "index": k, **r.as_dict()})
                error_maps[f"{kind}/{name}"] = np.abs(pred - truth).mean(axis=0)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(rows_to_csv(rows))
    if dump:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("method", "test_set", "index", *METRIC_NAMES))
        for r in sample_rows:
            w.writerow([r["method"], r["test_set"], r["index"], *(_fmt(r[m]) for m in METRIC_NAMES)])
        (out / "per_sample.csv").write_text(buf.getvalue())
        np.savez(out / "error_maps.npz", **{k.replace("/", "__"): v for k, v in error_maps.items()})
    elapsed = time.perf_counter() - t0
    timings_path = out.parent / "timings.json"
    timings = json.loads(timings_path.read_text()) if timings_path.exists() else {}
    timings["evaluate"] = round(elapsed, 3)
    report = {
        "rows": rows,
        "provenance": {
            "config_hash": ds.config_hash,
            "tfrbench": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "base_seed": ds.manifest["base_seed"],
            "monitor_seed": ds.manifest["monitor_seed"],
            "boundary_width": cfg.boundary_width,
            "config": cfg.to_dict(),
        },
        "timings_seconds": timings,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    _record_timing(out.parent, "evaluate", elapsed)
    return report


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r["method"], r["case"], r["test_set"], *(_fmt(r[m]) for m in METRIC_NAMES),
                    r["n_samples"], r["config_hash"]])
    return buf.getvalue()


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0].keys()) != CSV_COLUMNS:
        raise FormatError(f"{path}: unexpected columns {list(rows[0].keys())}")
    for r in rows:
        for m in METRIC_NAMES:
            r[m] = float(r[m])
        r["n_samples"] = int(r["n_samples"])
    return rows


def markdown_tables(rows) -> str:
    """One table per (case, metric): test sets down, methods across."""
    lines = []
    cases = list(dict.fromkeys(r["case"] for r in rows))
    for case in cases:
        sub = [r for r in rows if r["case"] == case]
        methods = list(dict.fromkeys(r["method"] for r in sub))
        sets = [s for s in STRATEGIES if any(r["test_set"] == s for r in sub)]
        lookup = {(r["method"], r["test_set"]): r for r in sub}
        for metric in METRIC_NAMES:
            lines.append(f"### {case}: {metric.upper()} (K)\n")
            lines.append("| set | " + " | ".join(methods) + " |")
            lines.append("|---|" + "---|" * len(methods))
            for s in sets:
                cells = []
                for mth in methods:
                    r = lookup.get((mth, s))
                    cells.append("" if r is None else f"{r[metric]:.4f}")
                lines.append(f"| {s} | " + " | ".join(cells) + " |")
            lines.append("")
    return "\n".join(lines)


def report(inputs, out: Path, figures: bool = True) -> Path:
    """Merge metrics CSVs into ``report.md`` and render summary figures next to it."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rows, maps = [], []
    for item in inputs:
        item = Path(item)
        csv_path = item / "metrics.csv" if item.is_dir() else item
        if not csv_path.exists():
            raise ConfigError(f"no metrics CSV at {item}")
        rows += read_metrics_csv(csv_path)
        npz = csv_path.parent / "error_maps.npz"
        if npz.exists():
            maps.append(npz)
    md = ["# Reconstruction benchmark\n", markdown_tables(rows)]
    if figures and rows:
        from .plotting import plot_error_maps, plot_metric_bars
        for case in dict.fromkeys(r["case"] for r in rows):
            for metric in ("mae", "maxae"):
                name = f"{case.lower()}_{metric}.png"
                plot_metric_bars([r for r in rows if r["case"] == case], metric, out / name)
                md.append(f"![{case} {metric}]({name})\n")
        for k, npz in enumerate(maps):
            name = f"error_maps_{k}.png"
            plot_error_maps(npz, out / name)
            md.append(f"![mean absolute error maps]({name})\n")
    (out / "report.md").write_text("\n".join(md))
    return out / "report.md"
